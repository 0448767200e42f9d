#pragma once

#include "bwkm/record.hpp"
#include "bwkm/types.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

namespace bwkm {

// Unreadable or unwritable files; distinct from content violations, which
// throw std::invalid_argument (the CLI maps the two to different exit codes).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kTrialSchema = "bwkm-trial-v1";

namespace detail {

inline bool parse_double(std::string_view field, double& out) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && !field.empty();
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);  // shortest round-trip form
  if (ec != std::errc()) throw std::logic_error("format_double: buffer too small");
  return std::string(buf, ptr);
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  q += '"';
  return q;
}

}  // namespace detail

struct CsvViolation {
  long line = 0;
  std::string message;
};

struct CsvReport {
  Index rows = 0;
  Index cols = 0;
  bool header = false;
  std::vector<CsvViolation> violations;  // capped at 100 entries

  bool ok() const { return violations.empty(); }
};

// Scan a numeric CSV file: comma-separated doubles, optional single header
// line (detected when any first-line field is non-numeric), uniform field
// count, finite values only.  Collects line-numbered violations instead of
// throwing on content; only an unreadable file throws.
inline CsvReport validate_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  CsvReport rep;
  std::string line;
  long lineno = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto add = [&](std::string msg) {
      if (rep.violations.size() < 100) rep.violations.push_back({lineno, std::move(msg)});
    };
    if (line.empty()) {
      add("blank line");
      continue;
    }
    auto fields = detail::split_fields(line);
    if (first_content) {
      first_content = false;
      bool numeric = true;
      double v;
      for (auto f : fields)
        if (!detail::parse_double(f, v)) {
          numeric = false;
          break;
        }
      rep.cols = static_cast<Index>(fields.size());
      if (!numeric) {
        rep.header = true;
        continue;
      }
    }
    if (static_cast<Index>(fields.size()) != rep.cols) {
      add("expected " + std::to_string(rep.cols) + " fields, found " + std::to_string(fields.size()));
      continue;
    }
    bool row_ok = true;
    for (std::size_t j = 0; j < fields.size(); ++j) {
      double v;
      if (!detail::parse_double(fields[j], v)) {
        add("field " + std::to_string(j + 1) + " is not a number");
        row_ok = false;
        break;
      }
      if (!std::isfinite(v)) {
        add("field " + std::to_string(j + 1) + " is not finite");
        row_ok = false;
        break;
      }
    }
    if (row_ok) ++rep.rows;
  }
  if (rep.rows == 0 && rep.ok()) rep.violations.push_back({lineno, "no data rows"});
  return rep;
}

// Load a dataset, throwing std::invalid_argument with the first line-numbered
// violation, or IoError when the file cannot be opened.
inline Dataset read_dataset_csv(const std::string& path) {
  CsvReport rep = validate_csv(path);
  if (!rep.ok()) {
    const auto& v = rep.violations.front();
    throw std::invalid_argument(path + ":" + std::to_string(v.line) + ": " + v.message);
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Dataset data;
  data.points.resize(rep.rows, rep.cols);
  std::string line;
  Index row = 0;
  bool skip_header = rep.header;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (skip_header) {
      skip_header = false;
      continue;
    }
    auto fields = detail::split_fields(line);
    for (Index j = 0; j < rep.cols; ++j) {
      double v;
      detail::parse_double(fields[static_cast<std::size_t>(j)], v);
      data.points(row, j) = v;
    }
    ++row;
  }
  return data;
}

inline void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (Index i = 0; i < data.n(); ++i) {
    for (Index j = 0; j < data.dim(); ++j) {
      if (j > 0) out << ',';
      out << detail::format_double(data.points(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

namespace detail {
inline nlohmann::ordered_json row_json(const TrialRecord& rec, const IterRow& row) {
  nlohmann::ordered_json j;
  j["schema"] = kTrialSchema;
  j["method"] = rec.method;
  j["dataset"] = rec.dataset;
  j["k"] = rec.k;
  j["seed"] = rec.seed;
  j["iter"] = row.iter;
  j["distances"] = row.distances;
  j["weighted_error"] = row.weighted_error ? nlohmann::ordered_json(*row.weighted_error)
                                           : nlohmann::ordered_json(nullptr);
  j["exact_error"] =
      row.exact_error ? nlohmann::ordered_json(*row.exact_error) : nlohmann::ordered_json(nullptr);
  j["cells"] = row.cells ? nlohmann::ordered_json(*row.cells) : nlohmann::ordered_json(nullptr);
  j["boundary"] = row.boundary ? nlohmann::ordered_json(*row.boundary) : nlohmann::ordered_json(nullptr);
  j["stop_reason"] = rec.stop_reason;
  j["wall_ms"] = rec.wall_ms;
  return j;
}
}  // namespace detail

// One JSON object per line, one line per iteration row; trial-level fields
// repeat on every row of the trial.  Output is byte-deterministic for equal
// inputs (fixed key order, shortest round-trip number formatting).
inline void write_records_jsonl(const std::string& path, const std::vector<TrialRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& rec : records)
    for (const auto& row : rec.rows) out << detail::row_json(rec, row).dump() << '\n';
  if (!out) throw IoError("write failed for " + path);
}

// Flat CSV mirror of the JSONL stream: identical rows and ordering, empty
// fields where the JSONL has null.
inline void write_records_csv(const std::string& path, const std::vector<TrialRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "schema,method,dataset,k,seed,iter,distances,weighted_error,exact_error,cells,boundary,"
         "stop_reason,wall_ms\n";
  for (const auto& rec : records) {
    for (const auto& row : rec.rows) {
      out << kTrialSchema << ',' << detail::csv_quote(rec.method) << ',' << detail::csv_quote(rec.dataset)
          << ',' << rec.k << ',' << rec.seed << ',' << row.iter << ',' << row.distances << ',';
      if (row.weighted_error) out << detail::format_double(*row.weighted_error);
      out << ',';
      if (row.exact_error) out << detail::format_double(*row.exact_error);
      out << ',';
      if (row.cells) out << *row.cells;
      out << ',';
      if (row.boundary) out << *row.boundary;
      out << ',' << detail::csv_quote(rec.stop_reason) << ',' << rec.wall_ms << '\n';
    }
  }
  if (!out) throw IoError("write failed for " + path);
}

// Rebuild trial records from a JSONL stream written by write_records_jsonl.
// Rows group into trials on change of (method, dataset, k, seed).
inline std::vector<TrialRecord> read_records_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<TrialRecord> records;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (j.value("schema", "") != kTrialSchema)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": unknown schema");
    TrialRecord rec;
    rec.method = j.at("method").get<std::string>();
    rec.dataset = j.at("dataset").get<std::string>();
    rec.k = j.at("k").get<std::int64_t>();
    rec.seed = j.at("seed").get<std::uint64_t>();
    rec.stop_reason = j.at("stop_reason").get<std::string>();
    rec.wall_ms = j.at("wall_ms").get<std::int64_t>();
    IterRow row;
    row.iter = j.at("iter").get<std::int64_t>();
    row.distances = j.at("distances").get<std::uint64_t>();
    if (!j.at("weighted_error").is_null()) row.weighted_error = j.at("weighted_error").get<double>();
    if (!j.at("exact_error").is_null()) row.exact_error = j.at("exact_error").get<double>();
    if (!j.at("cells").is_null()) row.cells = j.at("cells").get<std::int64_t>();
    if (!j.at("boundary").is_null()) row.boundary = j.at("boundary").get<std::int64_t>();
    bool same_trial = !records.empty() && records.back().method == rec.method &&
                      records.back().dataset == rec.dataset && records.back().k == rec.k &&
                      records.back().seed == rec.seed;
    if (same_trial) {
      records.back().rows.push_back(row);
      records.back().stop_reason = rec.stop_reason;
      records.back().wall_ms = rec.wall_ms;
    } else {
      rec.rows.push_back(row);
      records.push_back(std::move(rec));
    }
  }
  return records;
}

}  // namespace bwkm
