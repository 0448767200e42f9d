// Command-line front end: run a single clustering method, sweep a benchmark
// grid, generate synthetic mixtures, or validate a dataset file.
// Exit codes: 0 success, 2 bad flags, 3 file I/O, 4 contract violations.

#include "bwkm/baselines.hpp"
#include "bwkm/bench.hpp"
#include "bwkm/bwkm.hpp"
#include "bwkm/io.hpp"
#include "bwkm/metrics.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct StopFlags {
  std::optional<std::uint64_t> budget;
  bool boundary = false;
  std::optional<double> shift_eps;
  std::optional<double> bound_threshold;
  std::optional<int> iters;
};

// Tokens: budget:X | boundary | shift:EPS | bound:T | iters:N.
StopFlags parse_stop(const std::vector<std::string>& tokens) {
  StopFlags out;
  for (const auto& tok : tokens) {
    auto bad = [&](const std::string& why) {
      throw CLI::ValidationError("--stop", "'" + tok + "': " + why);
    };
    std::string key = tok, value;
    if (auto pos = tok.find(':'); pos != std::string::npos) {
      key = tok.substr(0, pos);
      value = tok.substr(pos + 1);
    }
    auto number = [&]() {
      try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) bad("trailing characters after number");
        return v;
      } catch (const std::exception&) {
        bad("expected a number after ':'");
        return 0.0;
      }
    };
    if (key == "boundary") {
      if (!value.empty()) bad("boundary takes no value");
      out.boundary = true;
    } else if (key == "budget") {
      double v = number();
      if (v < 1) bad("budget must be >= 1");
      out.budget = static_cast<std::uint64_t>(v);
    } else if (key == "shift") {
      double v = number();
      if (v < 0) bad("shift tolerance must be >= 0");
      out.shift_eps = v;
    } else if (key == "bound") {
      double v = number();
      if (v < 0) bad("bound threshold must be >= 0");
      out.bound_threshold = v;
    } else if (key == "iters") {
      double v = number();
      if (v < 1) bad("iters must be >= 1");
      out.iters = static_cast<int>(v);
    } else {
      bad("unknown stop rule (expected budget:X | boundary | shift:EPS | bound:T | iters:N)");
    }
  }
  return out;
}

struct ClusterArgs {
  std::string data;
  std::int64_t k = 0;
  std::string method = "bwkm";
  std::uint64_t seed = 1;
  std::vector<std::string> stop;
  std::int64_t m = -1, m_prime = -1, s = -1, r = 5;
  std::int64_t b = 100;
  std::int64_t chain = 200;
  std::string out = "run";
  bool test_mode = false;
};

int run_cluster(const ClusterArgs& a) {
  StopFlags stop = parse_stop(a.stop);
  bwkm::Dataset data = bwkm::read_dataset_csv(a.data);
  data.validate();

  bwkm::RngStream rng(a.seed, 0);
  bwkm::DistanceLedger ledger;
  bwkm::Instrumentation instr;
  instr.exact_error = [&data](const bwkm::CentroidSet& c) { return bwkm::exact_error(data, c); };
  const bwkm::Instrumentation* instr_ptr = a.test_mode ? &instr : nullptr;

  bwkm::CentroidSet centers;
  bwkm::TrialRecord record;

  if (a.method == "bwkm") {
    bwkm::BwkmConfig cfg;
    cfg.k = a.k;
    cfg.m = a.m;
    cfg.m_prime = a.m_prime;
    cfg.s = a.s;
    cfg.r = a.r;
    cfg.stop.budget = stop.budget;
    cfg.stop.shift_eps = stop.shift_eps;
    cfg.stop.bound_threshold = stop.bound_threshold;
    if (stop.iters) cfg.stop.max_outer = *stop.iters;
    // "boundary" is the intrinsic rule and is always active.
    auto res = bwkm::bwkm(data, cfg, rng, ledger, instr_ptr);
    centers = std::move(res.centers);
    record = std::move(res.record);
  } else {
    if (stop.shift_eps || stop.bound_threshold)
      throw CLI::ValidationError("--stop", "shift/bound rules apply to --method bwkm only");
    if (a.method == "lloyd-forgy" || a.method == "lloyd-kmpp" || a.method == "lloyd-kmc2") {
      bwkm::BaselineConfig cfg;
      cfg.k = a.k;
      cfg.seeder = a.method == "lloyd-forgy"  ? bwkm::Seeder::Forgy
                   : a.method == "lloyd-kmpp" ? bwkm::Seeder::KmeansPP
                                              : bwkm::Seeder::Kmc2;
      cfg.chain_length = a.chain;
      cfg.budget = stop.budget;
      if (stop.iters) cfg.max_iters = *stop.iters;
      auto res = bwkm::lloyd_full(data, cfg, rng, ledger, instr_ptr);
      centers = std::move(res.centers);
      record = std::move(res.record);
    } else if (a.method == "minibatch") {
      bwkm::MinibatchConfig cfg;
      cfg.k = a.k;
      cfg.b = a.b;
      cfg.budget = stop.budget;
      if (stop.iters) cfg.iterations = *stop.iters;
      auto res = bwkm::minibatch(data, cfg, rng, ledger, instr_ptr);
      centers = std::move(res.centers);
      record = std::move(res.record);
    } else if (a.method == "grid-rpkm") {
      bwkm::GridRpkmConfig cfg;
      cfg.k = a.k;
      cfg.budget = stop.budget;
      if (stop.iters) cfg.max_levels = *stop.iters;
      auto res = bwkm::grid_rpkm(data, cfg, rng, ledger, instr_ptr);
      centers = std::move(res.centers);
      record = std::move(res.record);
    } else {  // kmpp-init; the option check has already vetted the name
      auto res = bwkm::kmpp_init(data, a.k, rng, ledger, instr_ptr);
      centers = std::move(res.centers);
      record = std::move(res.record);
    }
  }

  record.dataset = a.data;
  record.seed = a.seed;
  bwkm::Dataset centroid_rows;
  centroid_rows.points = centers;
  bwkm::write_dataset_csv(a.out + ".centroids.csv", centroid_rows);
  std::vector<bwkm::TrialRecord> records{record};
  bwkm::write_records_jsonl(a.out + ".jsonl", records);
  bwkm::write_records_csv(a.out + ".csv", records);
  std::cout << "method=" << record.method << " iterations=" << record.rows.size()
            << " distances=" << ledger.count << " stop=" << record.stop_reason << '\n';
  return 0;
}

struct BenchArgs {
  std::vector<std::string> data;
  std::vector<std::int64_t> k_list = {3, 9, 27};
  int reps = 40;
  std::vector<std::string> methods = {"lloyd-kmpp", "lloyd-forgy"};
  bool no_bwkm = false;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::int64_t m = -1, m_prime = -1, s = -1, r = 5;
  std::int64_t b = 100;
  std::int64_t chain = 200;
  std::string budget = "min";  // min | fixed:X
  std::string out = "bench";
  bool test_mode = false;
  bool wall_clock = false;
};

int run_bench(const BenchArgs& a) {
  bwkm::ExperimentConfig cfg;
  cfg.k_list.assign(a.k_list.begin(), a.k_list.end());
  cfg.repetitions = a.reps;
  for (const auto& name : a.methods) {
    bwkm::MethodSpec spec;
    spec.name = name;
    spec.b = a.b;
    spec.chain = a.chain;
    cfg.baselines.push_back(spec);
  }
  cfg.include_bwkm = !a.no_bwkm;
  cfg.m = a.m;
  cfg.m_prime = a.m_prime;
  cfg.s = a.s;
  cfg.r = a.r;
  cfg.base_seed = a.seed;
  cfg.jobs = a.jobs;
  cfg.test_mode = a.test_mode;
  cfg.wall_clock = a.wall_clock;
  if (a.budget == "min") {
    cfg.policy = bwkm::BudgetPolicy::MinOfBaselines;
  } else if (a.budget.rfind("fixed:", 0) == 0) {
    cfg.policy = bwkm::BudgetPolicy::Fixed;
    try {
      cfg.fixed_budget = static_cast<std::uint64_t>(std::stod(a.budget.substr(6)));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--budget", "expected fixed:<number>");
    }
  } else {
    throw CLI::ValidationError("--budget", "expected 'min' or 'fixed:<number>'");
  }

  std::vector<bwkm::NamedDataset> datasets;
  for (const auto& path : a.data) datasets.push_back({path, bwkm::read_dataset_csv(path)});

  auto records = bwkm::run_experiment(cfg, datasets);
  bwkm::write_records_jsonl(a.out + ".jsonl", records);
  bwkm::write_records_csv(a.out + ".csv", records);
  std::cout << bwkm::format_summary(bwkm::summarize(records));
  std::cout << "wrote " << a.out << ".jsonl and " << a.out << ".csv (" << records.size() << " trials)\n";
  return 0;
}

struct GenArgs {
  std::int64_t n = 1000;
  std::int64_t d = 2;
  std::int64_t k_true = 3;
  double separation = 10.0;
  std::uint64_t seed = 1;
  std::string out = "data.csv";
};

int run_gen(const GenArgs& a) {
  bwkm::RngStream rng(a.seed, 0);
  auto mix = bwkm::synthesize_mixture<double>(a.n, a.d, a.k_true, a.separation, rng);
  bwkm::write_dataset_csv(a.out, mix.data);
  std::cout << "wrote " << a.out << " n=" << a.n << " d=" << a.d << " components=" << a.k_true << '\n';
  return 0;
}

int run_validate(const std::string& path) {
  bwkm::CsvReport rep = bwkm::validate_csv(path);
  std::cout << "rows=" << rep.rows << " cols=" << rep.cols << " header=" << (rep.header ? "yes" : "no")
            << " violations=" << rep.violations.size() << '\n';
  for (const auto& v : rep.violations) std::cout << path << ":" << v.line << ": " << v.message << '\n';
  if (!rep.ok()) throw std::invalid_argument("dataset has violations");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary-weighted k-means clustering and benchmark harness"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI config file; command-line flags win");

  const std::vector<std::string> method_names = {"bwkm",      "lloyd-forgy", "lloyd-kmpp", "lloyd-kmc2",
                                                 "minibatch", "grid-rpkm",   "kmpp-init"};

  ClusterArgs ca;
  auto* cluster = app.add_subcommand("cluster", "Run one clustering method on a dataset");
  cluster->add_option("--data", ca.data, "dataset CSV")->required();
  cluster->add_option("--k", ca.k, "number of centroids")->required()->check(CLI::PositiveNumber);
  cluster->add_option("--method", ca.method, "clustering method")->check(CLI::IsMember(method_names));
  cluster->add_option("--seed", ca.seed, "rng seed");
  cluster->add_option("--stop", ca.stop, "stop rule: budget:X | boundary | shift:EPS | bound:T | iters:N")
      ->take_all();
  cluster->add_option("--m", ca.m, "target cell count (bwkm)");
  cluster->add_option("--m-prime", ca.m_prime, "starting cell count (bwkm)");
  cluster->add_option("--s", ca.s, "sample size per round (bwkm)");
  cluster->add_option("--r", ca.r, "sampling rounds (bwkm)")->check(CLI::PositiveNumber);
  cluster->add_option("--b", ca.b, "batch size (minibatch)")->check(CLI::PositiveNumber);
  cluster->add_option("--chain", ca.chain, "chain length (lloyd-kmc2)")->check(CLI::PositiveNumber);
  cluster->add_option("--out", ca.out, "output prefix");
  cluster->add_flag("--test-mode", ca.test_mode, "attach the exact-error measurement channel");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Run the benchmark grid and write JSONL + CSV");
  bench->add_option("--data", ba.data, "dataset CSV (repeatable)")->required()->take_all();
  bench->add_option("--k", ba.k_list, "k values")->take_all();
  bench->add_option("--reps", ba.reps, "repetitions per (dataset, k)")->check(CLI::PositiveNumber);
  bench->add_option("--methods", ba.methods, "baseline methods")
      ->take_all()
      ->check(CLI::IsMember({"lloyd-forgy", "lloyd-kmpp", "lloyd-kmc2", "minibatch", "grid-rpkm",
                             "kmpp-init"}));
  bench->add_flag("--no-bwkm", ba.no_bwkm, "skip the boundary method");
  bench->add_option("--seed", ba.seed, "base seed");
  bench->add_option("--jobs", ba.jobs, "parallel workers")->check(CLI::PositiveNumber);
  bench->add_option("--m", ba.m, "target cell count (bwkm)");
  bench->add_option("--m-prime", ba.m_prime, "starting cell count (bwkm)");
  bench->add_option("--s", ba.s, "sample size per round (bwkm)");
  bench->add_option("--r", ba.r, "sampling rounds (bwkm)")->check(CLI::PositiveNumber);
  bench->add_option("--b", ba.b, "batch size (minibatch)")->check(CLI::PositiveNumber);
  bench->add_option("--chain", ba.chain, "chain length (lloyd-kmc2)")->check(CLI::PositiveNumber);
  bench->add_option("--budget", ba.budget, "bwkm budget policy: min | fixed:X");
  bench->add_option("--out", ba.out, "output prefix");
  bench->add_flag("--test-mode", ba.test_mode, "per-iteration exact-error channel");
  bench->add_flag("--wall-clock", ba.wall_clock, "record wall time (makes outputs non-reproducible)");

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic Gaussian mixture dataset");
  gen->add_option("--n", ga.n, "points")->check(CLI::PositiveNumber);
  gen->add_option("--d", ga.d, "dimensions")->check(CLI::PositiveNumber);
  gen->add_option("--k-true", ga.k_true, "mixture components")->check(CLI::PositiveNumber);
  gen->add_option("--separation", ga.separation, "minimum distance between component centers")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", ga.seed, "rng seed");
  gen->add_option("--out", ga.out, "output CSV path");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a dataset CSV and report violations");
  validate->add_option("--data", validate_path, "dataset CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }

  try {
    if (cluster->parsed()) return run_cluster(ca);
    if (bench->parsed()) return run_bench(ba);
    if (gen->parsed()) return run_gen(ga);
    if (validate->parsed()) return run_validate(validate_path);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const bwkm::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 4;
  } catch (const std::logic_error& e) {
    std::cerr << "contract violation: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
