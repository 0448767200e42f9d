#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bwkm {

// One per-iteration measurement row of a trial.  `distances` is the ledger
// count at emission time (cumulative, strictly increasing down a trial).
struct IterRow {
  std::int64_t iter = 0;
  std::uint64_t distances = 0;
  std::optional<double> weighted_error;
  std::optional<double> exact_error;
  std::optional<std::int64_t> cells;
  std::optional<std::int64_t> boundary;

  friend bool operator==(const IterRow&, const IterRow&) = default;
};

// A full trial: one (method, dataset, k, seed) run with its rows.
struct TrialRecord {
  std::string method;
  std::string dataset;
  std::int64_t k = 0;
  std::uint64_t seed = 0;
  std::vector<IterRow> rows;
  std::string stop_reason;
  std::int64_t wall_ms = 0;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

}  // namespace bwkm
