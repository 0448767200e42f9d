#pragma once

#include "bwkm/bwkm.hpp"
#include "bwkm/geometry.hpp"
#include "bwkm/lloyd.hpp"
#include "bwkm/record.hpp"
#include "bwkm/rng.hpp"
#include "bwkm/seeding.hpp"
#include "bwkm/types.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bwkm {

enum class Seeder { Forgy, KmeansPP, Kmc2 };

template <class Scalar>
struct MethodResultT {
  CentroidSetT<Scalar> centers;
  TrialRecord record;
};
using MethodResult = MethodResultT<double>;

struct BaselineConfig {
  Index k = 0;
  Seeder seeder = Seeder::KmeansPP;
  double eps = -1;            // Lloyd stop threshold; -1 selects 1e-4 * E0 / n
  int max_iters = 100;
  Index chain_length = 200;   // kmc2 only
  std::optional<std::uint64_t> budget;
};

namespace detail {
inline void apply_budget(DistanceLedger& ledger, const std::optional<std::uint64_t>& budget) {
  if (!budget) return;
  if (ledger.count <= std::numeric_limits<std::uint64_t>::max() - *budget)
    ledger.cap = std::min(ledger.cap, ledger.count + *budget);
}
}  // namespace detail

// Full-data Lloyd with a pluggable seeder.  Emits a row for the initial
// assignment (iter 0) and one per iteration; stops when the error delta
// drops to eps, the iteration cap hits, or the budget runs out.
template <class Scalar>
MethodResultT<Scalar> lloyd_full(const DatasetT<Scalar>& data, const BaselineConfig& cfg, RngStream& rng,
                                 DistanceLedger& ledger, const InstrumentationT<Scalar>* instr = nullptr) {
  data.validate();
  if (cfg.k < 1 || cfg.k > data.n()) throw std::invalid_argument("lloyd_full: need 1 <= k <= n");
  detail::apply_budget(ledger, cfg.budget);

  MethodResultT<Scalar> res;
  switch (cfg.seeder) {
    case Seeder::Forgy: res.record.method = "lloyd-forgy"; break;
    case Seeder::KmeansPP: res.record.method = "lloyd-kmpp"; break;
    case Seeder::Kmc2: res.record.method = "lloyd-kmc2"; break;
  }
  res.record.k = cfg.k;

  WeightedSetT<Scalar> ws = WeightedSetT<Scalar>::unit(data.points);
  switch (cfg.seeder) {
    case Seeder::Forgy: res.centers = forgy(ws, cfg.k, rng); break;
    case Seeder::KmeansPP: res.centers = kmeanspp(ws, cfg.k, rng, ledger); break;
    case Seeder::Kmc2: res.centers = kmc2(data, cfg.k, cfg.chain_length, rng, ledger); break;
  }

  const std::uint64_t pass = static_cast<std::uint64_t>(data.n()) * static_cast<std::uint64_t>(cfg.k);
  if (!ledger.can_charge(pass)) {
    IterRow row;
    row.iter = 0;
    row.distances = ledger.count;
    res.record.rows.push_back(row);
    res.record.stop_reason = "distance_budget";
    return res;
  }
  AssignmentCacheT<Scalar> cache0 = assign(ws, res.centers, ledger);
  {
    IterRow row;
    row.iter = 0;
    row.distances = ledger.count;
    row.weighted_error = static_cast<double>(weighted_error_from_cache(ws, cache0));
    res.record.rows.push_back(row);
  }

  LloydObserverT<Scalar> obs = [&](int iter, const CentroidSetT<Scalar>&, const CentroidSetT<Scalar>&,
                                   Scalar, Scalar e_next) {
    IterRow row;
    row.iter = iter;
    row.distances = ledger.count;
    row.weighted_error = static_cast<double>(e_next);
    res.record.rows.push_back(row);
  };

  LloydOptions opts;
  opts.eps = cfg.eps;
  opts.max_iters = cfg.max_iters;
  auto lr = weighted_lloyd(ws, res.centers, opts, ledger, &obs, &cache0);
  res.centers = lr.centers;
  res.record.stop_reason = to_string(lr.stop);
  if (instr != nullptr && instr->exact_error && !res.record.rows.empty())
    res.record.rows.back().exact_error = static_cast<double>(instr->exact_error(res.centers));
  return res;
}

struct MinibatchConfig {
  Index k = 0;
  Index b = 100;        // batch size
  int iterations = 100; // cap; under a budget the ledger usually stops first
  std::optional<std::uint64_t> budget;
};

// Mini-batch k-means: Forgy seed, then per iteration a uniform batch whose
// points each pull their nearest centroid with step 1/count.  The batch is
// assigned against a snapshot of the centers (b*K evaluations), then applied
// sequentially in draw order.
template <class Scalar>
MethodResultT<Scalar> minibatch(const DatasetT<Scalar>& data, const MinibatchConfig& cfg, RngStream& rng,
                                DistanceLedger& ledger, const InstrumentationT<Scalar>* instr = nullptr) {
  data.validate();
  if (cfg.k < 1 || cfg.k > data.n()) throw std::invalid_argument("minibatch: need 1 <= k <= n");
  if (cfg.b < 1) throw std::invalid_argument("minibatch: batch size < 1");
  if (cfg.iterations < 0) throw std::invalid_argument("minibatch: negative iteration cap");
  detail::apply_budget(ledger, cfg.budget);
  const Index n = data.n();
  const Index b = std::min(cfg.b, n);

  MethodResultT<Scalar> res;
  res.record.method = "minibatch";
  res.record.k = cfg.k;

  auto seed_idx = rng.sample_without_replacement(n, cfg.k);
  res.centers.resize(cfg.k, data.dim());
  for (Index i = 0; i < cfg.k; ++i) res.centers.row(i) = data.points.row(seed_idx[static_cast<std::size_t>(i)]);

  VecX<Scalar> counts = VecX<Scalar>::Zero(cfg.k);
  const std::uint64_t batch_pass = static_cast<std::uint64_t>(b) * static_cast<std::uint64_t>(cfg.k);
  res.record.stop_reason = "iteration_cap";
  for (int t = 1; t <= cfg.iterations; ++t) {
    if (!ledger.can_charge(batch_pass)) {
      res.record.stop_reason = "distance_budget";
      break;
    }
    ledger.charge(batch_pass);
    auto batch = rng.sample_without_replacement(n, b);
    std::vector<Index> label(static_cast<std::size_t>(b));
    for (Index j = 0; j < b; ++j) {
      auto p = data.points.row(batch[static_cast<std::size_t>(j)]);
      Scalar best = std::numeric_limits<Scalar>::infinity();
      Index best_c = 0;
      for (Index c = 0; c < cfg.k; ++c) {
        Scalar d2 = (res.centers.row(c) - p).squaredNorm();
        if (d2 < best) {
          best = d2;
          best_c = c;
        }
      }
      label[static_cast<std::size_t>(j)] = best_c;
    }
    for (Index j = 0; j < b; ++j) {
      Index c = label[static_cast<std::size_t>(j)];
      counts(c) += Scalar(1);
      Scalar eta = Scalar(1) / counts(c);
      res.centers.row(c) =
          (Scalar(1) - eta) * res.centers.row(c) + eta * data.points.row(batch[static_cast<std::size_t>(j)]);
    }
    IterRow row;
    row.iter = t;
    row.distances = ledger.count;
    res.record.rows.push_back(row);
  }
  if (res.record.rows.empty()) {
    IterRow row;
    row.iter = 0;
    row.distances = ledger.count;
    res.record.rows.push_back(row);
  }
  if (instr != nullptr && instr->exact_error)
    res.record.rows.back().exact_error = static_cast<double>(instr->exact_error(res.centers));
  return res;
}

// Partition induced by the uniform grid that halves every axis of the
// bounding box `level` times (2^level bins per axis; only non-empty cells
// materialize).  A point on an interior bin boundary belongs to the lower
// bin.  Cell blocks are stored as the tight member envelopes; ordering is
// lexicographic in the grid key, so the result is deterministic.  Costs no
// distance evaluations.
template <class Scalar>
PartitionStateT<Scalar> grid_partition(const DatasetT<Scalar>& data, int level) {
  if (level < 0 || level > 40) throw std::invalid_argument("grid_partition: level out of range");
  auto box = bounding_box(data);
  const Index d = data.dim();
  const std::uint64_t bins = std::uint64_t(1) << level;

  std::map<std::vector<std::uint64_t>, std::vector<Index>> groups;
  std::vector<std::uint64_t> key(static_cast<std::size_t>(d));
  for (Index i = 0; i < data.n(); ++i) {
    for (Index j = 0; j < d; ++j) {
      Scalar lo = box.lower(j), up = box.upper(j);
      Scalar w = (up - lo) / static_cast<Scalar>(bins);
      std::uint64_t kj = 0;
      if (w > Scalar(0)) {
        Scalar t = (data.points(i, j) - lo) / w;
        auto f = static_cast<long long>(std::floor(static_cast<double>(t)));
        if (f < 0) f = 0;
        kj = static_cast<std::uint64_t>(f);
        if (kj >= bins) kj = bins - 1;
        // A point exactly on an interior boundary drops to the lower bin.
        if (kj > 0 && data.points(i, j) <= lo + static_cast<Scalar>(kj) * w) kj -= 1;
      }
      key[static_cast<std::size_t>(j)] = kj;
    }
    groups[key].push_back(i);
  }

  PartitionStateT<Scalar> state;
  state.cell_of.assign(static_cast<std::size_t>(data.n()), -1);
  for (auto& [k, members] : groups) {
    Index ci = state.size();
    for (Index idx : members) state.cell_of[static_cast<std::size_t>(idx)] = ci;
    RowVecX<Scalar> lo = data.points.row(members.front());
    RowVecX<Scalar> up = lo;
    for (Index idx : members) {
      lo = lo.cwiseMin(data.points.row(idx));
      up = up.cwiseMax(data.points.row(idx));
    }
    state.cells.push_back(make_cell(data, BlockT<Scalar>::from_bounds(lo, up), std::move(members)));
  }
  state.generation = level;
  return state;
}

struct GridRpkmConfig {
  Index k = 0;
  int max_levels = 10;
  double eps = -1;
  int max_iters = 100;
  std::optional<std::uint64_t> budget;
};

// Grid-based recursive-partition k-means: level i runs weighted Lloyd on the
// level-i grid cells, warm-started from the previous level's centers (level
// 1 seeds with weighted k-means++).  Stops after max_levels, when every cell
// is a singleton, or on budget exhaustion.
template <class Scalar>
MethodResultT<Scalar> grid_rpkm(const DatasetT<Scalar>& data, const GridRpkmConfig& cfg, RngStream& rng,
                                DistanceLedger& ledger, const InstrumentationT<Scalar>* instr = nullptr) {
  data.validate();
  if (cfg.k < 1 || cfg.k > data.n()) throw std::invalid_argument("grid_rpkm: need 1 <= k <= n");
  if (cfg.max_levels < 1) throw std::invalid_argument("grid_rpkm: max_levels < 1");
  detail::apply_budget(ledger, cfg.budget);

  MethodResultT<Scalar> res;
  res.record.method = "grid-rpkm";
  res.record.k = cfg.k;
  res.record.stop_reason = "iteration_cap";

  LloydOptions opts;
  opts.eps = cfg.eps;
  opts.max_iters = cfg.max_iters;

  bool seeded = false;
  for (int level = 1; level <= cfg.max_levels; ++level) {
    PartitionStateT<Scalar> state = grid_partition(data, level);
    WeightedSetT<Scalar> ws = state.weighted_set();
    if (!seeded) {
      res.centers = kmeanspp(ws, cfg.k, rng, ledger);
      seeded = true;
    }
    if (!ledger.can_charge(static_cast<std::uint64_t>(ws.size()) * static_cast<std::uint64_t>(cfg.k))) {
      res.record.stop_reason = "distance_budget";
      break;
    }
    auto lr = weighted_lloyd(ws, res.centers, opts, ledger, static_cast<const LloydObserverT<Scalar>*>(nullptr));
    res.centers = lr.centers;
    IterRow row;
    row.iter = level;
    row.distances = ledger.count;
    row.weighted_error = static_cast<double>(lr.error);
    row.cells = state.size();
    res.record.rows.push_back(row);
    if (lr.stop == LloydStop::Budget) {
      res.record.stop_reason = "distance_budget";
      break;
    }
    if (state.size() == data.n()) {
      res.record.stop_reason = "all_singletons";
      break;
    }
  }
  if (res.record.rows.empty()) {
    IterRow row;
    row.iter = 0;
    row.distances = ledger.count;
    res.record.rows.push_back(row);
  }
  if (instr != nullptr && instr->exact_error)
    res.record.rows.back().exact_error = static_cast<double>(instr->exact_error(res.centers));
  return res;
}

// Bare k-means++ on the raw points, reported as its own method.
template <class Scalar>
MethodResultT<Scalar> kmpp_init(const DatasetT<Scalar>& data, Index k, RngStream& rng,
                                DistanceLedger& ledger, const InstrumentationT<Scalar>* instr = nullptr) {
  data.validate();
  if (k < 1 || k > data.n()) throw std::invalid_argument("kmpp_init: need 1 <= k <= n");
  MethodResultT<Scalar> res;
  res.record.method = "kmpp-init";
  res.record.k = k;
  WeightedSetT<Scalar> ws = WeightedSetT<Scalar>::unit(data.points);
  res.centers = kmeanspp(ws, k, rng, ledger);
  IterRow row;
  row.iter = 0;
  row.distances = ledger.count;
  if (instr != nullptr && instr->exact_error)
    row.exact_error = static_cast<double>(instr->exact_error(res.centers));
  res.record.rows.push_back(row);
  res.record.stop_reason = "init_complete";
  return res;
}

}  // namespace bwkm
