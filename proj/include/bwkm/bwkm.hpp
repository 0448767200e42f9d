#pragma once

#include "bwkm/geometry.hpp"
#include "bwkm/lloyd.hpp"
#include "bwkm/record.hpp"
#include "bwkm/rng.hpp"
#include "bwkm/seeding.hpp"
#include "bwkm/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bwkm {

// Per-cell misassignment certificate.  delta is the margin of the cell's
// representative (distance to its second-nearest centroid minus distance to
// its nearest); epsilon = max(0, 2*l - delta) with l the diagonal of the
// cell's point envelope.  epsilon == 0 certifies that every member point of
// the cell shares the representative's nearest centroid; cells with
// epsilon > 0 form the boundary.
template <class Scalar>
struct MisassignmentReportT {
  VecX<Scalar> epsilon;
  VecX<Scalar> delta;
  std::vector<Index> boundary;  // ascending cell indices with epsilon > 0
  Scalar epsilon_total = 0;
};
using MisassignmentReport = MisassignmentReportT<double>;

// Computed purely from the cached assignment: zero distance evaluations.
template <class Scalar>
MisassignmentReportT<Scalar> misassignment(const PartitionStateT<Scalar>& state,
                                           const AssignmentCacheT<Scalar>& cache) {
  if (cache.size() != state.size())
    throw std::invalid_argument("misassignment: cache does not match the partition");
  const Index m = state.size();
  MisassignmentReportT<Scalar> rep;
  rep.epsilon.resize(m);
  rep.delta.resize(m);
  for (Index i = 0; i < m; ++i) {
    Scalar delta = cache.second_dist(i) - cache.nearest_dist(i);
    Scalar l = state.cells[static_cast<std::size_t>(i)].fit_box.diagonal;
    Scalar eps = std::max(Scalar(0), Scalar(2) * l - delta);
    rep.delta(i) = delta;
    rep.epsilon(i) = eps;
    if (eps > Scalar(0)) rep.boundary.push_back(i);
    rep.epsilon_total += eps;
  }
  return rep;
}

// Ground-truth check used to validate the certificate: true iff every member
// point of the cell has the same nearest centroid (lowest index on ties).
// Brute force over members; does not touch any ledger.
template <class Scalar>
bool well_assigned_check(const DatasetT<Scalar>& data, const CellT<Scalar>& cell,
                         const CentroidSetT<Scalar>& centers) {
  if (centers.rows() < 1) throw std::invalid_argument("well_assigned_check: no centroids");
  auto nearest_of = [&](Index pt) {
    Scalar best = std::numeric_limits<Scalar>::infinity();
    Index best_c = 0;
    for (Index c = 0; c < centers.rows(); ++c) {
      Scalar d2 = (centers.row(c) - data.points.row(pt)).squaredNorm();
      if (d2 < best) {
        best = d2;
        best_c = c;
      }
    }
    return best_c;
  };
  Index ref = nearest_of(cell.members.front());
  for (Index idx : cell.members)
    if (nearest_of(idx) != ref) return false;
  return true;
}

// Centroid-displacement tolerance for the shift stop rule: when every
// centroid moves by at most epsilon_w(l, n, eps) between consecutive
// solutions, with l bounding each point's distance to its nearest centroid,
// the full-data error changes by at most eps^2/n — hence by at most eps
// whenever eps <= n.  Algebraically sqrt(l^2 + (eps/n)^2) - l, evaluated in
// the cancellation-free form x^2 / (sqrt(l^2 + x^2) + l).
template <class Scalar>
Scalar epsilon_w(Scalar l, Scalar n, Scalar eps) {
  if (!(l >= 0) || !(n >= 1) || !(eps >= 0)) throw std::invalid_argument("epsilon_w: bad arguments");
  Scalar x = eps / n;
  Scalar denom = std::sqrt(l * l + x * x) + l;
  if (denom == Scalar(0)) return Scalar(0);
  return x * x / denom;
}

// Upper bound on |E_data - E_partition| from the current certificate:
// sum over cells of 2*|P|*eps*(2*l + dist(mean, nearest centroid))
// plus (|P|-1)/2 * l^2.
template <class Scalar>
Scalar weighted_bound(const PartitionStateT<Scalar>& state, const AssignmentCacheT<Scalar>& cache,
                      const MisassignmentReportT<Scalar>& rep) {
  if (cache.size() != state.size() || rep.epsilon.size() != state.size())
    throw std::invalid_argument("weighted_bound: inputs do not match the partition");
  Scalar total = 0;
  for (Index i = 0; i < state.size(); ++i) {
    const auto& cell = state.cells[static_cast<std::size_t>(i)];
    Scalar w = cell.weight();
    Scalar l = cell.fit_box.diagonal;
    total += Scalar(2) * w * rep.epsilon(i) * (Scalar(2) * l + cache.nearest_dist(i));
    total += (w - Scalar(1)) / Scalar(2) * l * l;
  }
  return total;
}

template <class Scalar>
struct StartingPartitionResultT {
  PartitionStateT<Scalar> state;
  // True when growth stopped early because every remaining cell is a single
  // geometric point (zero envelope diagonal).
  bool degenerate_stop = false;
};

// Grow the root box to ~m_prime cells guided by a uniform sample of size s:
// each round samples the data, weights every cell by envelope diagonal times
// sample hits, and splits a with-replacement draw of cell targets.  When the
// sample misses every splittable cell, full member counts stand in for the
// hits (deterministic, avoids resampling loops).  No distance evaluations.
template <class Scalar>
StartingPartitionResultT<Scalar> starting_partition(const DatasetT<Scalar>& data, Index m_prime,
                                                    Index s, RngStream& rng) {
  if (m_prime < 1) throw std::invalid_argument("starting_partition: m_prime < 1");
  if (s < 1) throw std::invalid_argument("starting_partition: s < 1");
  StartingPartitionResultT<Scalar> out;
  out.state = root_partition(data);
  auto& state = out.state;
  const Index n = data.n();
  const Index s_eff = std::min(s, n);

  while (state.size() < m_prime) {
    bool splittable = false;
    for (const auto& c : state.cells)
      if (!c.fit_box.degenerate()) {
        splittable = true;
        break;
      }
    if (!splittable) {
      out.degenerate_stop = true;
      break;
    }
    auto sample = rng.sample_without_replacement(n, s_eff);
    VecX<Scalar> probs = VecX<Scalar>::Zero(state.size());
    for (Index idx : sample) probs(state.cell_of[static_cast<std::size_t>(idx)]) += Scalar(1);
    for (Index ci = 0; ci < state.size(); ++ci)
      probs(ci) *= state.cells[static_cast<std::size_t>(ci)].fit_box.diagonal;
    if (!(probs.sum() > Scalar(0))) {
      for (Index ci = 0; ci < state.size(); ++ci) {
        const auto& c = state.cells[static_cast<std::size_t>(ci)];
        probs(ci) = c.fit_box.diagonal * c.weight();
      }
    }
    Index t = std::min(state.size(), m_prime - state.size());
    std::set<Index> targets;
    for (Index draw = 0; draw < t; ++draw) targets.insert(rng.pick_weighted(probs));
    for (Index ci : targets) split_cell(state, data, ci);
  }
  return out;
}

template <class Scalar>
struct CutProbResultT {
  VecX<Scalar> prob;  // sums to 1, or all-zero when every cell is degenerate
  // True when every sampled round produced zero misassignment mass and the
  // diagonal-times-hits surrogate was used instead.
  bool fallback = false;
  int rounds_done = 0;
};

// Estimate, per cell, the probability that it straddles a centroid boundary:
// r rounds each draw a uniform sample, run weighted k-means++ on the
// sample-induced reps, and accumulate the misassignment value of every hit
// cell (using the cell's full envelope diagonal as its length scale).  The
// accumulated values normalize into cutting probabilities.  Budget-gated:
// rounds stop early when a scoring pass is no longer affordable.
template <class Scalar>
CutProbResultT<Scalar> cutting_probabilities(const DatasetT<Scalar>& data,
                                             const PartitionStateT<Scalar>& state, Index k, Index s,
                                             Index r, RngStream& rng, DistanceLedger& ledger) {
  if (k < 1) throw std::invalid_argument("cutting_probabilities: k < 1");
  if (r < 1) throw std::invalid_argument("cutting_probabilities: r < 1");
  const Index n = data.n();
  const Index m = state.size();
  const Index s_eff = std::min(std::max(s, Index(1)), n);

  CutProbResultT<Scalar> out;
  VecX<Scalar> sum_eps = VecX<Scalar>::Zero(m);
  VecX<Scalar> last_hits = VecX<Scalar>::Zero(m);

  for (Index round = 0; round < r; ++round) {
    auto sample = rng.sample_without_replacement(n, s_eff);
    VecX<Scalar> hits = VecX<Scalar>::Zero(m);
    MatrixX<Scalar> sums = MatrixX<Scalar>::Zero(m, data.dim());
    for (Index idx : sample) {
      Index ci = state.cell_of[static_cast<std::size_t>(idx)];
      hits(ci) += Scalar(1);
      sums.row(ci) += data.points.row(idx);
    }
    std::vector<Index> hit_cells;
    for (Index ci = 0; ci < m; ++ci)
      if (hits(ci) > Scalar(0)) hit_cells.push_back(ci);
    const Index h = static_cast<Index>(hit_cells.size());

    WeightedSetT<Scalar> ws;
    ws.reps.resize(h, data.dim());
    ws.weights.resize(h);
    for (Index row = 0; row < h; ++row) {
      Index ci = hit_cells[static_cast<std::size_t>(row)];
      ws.reps.row(row) = sums.row(ci) / hits(ci);
      ws.weights(row) = hits(ci);
    }

    CentroidSetT<Scalar> centers = kmeanspp(ws, k, rng, ledger);
    const std::uint64_t score_pass = static_cast<std::uint64_t>(h) * static_cast<std::uint64_t>(k);
    if (!ledger.can_charge(score_pass)) break;
    AssignmentCacheT<Scalar> cache = assign(ws, centers, ledger);
    for (Index row = 0; row < h; ++row) {
      Index ci = hit_cells[static_cast<std::size_t>(row)];
      Scalar l = state.cells[static_cast<std::size_t>(ci)].fit_box.diagonal;
      Scalar delta = cache.second_dist(row) - cache.nearest_dist(row);
      sum_eps(ci) += std::max(Scalar(0), Scalar(2) * l - delta);
    }
    last_hits = hits;
    ++out.rounds_done;
  }

  Scalar total = sum_eps.sum();
  if (total > Scalar(0)) {
    out.prob = sum_eps / total;
    return out;
  }
  out.fallback = true;
  VecX<Scalar> w(m);
  for (Index ci = 0; ci < m; ++ci)
    w(ci) = state.cells[static_cast<std::size_t>(ci)].fit_box.diagonal * last_hits(ci);
  if (!(w.sum() > Scalar(0))) {
    for (Index ci = 0; ci < m; ++ci) {
      const auto& c = state.cells[static_cast<std::size_t>(ci)];
      w(ci) = c.fit_box.diagonal * c.weight();
    }
  }
  Scalar wsum = w.sum();
  out.prob = wsum > Scalar(0) ? VecX<Scalar>(w / wsum) : VecX<Scalar>(VecX<Scalar>::Zero(m));
  return out;
}

// Any-of stop rules for the outer loop.  An empty boundary (after the exact
// fixed-point polish re-confirms it) always terminates, because refinement
// is undefined without boundary cells.
struct StopSpec {
  std::optional<std::uint64_t> budget;   // absolute distance allowance for the run
  std::optional<double> shift_eps;       // stop when the max centroid shift <= epsilon_w(l, n, eps)
  std::optional<double> bound_threshold; // stop when weighted_bound() <= threshold
  int max_outer = 100;
};

struct BwkmConfig {
  Index k = 0;
  Index m = -1;        // target cell count; -1 selects ceil(10 * sqrt(k * d))
  Index m_prime = -1;  // starting cell count; -1 selects max(k + 1, ceil(sqrt(k * d)))
  Index s = -1;        // sample size per round; -1 selects ceil(sqrt(n))
  Index r = 5;         // sampling rounds for cutting probabilities
  StopSpec stop;
  LloydOptions inner;
  // Hard complexity cap: the run never evaluates more than
  // budget_factor * n * k * d distances, independent of stop rules.
  std::uint64_t budget_factor = 5;

  void resolve(Index n, Index d) {
    if (k < 1) throw std::invalid_argument("bwkm: k < 1");
    if (k > n) throw std::invalid_argument("bwkm: k exceeds the number of points");
    if (r < 1) throw std::invalid_argument("bwkm: r < 1");
    double kd = static_cast<double>(k) * static_cast<double>(d);
    if (m < 0) m = static_cast<Index>(std::ceil(10.0 * std::sqrt(kd)));
    if (m_prime < 0)
      m_prime = std::max(k + 1, static_cast<Index>(std::ceil(std::sqrt(kd))));
    if (s < 0) s = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(n))));
    if (m < 1 || m_prime < 1 || s < 1) throw std::invalid_argument("bwkm: non-positive size parameter");
  }
};

template <class Scalar>
struct InitialPartitionResultT {
  PartitionStateT<Scalar> state;
  bool degenerate_stop = false;
  bool fallback_used = false;
};

// Starting partition followed by cutting-probability-driven growth to m
// cells.  Stops early when every cell is degenerate (all-duplicate data).
template <class Scalar>
InitialPartitionResultT<Scalar> initial_partition(const DatasetT<Scalar>& data, const BwkmConfig& cfg,
                                                  RngStream& rng, DistanceLedger& ledger) {
  InitialPartitionResultT<Scalar> out;
  auto sp = starting_partition(data, cfg.m_prime, cfg.s, rng);
  out.state = std::move(sp.state);
  out.degenerate_stop = sp.degenerate_stop;
  auto& state = out.state;

  while (!out.degenerate_stop && state.size() < cfg.m) {
    auto cp = cutting_probabilities(data, state, cfg.k, cfg.s, cfg.r, rng, ledger);
    out.fallback_used |= cp.fallback;
    if (!(cp.prob.sum() > Scalar(0))) {
      out.degenerate_stop = true;
      break;
    }
    Index t = std::min(state.size(), cfg.m - state.size());
    std::set<Index> targets;
    for (Index draw = 0; draw < t; ++draw) targets.insert(rng.pick_weighted(cp.prob));
    for (Index ci : targets) split_cell(state, data, ci);
    ++state.generation;
  }
  return out;
}

// One refinement round: draw |boundary| cells with replacement proportional
// to epsilon, and split each distinct draw once at its envelope midpoint.
// Grows the partition by at most |boundary| cells; zero-epsilon cells are
// never drawn.  Throws when the boundary is empty (nothing to refine).
template <class Scalar>
Index refine(const DatasetT<Scalar>& data, PartitionStateT<Scalar>& state,
             const MisassignmentReportT<Scalar>& rep, RngStream& rng) {
  if (rep.epsilon.size() != state.size())
    throw std::invalid_argument("refine: report does not match the partition");
  if (rep.boundary.empty()) throw std::logic_error("refine: boundary is empty");
  const Index draws = static_cast<Index>(rep.boundary.size());
  std::set<Index> targets;
  for (Index t = 0; t < draws; ++t) targets.insert(rng.pick_weighted(rep.epsilon));
  for (Index ci : targets) split_cell(state, data, ci);
  ++state.generation;
  return static_cast<Index>(targets.size());
}

// Optional measurement hooks.  exact_error is an oracle channel (it must not
// touch the run's ledger); inner_observer sees every weighted Lloyd step.
template <class Scalar>
struct InstrumentationT {
  std::function<Scalar(const CentroidSetT<Scalar>&)> exact_error;
  LloydObserverT<Scalar> inner_observer;
};
using Instrumentation = InstrumentationT<double>;

template <class Scalar>
struct BwkmResultT {
  CentroidSetT<Scalar> centers;
  PartitionStateT<Scalar> state;
  AssignmentCacheT<Scalar> cache;          // final assignment of cell reps
  MisassignmentReportT<Scalar> report;     // matches `cache`
  TrialRecord record;                      // rows + stop_reason; caller stamps dataset/seed
  int outer_iterations = 0;
};
using BwkmResult = BwkmResultT<double>;

// Boundary weighted k-means.  Builds the initial partition, seeds centroids
// with weighted k-means++ on the cell reps, then alternates weighted Lloyd
// with boundary-guided refinement until a stop rule fires.  When the
// boundary empties, the run first polishes to an assignment-stable fixed
// point and re-checks: only a boundary that stays empty terminates, since
// the certificate then transfers the fixed point to the full dataset.
template <class Scalar>
BwkmResultT<Scalar> bwkm(const DatasetT<Scalar>& data, BwkmConfig cfg, RngStream& rng,
                         DistanceLedger& ledger, const InstrumentationT<Scalar>* instr = nullptr) {
  data.validate();
  cfg.resolve(data.n(), data.dim());
  const Index n = data.n();
  const Index k = cfg.k;

  std::uint64_t allowance = cfg.budget_factor * static_cast<std::uint64_t>(n) *
                            static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(data.dim());
  if (cfg.stop.budget) allowance = std::min(allowance, *cfg.stop.budget);
  if (ledger.count <= std::numeric_limits<std::uint64_t>::max() - allowance)
    ledger.cap = std::min(ledger.cap, ledger.count + allowance);

  BwkmResultT<Scalar> res;
  res.record.method = "bwkm";
  res.record.k = k;

  // For the shift rule: centroids are means of data subsets, so every point
  // sits within one box diagonal of its nearest centroid.
  const Scalar root_diag = bounding_box(data).diagonal;

  auto init = initial_partition(data, cfg, rng, ledger);
  res.state = std::move(init.state);
  WeightedSetT<Scalar> ws = res.state.weighted_set();

  auto emit = [&](int iter, std::optional<Scalar> werr, std::optional<Index> boundary) {
    IterRow row;
    row.iter = iter;
    row.distances = ledger.count;
    if (werr) row.weighted_error = static_cast<double>(*werr);
    row.cells = res.state.size();
    if (boundary) row.boundary = static_cast<std::int64_t>(*boundary);
    if (instr != nullptr && instr->exact_error && res.centers.rows() == k)
      row.exact_error = static_cast<double>(instr->exact_error(res.centers));
    res.record.rows.push_back(row);
  };

  const LloydObserverT<Scalar>* obs =
      (instr != nullptr && instr->inner_observer) ? &instr->inner_observer : nullptr;

  res.centers = kmeanspp(ws, k, rng, ledger);
  auto lr = weighted_lloyd(ws, res.centers, cfg.inner, ledger, obs);
  res.centers = lr.centers;
  if (lr.cache.empty()) {  // budget died before a single assignment pass
    res.record.stop_reason = "distance_budget";
    emit(0, std::nullopt, std::nullopt);
    return res;
  }
  AssignmentCacheT<Scalar> cache = std::move(lr.cache);
  Scalar error = lr.error;

  std::optional<Scalar> last_shift;
  int outer = 0;
  std::string stop;
  while (true) {
    res.report = misassignment(res.state, cache);
    emit(outer, error, static_cast<Index>(res.report.boundary.size()));

    if (res.report.boundary.empty()) {
      LloydOptions polish;
      polish.stop_on_error_delta = false;
      polish.stop_on_stable_assignment = true;
      polish.max_iters = std::max(cfg.inner.max_iters, 1000);
      auto pr = weighted_lloyd(ws, res.centers, polish, ledger, obs, &cache);
      res.centers = pr.centers;
      cache = std::move(pr.cache);
      error = pr.error;
      res.report = misassignment(res.state, cache);
      if (pr.iterations > 0) {
        ++outer;
        emit(outer, error, static_cast<Index>(res.report.boundary.size()));
      }
      if (pr.stop == LloydStop::Budget) {
        stop = "distance_budget";
        break;
      }
      if (pr.stop == LloydStop::MaxIterations) {
        stop = "iteration_cap";
        break;
      }
      if (res.report.boundary.empty()) {
        stop = "empty_boundary";
        break;
      }
      // The polish moved centroids enough to reopen the boundary; continue.
    }

    if (cfg.stop.shift_eps && last_shift) {
      Scalar thr = epsilon_w(root_diag, static_cast<Scalar>(n), static_cast<Scalar>(*cfg.stop.shift_eps));
      if (*last_shift <= thr) {
        stop = "centroid_shift";
        break;
      }
    }
    if (cfg.stop.bound_threshold &&
        weighted_bound(res.state, cache, res.report) <= static_cast<Scalar>(*cfg.stop.bound_threshold)) {
      stop = "weighted_bound";
      break;
    }
    if (outer >= cfg.stop.max_outer) {
      stop = "iteration_cap";
      break;
    }

    // The next round needs one assignment pass over at most
    // |cells| + |boundary| cells, plus k shift distances when tracked.
    std::uint64_t next_pass =
        (static_cast<std::uint64_t>(res.state.size()) + res.report.boundary.size()) *
        static_cast<std::uint64_t>(k);
    if (cfg.stop.shift_eps) next_pass += static_cast<std::uint64_t>(k);
    if (!ledger.can_charge(next_pass)) {
      stop = "distance_budget";
      break;
    }

    refine(data, res.state, res.report, rng);
    ws = res.state.weighted_set();
    CentroidSetT<Scalar> warm_start = res.centers;
    lr = weighted_lloyd(ws, std::move(warm_start), cfg.inner, ledger, obs);
    if (cfg.stop.shift_eps) {
      ledger.charge(static_cast<std::uint64_t>(k));
      Scalar shift = 0;
      for (Index c = 0; c < k; ++c)
        shift = std::max(shift, (lr.centers.row(c) - res.centers.row(c)).norm());
      last_shift = shift;
    }
    res.centers = lr.centers;
    cache = std::move(lr.cache);
    error = lr.error;
    ++outer;
  }

  res.record.stop_reason = stop;
  res.outer_iterations = outer;
  return res;
}

}  // namespace bwkm
