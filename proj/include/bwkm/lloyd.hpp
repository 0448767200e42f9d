#pragma once

#include "bwkm/types.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace bwkm {

// Squared Euclidean distance, computed elementwise on the difference.
// Deliberately not the expanded |a|^2 + |b|^2 - 2ab form: the expansion can
// cancel catastrophically for near-coincident vectors, and downstream
// certificates (margin delta, misassignment epsilon) need small distances to
// stay accurate.  Charges exactly 1 to the ledger.
template <class DA, class DB>
typename DA::Scalar squared_distance(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b,
                                     DistanceLedger& ledger) {
  if (a.size() != b.size()) throw std::invalid_argument("squared_distance: dimension mismatch");
  ledger.charge(1);
  return (a - b).squaredNorm();
}

// Nearest/second-nearest centroid per rep.  `nearest_d2` caches the squared
// nearest distance; `nearest_dist` / `second_dist` are unsquared.  With a
// single centroid second_dist is +inf.
template <class Scalar>
struct AssignmentCacheT {
  std::vector<Index> nearest;
  VecX<Scalar> nearest_d2;
  VecX<Scalar> nearest_dist;
  VecX<Scalar> second_dist;

  Index size() const { return static_cast<Index>(nearest.size()); }
  bool empty() const { return nearest.empty(); }
};
using AssignmentCache = AssignmentCacheT<double>;

// One assignment pass: |reps| * K distance evaluations, charged up front.
// Ties on distance go to the lower centroid index.
template <class Scalar>
AssignmentCacheT<Scalar> assign(const WeightedSetT<Scalar>& ws, const CentroidSetT<Scalar>& centers,
                                DistanceLedger& ledger) {
  ws.validate();
  const Index m = ws.size();
  const Index k = centers.rows();
  if (k < 1) throw std::invalid_argument("assign: no centroids");
  if (centers.cols() != ws.dim()) throw std::invalid_argument("assign: dimension mismatch");
  ledger.charge(static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(k));

  AssignmentCacheT<Scalar> cache;
  cache.nearest.assign(static_cast<std::size_t>(m), 0);
  cache.nearest_d2.resize(m);
  cache.nearest_dist.resize(m);
  cache.second_dist.resize(m);
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  for (Index i = 0; i < m; ++i) {
    Scalar best = inf, second = inf;
    Index best_k = 0;
    for (Index c = 0; c < k; ++c) {
      Scalar d2 = (centers.row(c) - ws.reps.row(i)).squaredNorm();
      if (d2 < best) {
        second = best;
        best = d2;
        best_k = c;
      } else if (d2 < second) {
        second = d2;
      }
    }
    cache.nearest[static_cast<std::size_t>(i)] = best_k;
    cache.nearest_d2(i) = best;
    cache.nearest_dist(i) = std::sqrt(best);
    cache.second_dist(i) = std::sqrt(second);
  }
  return cache;
}

// Weighted mean update.  A centroid with zero total mass is re-seeded at the
// unclaimed rep farthest from its nearest centroid (per the cache, i.e. the
// distances to the *previous* centers); ties break to the lower rep index.
// No distance evaluations.
template <class Scalar>
CentroidSetT<Scalar> update(const WeightedSetT<Scalar>& ws, const AssignmentCacheT<Scalar>& cache, Index k) {
  if (cache.size() != ws.size()) throw std::invalid_argument("update: cache size mismatch");
  const Index m = ws.size();
  CentroidSetT<Scalar> centers = CentroidSetT<Scalar>::Zero(k, ws.dim());
  VecX<Scalar> mass = VecX<Scalar>::Zero(k);
  for (Index i = 0; i < m; ++i) {
    Index c = cache.nearest[static_cast<std::size_t>(i)];
    if (c < 0 || c >= k) throw std::invalid_argument("update: cache refers to out-of-range centroid");
    centers.row(c) += ws.weights(i) * ws.reps.row(i);
    mass(c) += ws.weights(i);
  }
  std::vector<Index> order;  // reps by descending nearest_dist, index ascending
  bool order_built = false;
  std::size_t next_rep = 0;
  for (Index c = 0; c < k; ++c) {
    if (mass(c) > Scalar(0)) {
      centers.row(c) /= mass(c);
      continue;
    }
    if (!order_built) {
      order.resize(static_cast<std::size_t>(m));
      std::iota(order.begin(), order.end(), Index(0));
      std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return cache.nearest_dist(a) > cache.nearest_dist(b);
      });
      order_built = true;
    }
    if (next_rep >= order.size()) throw std::logic_error("update: no rep available for empty centroid");
    centers.row(c) = ws.reps.row(order[next_rep++]);
  }
  return centers;
}

// Weighted clustering error  E = sum_i w_i * min_c |x_i - c|^2.
// Charges |reps| * K evaluations.
template <class Scalar>
Scalar weighted_error(const WeightedSetT<Scalar>& ws, const CentroidSetT<Scalar>& centers,
                      DistanceLedger& ledger) {
  ws.validate();
  const Index m = ws.size();
  const Index k = centers.rows();
  if (k < 1) throw std::invalid_argument("weighted_error: no centroids");
  if (centers.cols() != ws.dim()) throw std::invalid_argument("weighted_error: dimension mismatch");
  ledger.charge(static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(k));
  Scalar total = 0;
  for (Index i = 0; i < m; ++i) {
    Scalar best = std::numeric_limits<Scalar>::infinity();
    for (Index c = 0; c < k; ++c) best = std::min(best, (centers.row(c) - ws.reps.row(i)).squaredNorm());
    total += ws.weights(i) * best;
  }
  return total;
}

// Same error from an existing assignment pass; free of charge.
template <class Scalar>
Scalar weighted_error_from_cache(const WeightedSetT<Scalar>& ws, const AssignmentCacheT<Scalar>& cache) {
  if (cache.size() != ws.size()) throw std::invalid_argument("weighted_error_from_cache: size mismatch");
  Scalar total = 0;
  for (Index i = 0; i < ws.size(); ++i) total += ws.weights(i) * cache.nearest_d2(i);
  return total;
}

enum class LloydStop { ErrorConverged, StableAssignment, MaxIterations, Budget };

inline const char* to_string(LloydStop s) {
  switch (s) {
    case LloydStop::ErrorConverged: return "eps_converged";
    case LloydStop::StableAssignment: return "stable_assignment";
    case LloydStop::MaxIterations: return "iteration_cap";
    case LloydStop::Budget: return "distance_budget";
  }
  return "?";
}

struct LloydOptions {
  // eps < 0 selects the default threshold 1e-4 * E0 / total_weight, where E0
  // is the error of the starting centroids.
  double eps = -1;
  int max_iters = 100;
  bool stop_on_error_delta = true;       // stop when |E - E'| <= eps
  bool stop_on_stable_assignment = false;  // stop when the assignment repeats
};

template <class Scalar>
struct LloydResultT {
  CentroidSetT<Scalar> centers;
  AssignmentCacheT<Scalar> cache;  // matches `centers`; empty if budget hit before the first pass
  Scalar error = std::numeric_limits<Scalar>::quiet_NaN();
  int iterations = 0;
  LloydStop stop = LloydStop::Budget;
};
using LloydResult = LloydResultT<double>;

// Observer called once per completed iteration with
// (iteration #, previous centers, new centers, previous error, new error).
template <class Scalar>
using LloydObserverT = std::function<void(int, const CentroidSetT<Scalar>&, const CentroidSetT<Scalar>&,
                                          Scalar, Scalar)>;

// Weighted Lloyd iterations from starting centroids C0.  Each iteration is
// one mean update followed by one assignment pass; the initial assignment
// for C0 counts as iteration 0 and is skipped when `warm` (a cache already
// matching C0 on this weighted set) is supplied.  Error never increases
// between iterations.  All passes are budget-gated: on exhaustion the last
// consistent (centers, cache) pair is returned with stop = Budget.
template <class Scalar>
LloydResultT<Scalar> weighted_lloyd(const WeightedSetT<Scalar>& ws, CentroidSetT<Scalar> c0,
                                    const LloydOptions& opts, DistanceLedger& ledger,
                                    const LloydObserverT<Scalar>* observer = nullptr,
                                    const AssignmentCacheT<Scalar>* warm = nullptr) {
  ws.validate();
  const Index k = c0.rows();
  const std::uint64_t pass = static_cast<std::uint64_t>(ws.size()) * static_cast<std::uint64_t>(k);

  LloydResultT<Scalar> res;
  res.centers = std::move(c0);
  if (warm != nullptr && warm->size() == ws.size()) {
    res.cache = *warm;
  } else {
    if (!ledger.can_charge(pass)) return res;  // stop = Budget, cache empty
    res.cache = assign(ws, res.centers, ledger);
  }
  res.error = weighted_error_from_cache(ws, res.cache);

  const Scalar w_total = ws.total_weight();
  const Scalar eps = opts.eps >= 0 ? static_cast<Scalar>(opts.eps)
                                   : Scalar(1e-4) * res.error / (w_total > 0 ? w_total : Scalar(1));

  while (true) {
    if (res.iterations >= opts.max_iters) {
      res.stop = LloydStop::MaxIterations;
      return res;
    }
    if (!ledger.can_charge(pass)) {
      res.stop = LloydStop::Budget;
      return res;
    }
    CentroidSetT<Scalar> next = update(ws, res.cache, k);
    AssignmentCacheT<Scalar> next_cache = assign(ws, next, ledger);
    Scalar next_error = weighted_error_from_cache(ws, next_cache);
    ++res.iterations;
    if (observer != nullptr && *observer) (*observer)(res.iterations, res.centers, next, res.error, next_error);

    bool stable = next_cache.nearest == res.cache.nearest;
    Scalar delta = std::abs(res.error - next_error);
    res.centers = std::move(next);
    res.cache = std::move(next_cache);
    res.error = next_error;

    if (opts.stop_on_stable_assignment && stable) {
      // The assignment repeating means the next update reproduces these
      // centers exactly: a true fixed point.
      res.stop = LloydStop::StableAssignment;
      return res;
    }
    if (opts.stop_on_error_delta && delta <= eps) {
      res.stop = LloydStop::ErrorConverged;
      return res;
    }
  }
}

}  // namespace bwkm
