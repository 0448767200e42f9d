#pragma once

#include "bwkm/lloyd.hpp"
#include "bwkm/rng.hpp"
#include "bwkm/types.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

namespace bwkm {

// K distinct reps drawn uniformly without replacement; weights are ignored.
// With K == |reps| this is a permutation of the whole set.  Free of charge.
template <class Scalar>
CentroidSetT<Scalar> forgy(const WeightedSetT<Scalar>& ws, Index k, RngStream& rng) {
  ws.validate();
  if (k < 1 || k > ws.size()) throw std::invalid_argument("forgy: need 1 <= k <= |reps|");
  auto idx = rng.sample_without_replacement(ws.size(), k);
  CentroidSetT<Scalar> centers(k, ws.dim());
  for (Index i = 0; i < k; ++i) centers.row(i) = ws.reps.row(idx[static_cast<std::size_t>(i)]);
  return centers;
}

namespace detail {
// Seeding mass of each rep against the centers chosen so far:
// w_i * min_c |x_i - c|^2.  Charges |reps| * |centers| evaluations.
template <class Scalar>
VecX<Scalar> seeding_masses(const WeightedSetT<Scalar>& ws, const CentroidSetT<Scalar>& centers,
                            DistanceLedger& ledger) {
  ledger.charge(static_cast<std::uint64_t>(ws.size()) * static_cast<std::uint64_t>(centers.rows()));
  VecX<Scalar> mass(ws.size());
  for (Index i = 0; i < ws.size(); ++i) {
    Scalar best = std::numeric_limits<Scalar>::infinity();
    for (Index c = 0; c < centers.rows(); ++c)
      best = std::min(best, (centers.row(c) - ws.reps.row(i)).squaredNorm());
    mass(i) = ws.weights(i) * best;
  }
  return mass;
}
}  // namespace detail

// Weighted k-means++: the first center is drawn proportional to weight, each
// further center proportional to weight times squared distance to the
// nearest chosen center.  Costs (K-1) * |reps| evaluations (one pass after
// each center but the last).  Degenerate mass (all remaining reps at zero
// distance, or an exhausted budget) falls back to uniform draws over the
// not-yet-chosen reps, or over all reps once K exceeds |reps|.
template <class Scalar>
CentroidSetT<Scalar> kmeanspp(const WeightedSetT<Scalar>& ws, Index k, RngStream& rng,
                              DistanceLedger& ledger) {
  ws.validate();
  if (k < 1) throw std::invalid_argument("kmeanspp: k < 1");
  const Index m = ws.size();
  const std::uint64_t pass = static_cast<std::uint64_t>(m);

  CentroidSetT<Scalar> centers(k, ws.dim());
  std::vector<bool> chosen(static_cast<std::size_t>(m), false);

  auto uniform_fallback = [&]() {
    std::vector<Index> open;
    for (Index i = 0; i < m; ++i)
      if (!chosen[static_cast<std::size_t>(i)]) open.push_back(i);
    if (open.empty()) return rng.index_below(m);
    return open[static_cast<std::size_t>(rng.index_below(static_cast<Index>(open.size())))];
  };

  Index first = ws.total_weight() > Scalar(0) ? rng.pick_weighted(ws.weights) : uniform_fallback();
  centers.row(0) = ws.reps.row(first);
  chosen[static_cast<std::size_t>(first)] = true;

  VecX<Scalar> min_d2;
  bool have_d2 = false;
  for (Index j = 1; j < k; ++j) {
    if (ledger.can_charge(pass)) {
      // Refresh min-distances against the latest center only.
      ledger.charge(pass);
      if (!have_d2) {
        min_d2.resize(m);
        min_d2.setConstant(std::numeric_limits<Scalar>::infinity());
      }
      for (Index i = 0; i < m; ++i)
        min_d2(i) = std::min(min_d2(i), (centers.row(j - 1) - ws.reps.row(i)).squaredNorm());
      have_d2 = true;
    } else {
      have_d2 = false;  // stale masses are not a valid distribution
    }
    Index pick;
    if (have_d2) {
      Scalar total = 0;
      for (Index i = 0; i < m; ++i) total += ws.weights(i) * min_d2(i);
      if (total > Scalar(0)) {
        VecX<Scalar> mass = ws.weights.array() * min_d2.array();
        pick = rng.pick_weighted(mass);
      } else {
        pick = uniform_fallback();
      }
    } else {
      pick = uniform_fallback();
    }
    centers.row(j) = ws.reps.row(pick);
    if (pick >= 0 && pick < m) chosen[static_cast<std::size_t>(pick)] = true;
  }
  return centers;
}

// Markov-chain k-means++ approximation over unweighted points.  Each of the
// K-1 later centers runs one chain of `chain_length` candidates (the first
// candidate included); every candidate is scored against all centers chosen
// so far, so center j costs chain_length * (j-1) evaluations.  A candidate y
// replaces the chain state x with probability min(1, d(y)/d(x)); d(x) == 0
// accepts any strictly better candidate.  If the budget cannot cover a full
// chain the remaining centers fall back to uniform draws.
template <class Scalar>
CentroidSetT<Scalar> kmc2(const DatasetT<Scalar>& data, Index k, Index chain_length, RngStream& rng,
                          DistanceLedger& ledger) {
  data.validate();
  if (k < 1) throw std::invalid_argument("kmc2: k < 1");
  if (chain_length < 1) throw std::invalid_argument("kmc2: chain_length < 1");
  const Index n = data.n();

  CentroidSetT<Scalar> centers(k, data.dim());
  centers.row(0) = data.points.row(rng.index_below(n));

  auto min_d2 = [&](Index pt, Index c_count) {
    Scalar best = std::numeric_limits<Scalar>::infinity();
    for (Index c = 0; c < c_count; ++c)
      best = std::min(best, (centers.row(c) - data.points.row(pt)).squaredNorm());
    return best;
  };

  for (Index j = 1; j < k; ++j) {
    const std::uint64_t chain_cost =
        static_cast<std::uint64_t>(chain_length) * static_cast<std::uint64_t>(j);
    if (!ledger.can_charge(chain_cost)) {
      centers.row(j) = data.points.row(rng.index_below(n));
      continue;
    }
    ledger.charge(chain_cost);
    Index x = rng.index_below(n);
    Scalar dx = min_d2(x, j);
    for (Index t = 1; t < chain_length; ++t) {
      Index y = rng.index_below(n);
      Scalar dy = min_d2(y, j);
      double u = rng.uniform01();
      if (static_cast<Scalar>(u) * dx < dy) {  // accept with prob min(1, dy/dx)
        x = y;
        dx = dy;
      }
    }
    centers.row(j) = data.points.row(x);
  }
  return centers;
}

}  // namespace bwkm
