#pragma once

#include "bwkm/rng.hpp"
#include "bwkm/types.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace bwkm {

namespace detail {
// Neumaier compensated accumulator: the running error of the plain sum is
// carried separately so the result is faithful to ~1 ulp even for long sums.
struct CompensatedSum {
  double sum = 0;
  double comp = 0;
  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};
}  // namespace detail

// Full-data clustering error sum_x min_c |x - c|^2, compensated summation.
// This is the measurement channel: it never touches a distance ledger.
template <class Scalar>
Scalar exact_error(const DatasetT<Scalar>& data, const CentroidSetT<Scalar>& centers) {
  data.validate();
  if (centers.rows() < 1) throw std::invalid_argument("exact_error: no centroids");
  if (centers.cols() != data.dim()) throw std::invalid_argument("exact_error: dimension mismatch");
  detail::CompensatedSum acc;
  for (Index i = 0; i < data.n(); ++i) {
    Scalar best = std::numeric_limits<Scalar>::infinity();
    for (Index c = 0; c < centers.rows(); ++c)
      best = std::min(best, (centers.row(c) - data.points.row(i)).squaredNorm());
    acc.add(static_cast<double>(best));
  }
  return static_cast<Scalar>(acc.value());
}

// Relative error of each method against the best: (E - E_min) / E_min.
// Every error must be finite and positive.
inline std::map<std::string, double> relative_error(const std::map<std::string, double>& errors) {
  if (errors.empty()) throw std::invalid_argument("relative_error: no entries");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [name, e] : errors) {
    if (!std::isfinite(e) || e <= 0)
      throw std::invalid_argument("relative_error: non-positive or non-finite error for " + name);
    best = std::min(best, e);
  }
  std::map<std::string, double> out;
  for (const auto& [name, e] : errors) out[name] = (e - best) / best;
  return out;
}

template <class Scalar>
struct BruteForceResultT {
  std::vector<Index> labels;
  Scalar error = std::numeric_limits<Scalar>::infinity();
};

// Globally optimal k-means error by enumerating all K^n label assignments
// (empty groups permitted; their centroids contribute nothing).  Guarded to
// tiny instances: K^n must not exceed 10^7.
template <class Scalar>
BruteForceResultT<Scalar> brute_force_optimum(const DatasetT<Scalar>& data, Index k) {
  data.validate();
  if (k < 1) throw std::invalid_argument("brute_force_optimum: k < 1");
  const Index n = data.n();
  double combos = std::pow(static_cast<double>(k), static_cast<double>(n));
  if (combos > 1e7) throw std::invalid_argument("brute_force_optimum: K^n exceeds 1e7");

  BruteForceResultT<Scalar> best;
  std::vector<Index> labels(static_cast<std::size_t>(n), 0);
  MatrixX<Scalar> sums(k, data.dim());
  VecX<Scalar> cnt(k);
  while (true) {
    sums.setZero();
    cnt.setZero();
    for (Index i = 0; i < n; ++i) {
      sums.row(labels[static_cast<std::size_t>(i)]) += data.points.row(i);
      cnt(labels[static_cast<std::size_t>(i)]) += Scalar(1);
    }
    Scalar err = 0;
    for (Index i = 0; i < n; ++i) {
      Index c = labels[static_cast<std::size_t>(i)];
      err += (data.points.row(i) - sums.row(c) / cnt(c)).squaredNorm();
    }
    if (err < best.error) {
      best.error = err;
      best.labels = labels;
    }
    Index pos = 0;
    while (pos < n) {
      if (++labels[static_cast<std::size_t>(pos)] < k) break;
      labels[static_cast<std::size_t>(pos)] = 0;
      ++pos;
    }
    if (pos == n) break;
  }
  return best;
}

template <class Scalar>
struct MixtureT {
  DatasetT<Scalar> data;
  MatrixX<Scalar> centers;       // true component centers
  std::vector<Index> component;  // generating component per point
};
using Mixture = MixtureT<double>;

// Isotropic Gaussian mixture with unit-variance components of near-equal
// size.  Component centers are drawn uniformly in a cube and re-drawn until
// pairwise separation holds; the cube grows when the separation cannot be
// packed.  separation == 0 collapses to a single overlapping blob.
template <class Scalar>
MixtureT<Scalar> synthesize_mixture(Index n, Index d, Index k, Scalar separation, RngStream& rng) {
  if (n < 1 || d < 1 || k < 1 || k > n) throw std::invalid_argument("synthesize_mixture: bad shape");
  if (!(separation >= 0)) throw std::invalid_argument("synthesize_mixture: negative separation");

  MixtureT<Scalar> mix;
  mix.centers.resize(k, d);
  double side = static_cast<double>(separation) *
                std::max(2.0, std::pow(static_cast<double>(k), 1.0 / static_cast<double>(d)));
  while (true) {
    bool ok = true;
    for (Index c = 0; c < k && ok; ++c) {
      int attempts = 0;
      while (true) {
        for (Index j = 0; j < d; ++j) mix.centers(c, j) = static_cast<Scalar>(rng.uniform01() * side);
        bool clear = true;
        for (Index p = 0; p < c; ++p)
          if ((mix.centers.row(c) - mix.centers.row(p)).norm() < separation) {
            clear = false;
            break;
          }
        if (clear) break;
        if (++attempts >= 200) {
          ok = false;
          break;
        }
      }
    }
    if (ok) break;
    side = side * 1.5 + 1.0;  // could not pack k centers; enlarge the cube
  }

  mix.data.points.resize(n, d);
  mix.component.resize(static_cast<std::size_t>(n));
  Index base = n / k, extra = n % k, row = 0;
  for (Index c = 0; c < k; ++c) {
    Index count = base + (c < extra ? 1 : 0);
    for (Index i = 0; i < count; ++i, ++row) {
      for (Index j = 0; j < d; ++j)
        mix.data.points(row, j) = mix.centers(c, j) + static_cast<Scalar>(rng.normal());
      mix.component[static_cast<std::size_t>(row)] = c;
    }
  }
  return mix;
}

}  // namespace bwkm
