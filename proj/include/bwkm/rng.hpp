#pragma once

#include "bwkm/types.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace bwkm {

namespace detail {
// splitmix64 finalizer; used only to spread (seed, stream) into engine state.
inline std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace detail

// Deterministic random stream.  All draw algorithms are spelled out here
// rather than taken from <random> distributions, because libstdc++/libc++
// distributions are not required to produce identical sequences; the raw
// mt19937_64 engine is.  Same (seed, stream) => same sequence of draws.
// normal() goes through libm (sqrt/log/cos), so its low bits can differ
// across C libraries; every integer and uniform draw is bit-portable.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t s = seed;
    std::uint64_t a = detail::splitmix64(s);
    s ^= 0x6a09e667f3bcc909ull * (stream + 1);
    std::uint64_t b = detail::splitmix64(s);
    eng_.seed(a ^ (b + 0x9e3779b97f4a7c15ull));
  }

  std::uint64_t next_u64() { return eng_(); }

  // Uniform on [0, 1): 53 random bits scaled by 2^-53.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform on {0, ..., n-1}, unbiased via rejection.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below: n == 0");
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t rem = (max % n + 1) % n;  // 2^64 mod n
    const std::uint64_t bound = max - rem;        // last accepted value
    std::uint64_t x;
    do {
      x = eng_();
    } while (x > bound);
    return x % n;
  }

  Index index_below(Index n) { return static_cast<Index>(uniform_below(static_cast<std::uint64_t>(n))); }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform01();  // (0, 1]: keeps log() finite
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  // One draw from the distribution proportional to w (w[i] >= 0, not all 0).
  // Linear scan over a running prefix sum; ties in the prefix resolve to the
  // lower index, and a trailing all-zero suffix can never be selected.
  template <class Derived>
  Index pick_weighted(const Eigen::DenseBase<Derived>& w) {
    const Index n = w.size();
    double total = 0;
    for (Index i = 0; i < n; ++i) {
      double wi = static_cast<double>(w(i));
      if (wi < 0) throw std::invalid_argument("pick_weighted: negative weight");
      total += wi;
    }
    if (!(total > 0)) throw std::invalid_argument("pick_weighted: total weight is zero");
    double u = uniform01() * total;
    double acc = 0;
    Index last_positive = 0;
    for (Index i = 0; i < n; ++i) {
      double wi = static_cast<double>(w(i));
      if (wi > 0) last_positive = i;
      acc += wi;
      if (u < acc) return i;
    }
    return last_positive;  // u == total up to rounding
  }

  // k distinct values from {0, ..., n-1} via partial Fisher-Yates.
  // Order of the result is the draw order (not sorted).
  std::vector<Index> sample_without_replacement(Index n, Index k) {
    if (k < 0 || k > n) throw std::invalid_argument("sample_without_replacement: k out of range");
    std::vector<Index> pool(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    std::vector<Index> out(static_cast<std::size_t>(k));
    for (Index i = 0; i < k; ++i) {
      Index j = i + index_below(n - i);
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
      out[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(i)];
    }
    return out;
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0;
  bool has_spare_ = false;
};

}  // namespace bwkm
