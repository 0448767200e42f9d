#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bwkm/geometry.hpp"
#include "bwkm/lloyd.hpp"
#include "bwkm/metrics.hpp"
#include "bwkm/rng.hpp"
#include "bwkm/seeding.hpp"
#include "bwkm/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

using namespace bwkm;

namespace {

Dataset make_points(std::initializer_list<std::initializer_list<double>> rows) {
  Dataset d;
  auto it = rows.begin();
  d.points.resize(static_cast<Index>(rows.size()), static_cast<Index>(it->size()));
  Index i = 0;
  for (const auto& row : rows) {
    Index j = 0;
    for (double v : row) d.points(i, j++) = v;
    ++i;
  }
  return d;
}

Dataset line_points(std::initializer_list<double> xs) {
  Dataset d;
  d.points.resize(static_cast<Index>(xs.size()), 1);
  Index i = 0;
  for (double v : xs) d.points(i++, 0) = v;
  return d;
}

CentroidSet centers1d(std::initializer_list<double> xs) {
  CentroidSet c(static_cast<Index>(xs.size()), 1);
  Index i = 0;
  for (double v : xs) c(i++, 0) = v;
  return c;
}

Dataset random_points(RngStream& rng, Index n, Index d, double scale = 10.0) {
  Dataset data;
  data.points.resize(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) data.points(i, j) = rng.uniform01() * scale;
  return data;
}

}  // namespace

TEST_CASE("ledger charges and caps") {
  DistanceLedger ledger;
  CHECK(ledger.count == 0);
  ledger.charge(5);
  CHECK(ledger.count == 5);
  ledger.cap = 7;
  CHECK(ledger.can_charge(2));
  CHECK_FALSE(ledger.can_charge(3));
  CHECK_THROWS_AS(ledger.charge(3), std::logic_error);
  ledger.charge(2);
  CHECK(ledger.count == 7);
  CHECK(ledger.remaining() == 0);
}

TEST_CASE("rng streams are deterministic and independent") {
  RngStream a(42, 3), b(42, 3), c(42, 4);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 64; ++i) {
    auto x = a.next_u64(), y = b.next_u64(), z = c.next_u64();
    all_equal &= (x == y);
    any_diff |= (x != z);
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("uniform draws stay in range") {
  RngStream rng(7);
  for (int i = 0; i < 2000; ++i) {
    double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.uniform_below(13) < 13);
  }
  CHECK_THROWS_AS(rng.uniform_below(0), std::invalid_argument);
}

TEST_CASE("sample_without_replacement yields distinct in-range indices") {
  RngStream rng(11);
  auto s = rng.sample_without_replacement(100, 30);
  std::set<Index> uniq(s.begin(), s.end());
  CHECK(uniq.size() == 30);
  CHECK(*uniq.begin() >= 0);
  CHECK(*uniq.rbegin() < 100);

  auto all = rng.sample_without_replacement(8, 8);
  std::sort(all.begin(), all.end());
  for (Index i = 0; i < 8; ++i) CHECK(all[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("pick_weighted never selects zero-weight entries") {
  RngStream rng(5);
  VecXd w(4);
  w << 0, 0, 1, 0;
  for (int i = 0; i < 200; ++i) CHECK(rng.pick_weighted(w) == 2);
  VecXd zero = VecXd::Zero(3);
  CHECK_THROWS_AS(rng.pick_weighted(zero), std::invalid_argument);
}

TEST_CASE("pick_weighted tracks the target distribution") {
  RngStream rng(9);
  VecXd w(3);
  w << 1, 3, 6;
  int counts[3] = {0, 0, 0};
  const int trials = 30000;
  for (int i = 0; i < trials; ++i) counts[rng.pick_weighted(w)]++;
  CHECK(std::abs(counts[0] / double(trials) - 0.1) < 0.01);
  CHECK(std::abs(counts[1] / double(trials) - 0.3) < 0.015);
  CHECK(std::abs(counts[2] / double(trials) - 0.6) < 0.015);
}

TEST_CASE("normal draws have roughly standard moments") {
  RngStream rng(21);
  double sum = 0, sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("blocks: bounds, containment, longest side, split") {
  RowVecXd lo(3), up(3);
  lo << 0, 0, 0;
  up << 2, 4, 4;
  auto b = Block::from_bounds(lo, up);
  CHECK(b.diagonal == doctest::Approx(6.0));
  CHECK(b.longest_side() == 1);  // tie between axes 1 and 2 goes to the lower axis
  RowVecXd p(3);
  p << 2, 4, 0;
  CHECK(b.contains(p));  // faces belong to the closed box
  p << 2.0001, 0, 0;
  CHECK_FALSE(b.contains(p));

  auto [left, right] = split_block(b);
  CHECK(left.upper(1) == doctest::Approx(2.0));
  CHECK(right.lower(1) == doctest::Approx(2.0));
  CHECK(left.lower == b.lower);
  CHECK(right.upper == b.upper);

  RowVecXd same(2);
  same << 1, 1;
  auto degenerate = Block::from_bounds(same, same);
  CHECK(degenerate.degenerate());
  CHECK_THROWS_AS(split_block(degenerate), std::invalid_argument);

  RowVecXd bad_lo(2), bad_up(2);
  bad_lo << 1, 0;
  bad_up << 0, 1;
  CHECK_THROWS_AS(Block::from_bounds(bad_lo, bad_up), std::invalid_argument);
}

TEST_CASE("split_block children tile the parent exactly") {
  RngStream rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    Index d = 1 + rng.index_below(5);
    RowVecXd lo(d), up(d);
    for (Index j = 0; j < d; ++j) {
      double a = rng.uniform01() * 10 - 5, b = rng.uniform01() * 10 - 5;
      lo(j) = std::min(a, b);
      up(j) = std::max(a, b) + 1e-6;
    }
    auto parent = Block::from_bounds(lo, up);
    auto [l, r] = split_block(parent);
    Index axis = parent.longest_side();
    for (Index j = 0; j < d; ++j) {
      if (j == axis) {
        CHECK(l.lower(j) == parent.lower(j));
        CHECK(l.upper(j) == r.lower(j));  // children share exactly the cutting face
        CHECK(r.upper(j) == parent.upper(j));
        CHECK(l.upper(j) > l.lower(j));
        CHECK(r.upper(j) > r.lower(j));
      } else {
        CHECK(l.lower(j) == parent.lower(j));
        CHECK(l.upper(j) == parent.upper(j));
        CHECK(r.lower(j) == parent.lower(j));
        CHECK(r.upper(j) == parent.upper(j));
      }
    }
  }
}

TEST_CASE("bounding box covers the dataset tightly") {
  auto data = make_points({{0, 5}, {2, 1}, {-1, 3}});
  auto box = bounding_box(data);
  CHECK(box.lower(0) == -1);
  CHECK(box.lower(1) == 1);
  CHECK(box.upper(0) == 2);
  CHECK(box.upper(1) == 5);
  for (Index i = 0; i < data.n(); ++i) CHECK(box.contains(data.points.row(i)));

  Dataset empty;
  empty.points.resize(0, 2);
  CHECK_THROWS_AS(bounding_box(empty), std::invalid_argument);
}

TEST_CASE("make_cell computes mean representative and tight envelope") {
  auto data = make_points({{0, 0}, {4, 0}, {2, 6}});
  auto cell = make_cell(data, bounding_box(data), {0, 1, 2});
  CHECK(cell.representative(0) == doctest::Approx(2.0));
  CHECK(cell.representative(1) == doctest::Approx(2.0));
  CHECK(cell.fit_box.lower(0) == 0);
  CHECK(cell.fit_box.upper(1) == 6);
  CHECK(cell.weight() == 3);
  CHECK(cell.block.contains(cell.representative));
}

TEST_CASE("induce_cells partitions exactly, resolves face ties, rejects orphans") {
  auto data = make_points({{0.5, 0.5}, {1.0, 0.5}, {1.5, 0.5}});
  RowVecXd lo(2), up(2);
  lo << 0, 0;
  up << 1, 1;
  auto left = Block::from_bounds(lo, up);
  lo << 1, 0;
  up << 2, 1;
  auto right = Block::from_bounds(lo, up);

  auto state = induce_cells(data, {right, left});  // declaration order must not matter
  REQUIRE(state.size() == 2);
  CHECK(state.total_weight() == 3);
  // The point on the shared face x = 1 goes to the block with the smaller
  // lower corner, i.e. the left block.
  Index left_cell = state.cell_of[0];
  CHECK(state.cell_of[1] == left_cell);
  CHECK(state.cell_of[2] != left_cell);
  std::vector<bool> seen(3, false);
  for (const auto& c : state.cells)
    for (Index idx : c.members) {
      CHECK_FALSE(seen[static_cast<std::size_t>(idx)]);
      seen[static_cast<std::size_t>(idx)] = true;
    }
  CHECK(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));

  auto stray = make_points({{0.5, 0.5}, {5, 5}});
  CHECK_THROWS_AS(induce_cells(stray, {left, right}), std::invalid_argument);
}

TEST_CASE("split_cell halves the envelope and keeps the partition exact") {
  auto data = make_points({{0, 0}, {1, 0}, {4, 0}, {6, 0}, {3, 1}});
  auto state = root_partition(data);
  REQUIRE(state.size() == 1);
  split_cell(state, data, 0);
  REQUIRE(state.size() == 2);
  // Envelope x-range [0,6] splits at 3; the boundary point x=3 stays low.
  const auto& lo_cell = state.cells[0];
  const auto& hi_cell = state.cells[1];
  CHECK(lo_cell.members == std::vector<Index>{0, 1, 4});
  CHECK(hi_cell.members == std::vector<Index>{2, 3});
  CHECK(lo_cell.weight() + hi_cell.weight() == 5);
  for (Index i = 0; i < data.n(); ++i) {
    Index ci = state.cell_of[static_cast<std::size_t>(i)];
    const auto& members = state.cells[static_cast<std::size_t>(ci)].members;
    CHECK(std::find(members.begin(), members.end(), i) != members.end());
  }

  auto dup = make_points({{1, 1}, {1, 1}});
  auto dup_state = root_partition(dup);
  CHECK_THROWS_AS(split_cell(dup_state, dup, 0), std::invalid_argument);
}

TEST_CASE("assign: tie to the lower index, second distances, ledger cost") {
  auto ws = WeightedSet::unit(line_points({0, 1, 9, 10}).points);
  DistanceLedger ledger;
  auto cache = assign(ws, centers1d({0.5, 9.5}), ledger);
  CHECK(ledger.count == 8);
  CHECK(cache.nearest == std::vector<Index>{0, 0, 1, 1});
  CHECK(cache.nearest_dist(0) == doctest::Approx(0.5));
  CHECK(cache.second_dist(0) == doctest::Approx(9.5));

  // The middle point is equidistant from both centroids.
  auto tie = assign(WeightedSet::unit(line_points({5}).points), centers1d({0, 10}), ledger);
  CHECK(tie.nearest[0] == 0);
  CHECK(tie.second_dist(0) == doctest::Approx(5.0));

  auto single = assign(ws, centers1d({3.0}), ledger);
  CHECK(std::isinf(single.second_dist(0)));

  CentroidSet wrong_dim(1, 2);
  wrong_dim.setZero();
  CHECK_THROWS_AS(assign(ws, wrong_dim, ledger), std::invalid_argument);
}

TEST_CASE("update takes weighted means and re-seeds empty centroids") {
  WeightedSet ws;
  ws.reps = line_points({0, 1, 10}).points;
  ws.weights.resize(3);
  ws.weights << 1, 3, 1;
  DistanceLedger ledger;
  auto cache = assign(ws, centers1d({0, 9}), ledger);
  auto next = update(ws, cache, 2);
  CHECK(next(0, 0) == doctest::Approx(0.75));  // (0*1 + 1*3) / 4
  CHECK(next(1, 0) == doctest::Approx(10.0));

  // Both points prefer the first centroid; the second is re-seeded at the
  // rep farthest from its nearest centroid.
  auto far = assign(ws, centers1d({0, 100}), ledger);
  CHECK(far.nearest == std::vector<Index>{0, 0, 0});
  auto repaired = update(ws, far, 2);
  CHECK(repaired(1, 0) == 10.0);
}

TEST_CASE("weighted_error matches the worked example and the cache") {
  auto ws = WeightedSet::unit(line_points({0, 1, 9, 10}).points);
  DistanceLedger ledger;
  CHECK(weighted_error(ws, centers1d({0.5, 9.5}), ledger) == doctest::Approx(1.0));
  auto cache = assign(ws, centers1d({0.5, 9.5}), ledger);
  CHECK(weighted_error_from_cache(ws, cache) == doctest::Approx(1.0));
  CHECK(ledger.count == 16);
}

TEST_CASE("weighted_lloyd stops in one iteration at a fixed point") {
  auto ws = WeightedSet::unit(line_points({0, 1, 9, 10}).points);
  DistanceLedger ledger;
  auto res = weighted_lloyd(ws, centers1d({0.5, 9.5}), LloydOptions{}, ledger);
  CHECK(res.iterations == 1);
  CHECK(res.stop == LloydStop::ErrorConverged);
  CHECK(res.error == doctest::Approx(1.0));
}

TEST_CASE("weighted_lloyd converges from a rough start") {
  auto ws = WeightedSet::unit(line_points({0, 1, 9, 10}).points);
  DistanceLedger ledger;
  auto res = weighted_lloyd(ws, centers1d({0, 10}), LloydOptions{}, ledger);
  CHECK(res.centers(0, 0) == doctest::Approx(0.5));
  CHECK(res.centers(1, 0) == doctest::Approx(9.5));
  CHECK(res.iterations == 2);
}

TEST_CASE("weighted_lloyd error is monotone and the observer sees every step") {
  RngStream rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    auto data = random_points(rng, 60, 2);
    WeightedSet ws;
    ws.reps = data.points;
    ws.weights.resize(60);
    for (Index i = 0; i < 60; ++i) ws.weights(i) = 1.0 + rng.uniform01() * 4.0;
    DistanceLedger ledger;
    auto c0 = forgy(ws, 4, rng);
    int calls = 0;
    LloydObserverT<double> obs = [&](int, const CentroidSet&, const CentroidSet&, double e_prev,
                                     double e_next) {
      CHECK(e_next <= e_prev + 1e-9);
      ++calls;
    };
    LloydOptions opts;
    opts.eps = 0;
    auto res = weighted_lloyd(ws, c0, opts, ledger, &obs);
    CHECK(calls == res.iterations);
    CHECK(res.stop == LloydStop::ErrorConverged);
  }
}

TEST_CASE("weighted_lloyd with unit weights matches textbook Lloyd bitwise") {
  RngStream rng(123);
  auto data = random_points(rng, 50, 2);
  auto ws = WeightedSet::unit(data.points);
  auto c0 = forgy(ws, 3, rng);

  // Textbook Lloyd with the same tie rules, update order, and stop test.
  CentroidSet c = c0;
  double prev_err = 0;
  {
    // initial assignment error
    double e = 0;
    for (Index i = 0; i < data.n(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Index kk = 0; kk < 3; ++kk)
        best = std::min(best, (c.row(kk) - data.points.row(i)).squaredNorm());
      e += best;
    }
    prev_err = e;
  }
  const double eps = 1e-4 * prev_err / 50.0;
  int iters = 0;
  while (iters < 100) {
    std::vector<Index> label(50);
    for (Index i = 0; i < data.n(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      Index bk = 0;
      for (Index kk = 0; kk < 3; ++kk) {
        double d2 = (c.row(kk) - data.points.row(i)).squaredNorm();
        if (d2 < best) {
          best = d2;
          bk = kk;
        }
      }
      label[static_cast<std::size_t>(i)] = bk;
    }
    CentroidSet next = CentroidSet::Zero(3, 2);
    VecXd cnt = VecXd::Zero(3);
    for (Index i = 0; i < data.n(); ++i) {
      next.row(label[static_cast<std::size_t>(i)]) += data.points.row(i);
      cnt(label[static_cast<std::size_t>(i)]) += 1;
    }
    for (Index kk = 0; kk < 3; ++kk) next.row(kk) /= cnt(kk);
    double e = 0;
    for (Index i = 0; i < data.n(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Index kk = 0; kk < 3; ++kk)
        best = std::min(best, (next.row(kk) - data.points.row(i)).squaredNorm());
      e += best;
    }
    c = next;
    ++iters;
    if (std::abs(prev_err - e) <= eps) break;
    prev_err = e;
  }

  DistanceLedger ledger;
  auto res = weighted_lloyd(ws, c0, LloydOptions{}, ledger);
  CHECK(res.iterations == iters);
  CHECK((res.centers - c).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("weighted_lloyd respects the ledger budget") {
  auto ws = WeightedSet::unit(line_points({0, 1, 9, 10}).points);
  DistanceLedger ledger;
  ledger.cap = 11;  // one 8-evaluation pass fits, the next does not
  auto res = weighted_lloyd(ws, centers1d({0, 10}), LloydOptions{}, ledger);
  CHECK(res.stop == LloydStop::Budget);
  CHECK(res.iterations == 0);
  CHECK_FALSE(res.cache.empty());
  CHECK(ledger.count == 8);
}

TEST_CASE("forgy draws distinct reps and permutes the whole set at k == m") {
  WeightedSet ws;
  ws.reps = line_points({0, 1, 2, 3, 4}).points;
  ws.weights = VecXd::Ones(5);
  RngStream rng(3);
  auto c = forgy(ws, 5, rng);
  std::multiset<double> got, want{0, 1, 2, 3, 4};
  for (Index i = 0; i < 5; ++i) got.insert(c(i, 0));
  CHECK(got == want);
  CHECK_THROWS_AS(forgy(ws, 6, rng), std::invalid_argument);
}

TEST_CASE("kmeanspp: ledger cost, duplicate safety, seeding masses") {
  WeightedSet ws;
  ws.reps = line_points({0, 1, 4}).points;
  ws.weights.resize(3);
  ws.weights << 1, 1, 2;
  RngStream rng(17);
  DistanceLedger ledger;
  auto c = kmeanspp(ws, 3, rng, ledger);
  CHECK(ledger.count == 2 * 3);  // (k-1) passes over 3 reps
  CHECK(c.rows() == 3);

  CentroidSet first(1, 1);
  first(0, 0) = 0;
  DistanceLedger scratch;
  auto mass = detail::seeding_masses(ws, first, scratch);
  CHECK(mass(0) == 0.0);
  CHECK(mass(1) == doctest::Approx(1.0));   // w=1, d2=1
  CHECK(mass(2) == doctest::Approx(32.0));  // w=2, d2=16

  WeightedSet same;
  same.reps = line_points({2, 2, 2, 2}).points;
  same.weights = VecXd::Ones(4);
  DistanceLedger ledger2;
  auto cs = kmeanspp(same, 3, rng, ledger2);
  for (Index i = 0; i < 3; ++i) CHECK(cs(i, 0) == 2.0);
}

TEST_CASE("kmeanspp later centers follow the mass distribution") {
  WeightedSet ws;
  ws.reps = line_points({0, 1, 4}).points;
  ws.weights = VecXd::Ones(3);
  // With the first center pinned at rep 0 the second-center masses are
  // (0, 1, 16), i.e. probabilities (0, 1/17, 16/17).
  int hits1 = 0, hits4 = 0;
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    RngStream rng(1000 + static_cast<std::uint64_t>(t));
    DistanceLedger ledger;
    VecXd mass(3);
    CentroidSet head(1, 1);
    head(0, 0) = 0;
    mass = detail::seeding_masses(ws, head, ledger).cwiseProduct(VecXd::Ones(3));
    Index pick = rng.pick_weighted(mass);
    if (ws.reps(pick, 0) == 1.0) ++hits1;
    if (ws.reps(pick, 0) == 4.0) ++hits4;
  }
  CHECK(std::abs(hits1 / double(trials) - 1.0 / 17.0) < 0.01);
  CHECK(std::abs(hits4 / double(trials) - 16.0 / 17.0) < 0.01);
}

TEST_CASE("kmc2: ledger accounting and far-cluster preference") {
  Dataset blob;
  blob.points.resize(16, 1);
  for (Index i = 0; i < 8; ++i) blob.points(i, 0) = 0.0 + 0.01 * static_cast<double>(i);
  for (Index i = 8; i < 16; ++i) blob.points(i, 0) = 10.0 + 0.01 * static_cast<double>(i);

  {
    RngStream rng(2);
    DistanceLedger ledger;
    kmc2(blob, 3, 50, rng, ledger);
    CHECK(ledger.count == 50 * 1 + 50 * 2);
  }

  int far = 0;
  const int runs = 200;
  for (int t = 0; t < runs; ++t) {
    RngStream rng(5000 + static_cast<std::uint64_t>(t));
    DistanceLedger ledger;
    auto c = kmc2(blob, 2, 500, rng, ledger);
    bool lo = c(0, 0) < 5.0;
    bool second_far = lo ? (c(1, 0) > 5.0) : (c(1, 0) < 5.0);
    if (second_far) ++far;
  }
  CHECK(far >= 190);  // >= 95% of runs pick the opposite cluster

  Dataset same;
  same.points = MatrixXd::Constant(5, 1, 3.0);
  RngStream rng(8);
  DistanceLedger ledger;
  auto c = kmc2(same, 3, 20, rng, ledger);
  for (Index i = 0; i < 3; ++i) CHECK(c(i, 0) == 3.0);
}

TEST_CASE("exact_error examples and oracle independence from ledgers") {
  auto data = line_points({0, 1, 9, 10});
  CHECK(exact_error(data, centers1d({0.5, 9.5})) == doctest::Approx(1.0));
  CentroidSet self = data.points;
  CHECK(exact_error(data, self) == 0.0);
}

TEST_CASE("exact_error agrees with weighted_error on singleton cells") {
  RngStream rng(99);
  for (int t = 0; t < 20; ++t) {
    auto data = random_points(rng, 40, 3);
    auto ws = WeightedSet::unit(data.points);
    auto c = forgy(ws, 4, rng);
    DistanceLedger scratch;
    double we = weighted_error(ws, c, scratch);
    double ee = exact_error(data, c);
    CHECK(std::abs(we - ee) <= 1e-12 * std::max(1.0, std::abs(ee)));
  }
}

TEST_CASE("relative_error definition and guards") {
  auto rel = relative_error({{"A", 2.0}, {"B", 2.2}});
  CHECK(rel["A"] == 0.0);
  CHECK(rel["B"] == doctest::Approx(0.1));
  auto equal = relative_error({{"A", 3.0}, {"B", 3.0}});
  CHECK(equal["A"] == 0.0);
  CHECK(equal["B"] == 0.0);
  // Scaling all errors leaves the ratios unchanged.
  auto scaled = relative_error({{"A", 20.0}, {"B", 22.0}});
  CHECK(scaled["B"] == doctest::Approx(rel["B"]));
  CHECK_THROWS_AS(relative_error({{"A", 0.0}}), std::invalid_argument);
}

TEST_CASE("brute_force_optimum on worked examples") {
  auto data = line_points({0, 1, 10});
  auto res = brute_force_optimum(data, 2);
  CHECK(res.error == doctest::Approx(0.5));
  CHECK(res.labels[0] == res.labels[1]);
  CHECK(res.labels[0] != res.labels[2]);

  auto tiny = line_points({3, 7});
  CHECK(brute_force_optimum(tiny, 2).error == doctest::Approx(0.0));

  Dataset big;
  big.points = MatrixXd::Zero(40, 1);
  CHECK_THROWS_AS(brute_force_optimum(big, 4), std::invalid_argument);
}

TEST_CASE("synthesize_mixture shapes, balance, and separation") {
  RngStream rng(13);
  auto mix = synthesize_mixture<double>(1000, 2, 4, 8.0, rng);
  CHECK(mix.data.n() == 1000);
  CHECK(mix.data.dim() == 2);
  for (Index a = 0; a < 4; ++a)
    for (Index b = a + 1; b < 4; ++b) CHECK((mix.centers.row(a) - mix.centers.row(b)).norm() >= 8.0);
  // Balanced sizes and component means near their targets (CLT bound).
  std::vector<int> counts(4, 0);
  for (Index i = 0; i < 1000; ++i) counts[static_cast<std::size_t>(mix.component[i])]++;
  for (int c : counts) CHECK(c == 250);
  for (Index c = 0; c < 4; ++c) {
    RowVecXd mean = RowVecXd::Zero(2);
    for (Index i = 0; i < 1000; ++i)
      if (mix.component[static_cast<std::size_t>(i)] == c) mean += mix.data.points.row(i);
    mean /= 250.0;
    CHECK((mean - mix.centers.row(c)).norm() < 5.0 / std::sqrt(250.0));
  }

  auto blob = synthesize_mixture<double>(200, 2, 3, 0.0, rng);
  auto box = bounding_box(blob.data);
  CHECK(box.diagonal < 20.0);  // overlapping components form one blob
}
