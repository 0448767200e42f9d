#pragma once

#include "bwkm/types.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bwkm {

// Axis-aligned closed box [lower, upper].  diagonal caches |upper - lower|.
template <class Scalar>
struct BlockT {
  RowVecX<Scalar> lower;
  RowVecX<Scalar> upper;
  Scalar diagonal = 0;

  static BlockT from_bounds(RowVecX<Scalar> lo, RowVecX<Scalar> up) {
    if (lo.size() != up.size()) throw std::invalid_argument("block: bound dimension mismatch");
    if (lo.size() == 0) throw std::invalid_argument("block: zero-dimensional bounds");
    if ((lo.array() > up.array()).any()) throw std::invalid_argument("block: lower exceeds upper");
    BlockT b;
    b.lower = std::move(lo);
    b.upper = std::move(up);
    b.diagonal = (b.upper - b.lower).norm();
    return b;
  }

  Index dim() const { return lower.size(); }
  bool degenerate() const { return diagonal == Scalar(0); }

  template <class Derived>
  bool contains(const Eigen::MatrixBase<Derived>& p) const {
    return (p.array() >= lower.array()).all() && (p.array() <= upper.array()).all();
  }

  // First axis of maximal side length (lowest index on ties).
  Index longest_side() const {
    Index best = 0;
    Scalar best_len = upper(0) - lower(0);
    for (Index j = 1; j < dim(); ++j) {
      Scalar len = upper(j) - lower(j);
      if (len > best_len) {
        best_len = len;
        best = j;
      }
    }
    return best;
  }
};
using Block = BlockT<double>;

// Halve the block at the midpoint of its longest side.  The two children
// tile the parent exactly and share only the cutting face.
template <class Scalar>
std::pair<BlockT<Scalar>, BlockT<Scalar>> split_block(const BlockT<Scalar>& b) {
  if (b.degenerate()) throw std::invalid_argument("split_block: block has zero diagonal");
  Index axis = b.longest_side();
  Scalar mid = b.lower(axis) + (b.upper(axis) - b.lower(axis)) / Scalar(2);
  RowVecX<Scalar> lo_up = b.upper;
  lo_up(axis) = mid;
  RowVecX<Scalar> hi_lo = b.lower;
  hi_lo(axis) = mid;
  return {BlockT<Scalar>::from_bounds(b.lower, lo_up), BlockT<Scalar>::from_bounds(hi_lo, b.upper)};
}

// Smallest closed box containing every point of the dataset.
template <class Scalar>
BlockT<Scalar> bounding_box(const DatasetT<Scalar>& data) {
  data.validate();
  return BlockT<Scalar>::from_bounds(data.points.colwise().minCoeff(), data.points.colwise().maxCoeff());
}

// A cell of a partition: the geometric block, the member point indices
// (ascending), their mean as representative, and the tight envelope of the
// members (fit_box).  fit_box.diagonal is the cell's length scale l_B.
template <class Scalar>
struct CellT {
  BlockT<Scalar> block;
  std::vector<Index> members;
  RowVecX<Scalar> representative;
  BlockT<Scalar> fit_box;

  Scalar weight() const { return static_cast<Scalar>(members.size()); }
};
using Cell = CellT<double>;

template <class Scalar>
CellT<Scalar> make_cell(const DatasetT<Scalar>& data, BlockT<Scalar> block, std::vector<Index> members) {
  if (members.empty()) throw std::invalid_argument("make_cell: empty member list");
  std::sort(members.begin(), members.end());
  CellT<Scalar> c;
  RowVecX<Scalar> sum = RowVecX<Scalar>::Zero(data.dim());
  RowVecX<Scalar> lo = data.points.row(members.front());
  RowVecX<Scalar> up = lo;
  for (Index idx : members) {
    auto p = data.points.row(idx);
    if (!block.contains(p)) throw std::invalid_argument("make_cell: member outside block");
    sum += p;
    lo = lo.cwiseMin(p);
    up = up.cwiseMax(p);
  }
  c.block = std::move(block);
  c.members = std::move(members);
  c.representative = sum / static_cast<Scalar>(c.members.size());
  c.fit_box = BlockT<Scalar>::from_bounds(std::move(lo), std::move(up));
  return c;
}

// A partition of the full dataset into non-empty cells.  cell_of[i] is the
// cell index owning point i; members across cells cover [0, n) exactly.
template <class Scalar>
struct PartitionStateT {
  std::vector<CellT<Scalar>> cells;
  std::vector<Index> cell_of;
  int generation = 0;

  Index size() const { return static_cast<Index>(cells.size()); }

  Scalar total_weight() const {
    Scalar w = 0;
    for (const auto& c : cells) w += c.weight();
    return w;
  }

  WeightedSetT<Scalar> weighted_set() const {
    if (cells.empty()) throw std::logic_error("weighted_set: empty partition");
    WeightedSetT<Scalar> ws;
    ws.reps.resize(size(), cells.front().representative.size());
    ws.weights.resize(size());
    for (Index i = 0; i < size(); ++i) {
      ws.reps.row(i) = cells[static_cast<std::size_t>(i)].representative;
      ws.weights(i) = cells[static_cast<std::size_t>(i)].weight();
    }
    return ws;
  }
};
using PartitionState = PartitionStateT<double>;

namespace detail {
// True when a's lower corner precedes b's lexicographically.
template <class Scalar>
bool lower_corner_less(const BlockT<Scalar>& a, const BlockT<Scalar>& b) {
  for (Index j = 0; j < a.dim(); ++j) {
    if (a.lower(j) < b.lower(j)) return true;
    if (a.lower(j) > b.lower(j)) return false;
  }
  return false;
}
}  // namespace detail

// Build a partition from candidate blocks.  A point lying in several blocks
// (on a shared face) goes to the block with the lexicographically smallest
// lower corner; a point contained in no block is an error.  The blocks must
// jointly cover all n points; empty cells are dropped.
template <class Scalar>
PartitionStateT<Scalar> induce_cells(const DatasetT<Scalar>& data, const std::vector<BlockT<Scalar>>& blocks) {
  data.validate();
  if (blocks.empty()) throw std::invalid_argument("induce_cells: no blocks");
  const Index n = data.n();
  std::vector<std::vector<Index>> members(blocks.size());
  for (Index i = 0; i < n; ++i) {
    Index owner = -1;
    for (Index b = 0; b < static_cast<Index>(blocks.size()); ++b) {
      const auto& blk = blocks[static_cast<std::size_t>(b)];
      if (!blk.contains(data.points.row(i))) continue;
      if (owner < 0 || detail::lower_corner_less(blk, blocks[static_cast<std::size_t>(owner)])) owner = b;
    }
    if (owner < 0) throw std::invalid_argument("induce_cells: point not covered by any block");
    members[static_cast<std::size_t>(owner)].push_back(i);
  }
  PartitionStateT<Scalar> state;
  state.cell_of.assign(static_cast<std::size_t>(n), -1);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (members[b].empty()) continue;
    Index ci = static_cast<Index>(state.cells.size());
    for (Index idx : members[b]) state.cell_of[static_cast<std::size_t>(idx)] = ci;
    state.cells.push_back(make_cell(data, blocks[b], std::move(members[b])));
  }
  return state;
}

// Root partition: one cell holding everything.
template <class Scalar>
PartitionStateT<Scalar> root_partition(const DatasetT<Scalar>& data) {
  PartitionStateT<Scalar> state;
  std::vector<Index> all(static_cast<std::size_t>(data.n()));
  for (Index i = 0; i < data.n(); ++i) all[static_cast<std::size_t>(i)] = i;
  state.cells.push_back(make_cell(data, bounding_box(data), std::move(all)));
  state.cell_of.assign(static_cast<std::size_t>(data.n()), 0);
  return state;
}

// Split cell `ci` in place at the midpoint of its fit box's longest side.
// Members with coordinate <= mid stay in the lower child (consistent with
// the induce_cells face rule: the lower child has the smaller lower corner).
// The lower child replaces the cell at `ci`; the upper child is appended.
// Returns the number of cells added (always 1: a positive envelope side
// guarantees both children keep at least one member).
template <class Scalar>
Index split_cell(PartitionStateT<Scalar>& state, const DatasetT<Scalar>& data, Index ci) {
  auto& cell = state.cells.at(static_cast<std::size_t>(ci));
  if (cell.fit_box.degenerate())
    throw std::invalid_argument("split_cell: cell's point envelope has zero diagonal");
  auto [lo_blk, hi_blk] = split_block(cell.fit_box);
  Index axis = cell.fit_box.longest_side();
  Scalar mid = lo_blk.upper(axis);
  std::vector<Index> lo_members, hi_members;
  for (Index idx : cell.members) {
    if (data.points(idx, axis) <= mid)
      lo_members.push_back(idx);
    else
      hi_members.push_back(idx);
  }
  // The midpoint of the tight envelope strictly separates the extreme
  // members, so both sides are non-empty unless every coordinate on this
  // axis ties; the envelope's longest side is positive, hence lo holds the
  // minimum and hi the maximum.
  if (lo_members.empty() || hi_members.empty())
    throw std::logic_error("split_cell: midpoint split produced an empty child");
  Index new_ci = state.size();
  for (Index idx : hi_members) state.cell_of[static_cast<std::size_t>(idx)] = new_ci;
  CellT<Scalar> lo_cell = make_cell(data, std::move(lo_blk), std::move(lo_members));
  CellT<Scalar> hi_cell = make_cell(data, std::move(hi_blk), std::move(hi_members));
  state.cells[static_cast<std::size_t>(ci)] = std::move(lo_cell);
  state.cells.push_back(std::move(hi_cell));
  return 1;
}

}  // namespace bwkm
