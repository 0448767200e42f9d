#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace bwkm {

using Index = Eigen::Index;

// Points are rows: an n x d matrix holds n points of dimension d.
template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class Scalar>
using RowVecX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
template <class Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = MatrixX<double>;
using RowVecXd = RowVecX<double>;
using VecXd = VecX<double>;

// Counts d-dimensional (squared-)distance evaluations.  One evaluation
// between two d-vectors costs exactly 1 regardless of d.  `cap` is a hard
// budget: callers test can_charge() before a gated pass and stop cleanly
// when it fails.  The count never resets within a run.
struct DistanceLedger {
  std::uint64_t count = 0;
  std::uint64_t cap = std::numeric_limits<std::uint64_t>::max();

  bool can_charge(std::uint64_t k) const { return k <= cap - count && count <= cap; }
  void charge(std::uint64_t k) {
    if (!can_charge(k)) throw std::logic_error("distance budget exceeded: caller must gate with can_charge");
    count += k;
  }
  std::uint64_t remaining() const { return cap - count; }
};

template <class Scalar>
struct DatasetT {
  MatrixX<Scalar> points;

  Index n() const { return points.rows(); }
  Index dim() const { return points.cols(); }

  void validate() const {
    if (points.rows() == 0) throw std::invalid_argument("dataset is empty");
    if (!points.allFinite()) throw std::invalid_argument("dataset contains non-finite values");
  }
};
using Dataset = DatasetT<double>;

// A weighted point set: row i of `reps` carries mass `weights[i]` >= 0.
template <class Scalar>
struct WeightedSetT {
  MatrixX<Scalar> reps;
  VecX<Scalar> weights;

  Index size() const { return reps.rows(); }
  Index dim() const { return reps.cols(); }
  Scalar total_weight() const { return weights.sum(); }

  void validate() const {
    if (reps.rows() != weights.size())
      throw std::invalid_argument("weighted set: row/weight count mismatch");
    if (reps.rows() == 0) throw std::invalid_argument("weighted set is empty");
    if ((weights.array() < Scalar(0)).any())
      throw std::invalid_argument("weighted set: negative weight");
  }

  static WeightedSetT unit(const MatrixX<Scalar>& pts) {
    return WeightedSetT{pts, VecX<Scalar>::Ones(pts.rows())};
  }
};
using WeightedSet = WeightedSetT<double>;

// K centroids as rows of a K x d matrix.
template <class Scalar>
using CentroidSetT = MatrixX<Scalar>;
using CentroidSet = CentroidSetT<double>;

}  // namespace bwkm
