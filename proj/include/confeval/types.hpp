#pragma once

#include <Eigen/Dense>

namespace confeval {

// Event-major dense matrices: one row per event, one column per label.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using LogitMatrix = Matrix<Scalar>;

using ProbabilityMatrix = Matrix<double>;

// Binary indicator matrix (gold or predicted labels).
using LabelMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace confeval
