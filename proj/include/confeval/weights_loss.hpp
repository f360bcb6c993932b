#pragma once

// Class weighting, sigmoid, binary cross-entropy with logits (plain and
// positive-class weighted) and threshold inference. Header-only and
// templated on the scalar type; inputs are accepted as Eigen expressions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "confeval/dataset.hpp"
#include "confeval/types.hpp"

namespace confeval {

inline constexpr double kDefaultThreshold = 0.5;

/// Inverse-frequency positive weights w_j = N / (n_j + 1).
template <typename Scalar = double>
struct ClassWeights {
  Vector<Scalar> w;
  std::int64_t n_total = 0;
  std::vector<std::int64_t> counts;
};

template <typename Scalar = double>
ClassWeights<Scalar> compute_class_weights(std::span<const std::int64_t> counts,
                                           std::int64_t n_total) {
  if (n_total <= 0) throw std::invalid_argument("class weights need a positive sample count");
  ClassWeights<Scalar> out;
  out.n_total = n_total;
  out.counts.assign(counts.begin(), counts.end());
  out.w.resize(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] < 0) throw std::invalid_argument("class counts must be non-negative");
    out.w(static_cast<Eigen::Index>(j)) =
        static_cast<Scalar>(n_total) / static_cast<Scalar>(counts[j] + 1);
  }
  return out;
}

/// Branches on sign so neither side evaluates exp of a large positive number.
template <typename Scalar>
Scalar sigmoid(Scalar z) {
  using std::exp;
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-z));
  const Scalar e = exp(z);
  return e / (Scalar(1) + e);
}

/// log(1 + e^{-z}) without overflow: max(-z, 0) + log1p(e^{-|z|}).
template <typename Scalar>
Scalar softplus_neg(Scalar z) {
  using std::abs;
  using std::exp;
  using std::log1p;
  return std::max(-z, Scalar(0)) + log1p(exp(-abs(z)));
}

/// Loss reduction. kPerEvent divides the double sum by the event count,
/// kPerTerm by events x labels.
enum class Normalization { kPerEvent, kPerTerm };

template <typename Scalar>
struct LossValue {
  Scalar value{};
  Eigen::Index n_events = 0;
};

namespace detail {

template <typename DerivedZ>
void check_shapes(const Eigen::MatrixBase<DerivedZ>& z, const LabelMatrix& y) {
  if (z.rows() != y.rows() || z.cols() != y.cols()) {
    throw std::invalid_argument("logit and label matrices differ in shape");
  }
}

template <typename DerivedZ, typename DerivedW>
void check_weights(const Eigen::MatrixBase<DerivedZ>& z, const Eigen::MatrixBase<DerivedW>& w) {
  if (w.size() != z.cols()) throw std::invalid_argument("weight vector width mismatch");
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    if (!(w(j) > 0)) throw std::invalid_argument("class weights must be positive");
  }
}

}  // namespace detail

/// -(1/N) sum_ij [w_j y log s(z) + (1-y) log(1 - s(z))], evaluated per term as
/// (1-y) z + (w_j y + 1 - y) softplus(-z).
template <typename DerivedZ, typename DerivedW>
LossValue<typename DerivedZ::Scalar> weighted_bce_loss(
    const Eigen::MatrixBase<DerivedZ>& z, const LabelMatrix& y,
    const Eigen::MatrixBase<DerivedW>& w,
    Normalization norm = Normalization::kPerEvent) {
  using Scalar = typename DerivedZ::Scalar;
  detail::check_shapes(z, y);
  detail::check_weights(z, w);
  Scalar sum(0);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      const Scalar zij = z(i, j);
      const Scalar pos = y(i, j) ? Scalar(w(j)) : Scalar(0);
      const Scalar neg = y(i, j) ? Scalar(0) : Scalar(1);
      sum += neg * zij + (pos + neg) * softplus_neg(zij);
    }
  }
  const Scalar denom = norm == Normalization::kPerEvent
                           ? Scalar(z.rows())
                           : Scalar(z.rows()) * Scalar(z.cols());
  return {z.rows() == 0 ? Scalar(0) : sum / denom, z.rows()};
}

template <typename DerivedZ>
LossValue<typename DerivedZ::Scalar> bce_loss(const Eigen::MatrixBase<DerivedZ>& z,
                                              const LabelMatrix& y,
                                              Normalization norm = Normalization::kPerEvent) {
  using Scalar = typename DerivedZ::Scalar;
  return weighted_bce_loss(z, y, Vector<Scalar>::Ones(z.cols()), norm);
}

/// Analytic d(loss)/dz: (w_j y + 1 - y) s(z) - w_j y, scaled by the normalizer.
template <typename DerivedZ, typename DerivedW>
Matrix<typename DerivedZ::Scalar> weighted_bce_gradient(
    const Eigen::MatrixBase<DerivedZ>& z, const LabelMatrix& y,
    const Eigen::MatrixBase<DerivedW>& w,
    Normalization norm = Normalization::kPerEvent) {
  using Scalar = typename DerivedZ::Scalar;
  detail::check_shapes(z, y);
  detail::check_weights(z, w);
  const Scalar denom = norm == Normalization::kPerEvent
                           ? Scalar(z.rows())
                           : Scalar(z.rows()) * Scalar(z.cols());
  Matrix<Scalar> g(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      const Scalar pos = y(i, j) ? Scalar(w(j)) : Scalar(0);
      const Scalar neg = y(i, j) ? Scalar(0) : Scalar(1);
      g(i, j) = ((pos + neg) * sigmoid(Scalar(z(i, j))) - pos) / denom;
    }
  }
  return g;
}

inline void check_threshold(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("threshold must lie in (0, 1)");
}

/// Label j is predicted iff p_j >= tau, independently per class.
template <typename Derived>
LabelMatrix threshold_predictions(const Eigen::MatrixBase<Derived>& probs,
                                  double tau = kDefaultThreshold) {
  check_threshold(tau);
  using Scalar = typename Derived::Scalar;
  return (probs.array() >= Scalar(tau)).eval();
}

inline LabelMatrix threshold_predictions(const PredictionSet& p, double tau = kDefaultThreshold) {
  return threshold_predictions(p.probs, tau);
}

}  // namespace confeval
