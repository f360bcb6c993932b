#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "confeval/types.hpp"

namespace confeval {

struct BinaryConfusion {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }
  std::int64_t support() const { return tp + fn; }
  BinaryConfusion& operator+=(const BinaryConfusion& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  friend bool operator==(const BinaryConfusion&, const BinaryConfusion&) = default;
};

/// Per-column confusion counts. Throws std::invalid_argument on shape mismatch.
std::vector<BinaryConfusion> confusion_per_class(const LabelMatrix& gold, const LabelMatrix& pred);

/// Precision/recall/F1 with the zero-division rule: a ratio whose
/// denominator is zero is reported as 0.0 and flagged.
struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool no_predictions = false;  // tp + fp == 0
  bool no_support = false;      // tp + fn == 0
};

PrecisionRecallF1 precision_recall_f1(const BinaryConfusion& c);

struct F1Suite {
  std::vector<PrecisionRecallF1> per_class;
  PrecisionRecallF1 micro;  // from counts pooled over all classes
  double macro_f1 = 0.0;    // unweighted mean of per-class F1
};

F1Suite f1_suite(std::span<const BinaryConfusion> confusions);

/// Fraction of rows whose predicted label vector equals the gold vector.
double subset_accuracy(const LabelMatrix& gold, const LabelMatrix& pred);

/// Mann-Whitney AUC with midranks for tied scores. Returns nullopt when the
/// class is degenerate (no positives or no negatives).
std::optional<double> auc_roc(std::span<const double> scores, std::span<const std::uint8_t> gold);

template <typename DerivedS, typename DerivedG>
std::optional<double> auc_roc(const Eigen::DenseBase<DerivedS>& scores,
                              const Eigen::DenseBase<DerivedG>& gold) {
  if (scores.size() != gold.size()) throw std::invalid_argument("score/label length mismatch");
  std::vector<double> s(static_cast<std::size_t>(scores.size()));
  std::vector<std::uint8_t> g(s.size());
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    s[static_cast<std::size_t>(i)] = static_cast<double>(scores.derived().coeff(i));
    g[static_cast<std::size_t>(i)] = gold.derived().coeff(i) ? 1 : 0;
  }
  return auc_roc(s, g);
}

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};

/// Empirical ROC vertices for "predict positive iff score >= threshold",
/// one per distinct score in descending order, preceded by (0, 0).
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const std::uint8_t> gold);

/// "from was missed while to was spuriously predicted" co-occurrence count.
struct ErrorPattern {
  std::size_t from_label = 0;
  std::size_t to_label = 0;
  std::int64_t count = 0;
  friend bool operator==(const ErrorPattern&, const ErrorPattern&) = default;
};

/// Non-zero patterns sorted by count descending, then (from, to) ascending.
std::vector<ErrorPattern> error_patterns(const LabelMatrix& gold, const LabelMatrix& pred);

enum class Tier { kHigh, kMedium, kLow };

std::string to_string(Tier t);

struct TierBounds {
  double low_max = 0.01;   // prevalence < low_max is Low
  double high_min = 0.20;  // prevalence >= high_min is High
};

Tier assign_tier(double prevalence, const TierBounds& bounds);

/// Micro-pooled rates over the member classes of a tier. Rates are nullopt
/// for an empty tier.
struct TierCalibration {
  std::string name;
  std::vector<std::size_t> members;
  BinaryConfusion pooled;
  std::optional<double> tpr;
  std::optional<double> fpr;
  std::optional<double> precision;
  std::optional<double> f1;
};

struct TierReport {
  std::array<TierCalibration, 3> tiers;  // High, Medium, Low
  TierCalibration overall;
};

TierReport tier_calibration(std::span<const BinaryConfusion> confusions,
                            std::span<const double> prevalences,
                            const TierBounds& bounds = {});

struct PerClassMetrics {
  std::size_t label = 0;
  BinaryConfusion confusion;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> auc;
  std::int64_t support = 0;
  bool no_predictions = false;
  bool no_support = false;
};

struct EvaluationReport {
  std::string model_name;
  std::int64_t n_events = 0;
  std::vector<PerClassMetrics> per_class;
  double subset_accuracy = 0.0;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  std::int64_t total_tp = 0;
  std::vector<double> prevalence;  // gold label-instance share per class
  TierReport tiers;
  std::vector<ErrorPattern> errors;
};

/// Runs the full metric suite. `scores` feed AUC; `pred` feeds everything else.
EvaluationReport evaluate(std::string model_name, const LabelMatrix& gold,
                          const ProbabilityMatrix& scores, const LabelMatrix& pred,
                          const TierBounds& bounds = {});

struct TruePositiveDelta {
  std::size_t label = 0;
  bool total_row = false;
  std::int64_t tp_a = 0;
  std::int64_t tp_b = 0;
  std::int64_t diff = 0;                 // tp_a - tp_b
  std::optional<double> pct_of_a;        // diff / tp_a
  std::optional<double> pct_of_b;        // diff / tp_b
};

/// Per-class rows followed by a total row.
std::vector<TruePositiveDelta> true_positive_delta(const EvaluationReport& a,
                                                   const EvaluationReport& b);

}  // namespace confeval
