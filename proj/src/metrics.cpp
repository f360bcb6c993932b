#include "confeval/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace confeval {

namespace {

void check_same_shape(const LabelMatrix& gold, const LabelMatrix& pred) {
  if (gold.rows() != pred.rows() || gold.cols() != pred.cols()) {
    throw std::invalid_argument("gold and prediction matrices differ in shape");
  }
}

double ratio_or_zero(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

}  // namespace

std::vector<BinaryConfusion> confusion_per_class(const LabelMatrix& gold, const LabelMatrix& pred) {
  check_same_shape(gold, pred);
  std::vector<BinaryConfusion> out(static_cast<std::size_t>(gold.cols()));
  for (Eigen::Index j = 0; j < gold.cols(); ++j) {
    auto& c = out[static_cast<std::size_t>(j)];
    c.tp = (gold.col(j) && pred.col(j)).count();
    c.fp = (!gold.col(j) && pred.col(j)).count();
    c.fn = (gold.col(j) && !pred.col(j)).count();
    c.tn = gold.rows() - c.tp - c.fp - c.fn;
  }
  return out;
}

PrecisionRecallF1 precision_recall_f1(const BinaryConfusion& c) {
  PrecisionRecallF1 r;
  r.no_predictions = c.tp + c.fp == 0;
  r.no_support = c.tp + c.fn == 0;
  r.precision = ratio_or_zero(c.tp, c.tp + c.fp);
  r.recall = ratio_or_zero(c.tp, c.tp + c.fn);
  r.f1 = harmonic(r.precision, r.recall);
  return r;
}

F1Suite f1_suite(std::span<const BinaryConfusion> confusions) {
  F1Suite s;
  BinaryConfusion pooled;
  double f1_sum = 0.0;
  for (const auto& c : confusions) {
    s.per_class.push_back(precision_recall_f1(c));
    f1_sum += s.per_class.back().f1;
    pooled += c;
  }
  s.micro = precision_recall_f1(pooled);
  s.macro_f1 = confusions.empty() ? 0.0 : f1_sum / static_cast<double>(confusions.size());
  return s;
}

double subset_accuracy(const LabelMatrix& gold, const LabelMatrix& pred) {
  check_same_shape(gold, pred);
  if (gold.rows() == 0) return 0.0;
  const auto exact = (gold == pred).rowwise().all().count();
  return static_cast<double>(exact) / static_cast<double>(gold.rows());
}

std::optional<double> auc_roc(std::span<const double> scores, std::span<const std::uint8_t> gold) {
  if (scores.size() != gold.size()) throw std::invalid_argument("score/label length mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Midranks: a run of equal scores occupying ranks [i+1, k] all get (i+1+k)/2.
  double pos_rank_sum = 0.0;
  std::int64_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t k = i;
    while (k < n && scores[order[k]] == scores[order[i]]) ++k;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(k)) / 2.0;
    for (std::size_t m = i; m < k; ++m) {
      if (gold[order[m]]) {
        pos_rank_sum += midrank;
        ++n_pos;
      }
    }
    i = k;
  }
  const std::int64_t n_neg = static_cast<std::int64_t>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const double np = static_cast<double>(n_pos);
  const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const std::uint8_t> gold) {
  if (scores.size() != gold.size()) throw std::invalid_argument("score/label length mismatch");
  const std::size_t n = scores.size();
  const auto n_pos = static_cast<double>(std::count_if(gold.begin(), gold.end(),
                                                       [](std::uint8_t g) { return g != 0; }));
  const double n_neg = static_cast<double>(n) - n_pos;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<RocPoint> curve;
  curve.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  double tp = 0.0, fp = 0.0;
  for (std::size_t i = 0; i < n;) {
    const double t = scores[order[i]];
    while (i < n && scores[order[i]] == t) {
      (gold[order[i]] ? tp : fp) += 1.0;
      ++i;
    }
    curve.push_back({t, n_neg > 0 ? fp / n_neg : 0.0, n_pos > 0 ? tp / n_pos : 0.0});
  }
  return curve;
}

std::vector<ErrorPattern> error_patterns(const LabelMatrix& gold, const LabelMatrix& pred) {
  check_same_shape(gold, pred);
  const auto k = static_cast<std::size_t>(gold.cols());
  const LabelMatrix missed = gold && !pred;
  const LabelMatrix spurious = pred && !gold;
  std::vector<ErrorPattern> out;
  for (std::size_t from = 0; from < k; ++from) {
    for (std::size_t to = 0; to < k; ++to) {
      if (from == to) continue;
      const auto count = (missed.col(static_cast<Eigen::Index>(from)) &&
                          spurious.col(static_cast<Eigen::Index>(to)))
                             .count();
      if (count > 0) out.push_back({from, to, count});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.count > b.count; });
  return out;
}

std::string to_string(Tier t) {
  switch (t) {
    case Tier::kHigh: return "High";
    case Tier::kMedium: return "Medium";
    case Tier::kLow: return "Low";
  }
  return "?";
}

Tier assign_tier(double prevalence, const TierBounds& bounds) {
  if (prevalence < bounds.low_max) return Tier::kLow;
  if (prevalence >= bounds.high_min) return Tier::kHigh;
  return Tier::kMedium;
}

namespace {

void fill_rates(TierCalibration& t) {
  if (t.members.empty()) return;
  const auto& c = t.pooled;
  const double precision = ratio_or_zero(c.tp, c.tp + c.fp);
  const double recall = ratio_or_zero(c.tp, c.tp + c.fn);
  t.tpr = recall;
  t.fpr = ratio_or_zero(c.fp, c.fp + c.tn);
  t.precision = precision;
  t.f1 = harmonic(precision, recall);
}

}  // namespace

TierReport tier_calibration(std::span<const BinaryConfusion> confusions,
                            std::span<const double> prevalences, const TierBounds& bounds) {
  if (!(bounds.low_max > 0.0 && bounds.low_max < bounds.high_min && bounds.high_min < 1.0)) {
    throw std::invalid_argument("tier bounds must satisfy 0 < low_max < high_min < 1");
  }
  if (confusions.size() != prevalences.size()) {
    throw std::invalid_argument("one prevalence per class is required");
  }
  TierReport r;
  r.tiers[0].name = "High";
  r.tiers[1].name = "Medium";
  r.tiers[2].name = "Low";
  r.overall.name = "All Classes";
  for (std::size_t j = 0; j < confusions.size(); ++j) {
    auto& t = r.tiers[static_cast<std::size_t>(assign_tier(prevalences[j], bounds))];
    t.members.push_back(j);
    t.pooled += confusions[j];
    r.overall.members.push_back(j);
    r.overall.pooled += confusions[j];
  }
  for (auto& t : r.tiers) fill_rates(t);
  fill_rates(r.overall);
  return r;
}

EvaluationReport evaluate(std::string model_name, const LabelMatrix& gold,
                          const ProbabilityMatrix& scores, const LabelMatrix& pred,
                          const TierBounds& bounds) {
  check_same_shape(gold, pred);
  if (scores.rows() != gold.rows() || scores.cols() != gold.cols()) {
    throw std::invalid_argument("score matrix differs in shape from gold");
  }
  EvaluationReport r;
  r.model_name = std::move(model_name);
  r.n_events = gold.rows();
  const auto confusions = confusion_per_class(gold, pred);
  const auto suite = f1_suite(confusions);

  const auto instances = gold.count();
  for (std::size_t j = 0; j < confusions.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    PerClassMetrics m;
    m.label = j;
    m.confusion = confusions[j];
    m.precision = suite.per_class[j].precision;
    m.recall = suite.per_class[j].recall;
    m.f1 = suite.per_class[j].f1;
    m.no_predictions = suite.per_class[j].no_predictions;
    m.no_support = suite.per_class[j].no_support;
    m.support = confusions[j].support();
    m.auc = auc_roc(scores.col(col), gold.col(col));
    r.per_class.push_back(m);
    r.total_tp += confusions[j].tp;
    r.prevalence.push_back(instances == 0 ? 0.0
                                          : static_cast<double>(gold.col(col).count()) /
                                                static_cast<double>(instances));
  }
  r.subset_accuracy = subset_accuracy(gold, pred);
  r.micro_precision = suite.micro.precision;
  r.micro_recall = suite.micro.recall;
  r.micro_f1 = suite.micro.f1;
  r.macro_f1 = suite.macro_f1;
  r.tiers = tier_calibration(confusions, r.prevalence, bounds);
  r.errors = error_patterns(gold, pred);
  return r;
}

std::vector<TruePositiveDelta> true_positive_delta(const EvaluationReport& a,
                                                   const EvaluationReport& b) {
  if (a.per_class.size() != b.per_class.size()) {
    throw std::invalid_argument("reports cover different label universes");
  }
  auto make = [](std::size_t label, std::int64_t ta, std::int64_t tb) {
    TruePositiveDelta d;
    d.label = label;
    d.tp_a = ta;
    d.tp_b = tb;
    d.diff = ta - tb;
    if (ta != 0) d.pct_of_a = static_cast<double>(d.diff) / static_cast<double>(ta);
    if (tb != 0) d.pct_of_b = static_cast<double>(d.diff) / static_cast<double>(tb);
    return d;
  };
  std::vector<TruePositiveDelta> out;
  std::int64_t sum_a = 0, sum_b = 0;
  for (std::size_t j = 0; j < a.per_class.size(); ++j) {
    const auto ta = a.per_class[j].confusion.tp;
    const auto tb = b.per_class[j].confusion.tp;
    out.push_back(make(a.per_class[j].label, ta, tb));
    sum_a += ta;
    sum_b += tb;
  }
  out.push_back(make(0, sum_a, sum_b));
  out.back().total_row = true;
  return out;
}

}  // namespace confeval
