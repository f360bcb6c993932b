#include "confeval/gap_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "confeval/errors.hpp"
#include "confeval/labels.hpp"

namespace confeval {

std::string to_string(GapCategory c) {
  switch (c) {
    case GapCategory::kMinor: return "Minor";
    case GapCategory::kModerate: return "Moderate";
    case GapCategory::kMajor: return "Major";
  }
  return "?";
}

GapCategory categorize_gap(double diff, const GapThresholds& t) {
  if (!(t.minor_max > 0.0 && t.minor_max < t.major_min)) {
    throw std::invalid_argument("gap thresholds must satisfy 0 < minor_max < major_min");
  }
  const double mag = std::abs(diff);
  if (mag < t.minor_max) return GapCategory::kMinor;
  if (mag >= t.major_min) return GapCategory::kMajor;
  return GapCategory::kModerate;
}

GapSummary auc_gaps(std::span<const double> auc_a, std::span<const double> auc_b,
                    std::span<const std::int64_t> counts, const GapThresholds& thresholds) {
  if (auc_a.size() != auc_b.size() || auc_a.size() != counts.size() || auc_a.empty()) {
    throw std::invalid_argument("auc_gaps needs equally sized, non-empty inputs");
  }
  const auto total = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
  GapSummary s;
  for (std::size_t j = 0; j < auc_a.size(); ++j) {
    GapRecord r;
    r.label = j;
    r.auc_a = auc_a[j];
    r.auc_b = auc_b[j];
    r.diff = auc_a[j] - auc_b[j];
    r.count = counts[j];
    r.prevalence = total > 0 ? static_cast<double>(counts[j]) / static_cast<double>(total) : 0.0;
    r.category = categorize_gap(r.diff, thresholds);
    s.records.push_back(r);
    s.mean_auc_a += r.auc_a;
    s.mean_auc_b += r.auc_b;
    s.mean_diff += r.diff;
  }
  const auto n = static_cast<double>(auc_a.size());
  s.mean_auc_a /= n;
  s.mean_auc_b /= n;
  s.mean_diff /= n;
  std::stable_sort(s.records.begin(), s.records.end(),
                   [](const auto& x, const auto& y) { return x.auc_a > y.auc_a; });
  return s;
}

GapSummary auc_gaps(const EvaluationReport& a, const EvaluationReport& b,
                    std::span<const std::int64_t> counts, const GapThresholds& thresholds) {
  if (a.per_class.size() != b.per_class.size()) {
    throw InputError("reports cover different label universes");
  }
  std::vector<double> xa, xb;
  for (std::size_t j = 0; j < a.per_class.size(); ++j) {
    const auto& pa = a.per_class[j];
    const auto& pb = b.per_class[j];
    if (!pa.auc || !pb.auc) {
      throw InputError("AUC undefined for '" + label_name(pa.label) + "' in " +
                       (!pa.auc ? a.model_name : b.model_name));
    }
    xa.push_back(*pa.auc);
    xb.push_back(*pb.auc);
  }
  return auc_gaps(xa, xb, counts, thresholds);
}

double TrendFit::operator()(double count) const { return slope * std::log(count) + intercept; }

TrendFit fit_log_trend(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw std::invalid_argument("trend fit needs at least two points");
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& [count, diff] = points[static_cast<std::size_t>(i)];
    if (!(count > 0.0)) throw std::invalid_argument("trend fit needs positive counts");
    design(i, 0) = std::log(count);
    design(i, 1) = 1.0;
    y(i) = diff;
  }
  const Eigen::VectorXd x = design.col(0);
  if ((x.array() - x.mean()).abs().maxCoeff() == 0.0) {
    throw std::invalid_argument("trend fit needs variation in log(count)");
  }
  const Eigen::Vector2d beta = design.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd residual = y - design * beta;
  const double ss_res = residual.squaredNorm();
  const double ss_tot = (y.array() - y.mean()).square().sum();

  TrendFit fit;
  fit.slope = beta(0);
  fit.intercept = beta(1);
  fit.n_points = points.size();
  fit.r_squared = ss_tot == 0.0 ? 1.0 : std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
  return fit;
}

std::string to_string(ErrorTolerance t) {
  return t == ErrorTolerance::kAggregate ? "aggregate" : "event_level";
}

std::string to_string(Resources r) {
  return r == Resources::kCommodity ? "commodity" : "specialized";
}

std::string to_string(Approach a) {
  return a == Approach::kFineTune ? "FineTune" : "DomainSpecific";
}

std::string to_string(Consideration c) {
  switch (c) {
    case Consideration::kPrevalence: return "category prevalence";
    case Consideration::kErrorTolerance: return "error tolerance";
    case Consideration::kResources: return "available resources";
  }
  return "?";
}

ErrorTolerance parse_error_tolerance(const std::string& s) {
  if (s == "aggregate") return ErrorTolerance::kAggregate;
  if (s == "event_level" || s == "event-level") return ErrorTolerance::kEventLevel;
  throw InputError("unknown error tolerance '" + s + "' (expected aggregate|event_level)");
}

Resources parse_resources(const std::string& s) {
  if (s == "commodity") return Resources::kCommodity;
  if (s == "specialized") return Resources::kSpecialized;
  throw InputError("unknown resources '" + s + "' (expected commodity|specialized)");
}

Recommendation recommend_approach(double prevalence, ErrorTolerance tolerance,
                                  Resources resources) {
  if (!(prevalence >= 0.0 && prevalence <= 1.0)) {
    throw std::invalid_argument("prevalence must be a fraction in [0, 1]");
  }
  const bool rare = prevalence < kRarePrevalence;
  const bool event_level = tolerance == ErrorTolerance::kEventLevel;
  const bool specialized = resources == Resources::kSpecialized;

  Recommendation r;
  r.rationale.push_back(
      {Consideration::kPrevalence,
       rare ? "focus categories are rare (< 1% prevalence); fine-tuned models lose the most "
              "discrimination there"
            : "focus categories are common (>= 1% prevalence); fine-tuning alone provides "
              "sufficient signal"});
  r.rationale.push_back(
      {Consideration::kErrorTolerance,
       event_level ? "event-level coding must be accurate; automated output needs manual "
                     "verification"
                   : "aggregate analyses tolerate random classification noise"});
  r.rationale.push_back(
      {Consideration::kResources,
       specialized ? "a domain-specific model and the expertise to run it are available"
                   : "only commodity resources are available; domain pretraining is out of "
                     "reach"});

  if (rare && event_level && specialized) {
    r.choice = Approach::kDomainSpecific;
    r.manual_augment = true;
  } else {
    r.choice = Approach::kFineTune;
    r.manual_augment = event_level || (rare && !specialized);
  }
  return r;
}

}  // namespace confeval
