#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "confeval/metrics.hpp"

namespace confeval {

/// Ordered by severity so categories compare with < and >.
enum class GapCategory { kMinor = 0, kModerate = 1, kMajor = 2 };

std::string to_string(GapCategory c);

struct GapThresholds {
  double minor_max = 0.05;  // |diff| < minor_max is Minor
  double major_min = 0.20;  // |diff| >= major_min is Major
};

GapCategory categorize_gap(double diff, const GapThresholds& thresholds = {});

struct GapRecord {
  std::size_t label = 0;
  double auc_a = 0.0;
  double auc_b = 0.0;
  double diff = 0.0;  // auc_a - auc_b
  double prevalence = 0.0;
  std::int64_t count = 0;
  GapCategory category = GapCategory::kMinor;
};

struct GapSummary {
  std::vector<GapRecord> records;  // sorted by auc_a descending
  double mean_auc_a = 0.0;
  double mean_auc_b = 0.0;
  double mean_diff = 0.0;
};

/// Per-class AUC differences; prevalence is count / sum(counts).
GapSummary auc_gaps(std::span<const double> auc_a, std::span<const double> auc_b,
                    std::span<const std::int64_t> counts, const GapThresholds& thresholds = {});

/// Report overload. Throws InputError if either report has an undefined AUC.
GapSummary auc_gaps(const EvaluationReport& a, const EvaluationReport& b,
                    std::span<const std::int64_t> counts, const GapThresholds& thresholds = {});

/// Least-squares fit of y = slope * ln(count) + intercept.
struct TrendFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n_points = 0;

  double operator()(double count) const;
};

TrendFit fit_log_trend(std::span<const std::pair<double, double>> points);

enum class ErrorTolerance { kAggregate, kEventLevel };
enum class Resources { kCommodity, kSpecialized };
enum class Approach { kFineTune, kDomainSpecific };
enum class Consideration { kPrevalence, kErrorTolerance, kResources };

std::string to_string(ErrorTolerance t);
std::string to_string(Resources r);
std::string to_string(Approach a);
std::string to_string(Consideration c);

ErrorTolerance parse_error_tolerance(const std::string& s);
Resources parse_resources(const std::string& s);

struct RuleFiring {
  Consideration consideration;
  std::string reason;
};

struct Recommendation {
  Approach choice = Approach::kFineTune;
  bool manual_augment = false;
  std::vector<RuleFiring> rationale;
};

inline constexpr double kRarePrevalence = 0.01;

/// Rule-table formalization of the prevalence / error-tolerance / resources
/// decision framework. Total over the input product and deterministic.
Recommendation recommend_approach(double prevalence_of_interest, ErrorTolerance tolerance,
                                  Resources resources);

}  // namespace confeval
