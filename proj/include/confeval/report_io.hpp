#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "confeval/cost_model.hpp"
#include "confeval/dataset.hpp"
#include "confeval/gap_analysis.hpp"
#include "confeval/metrics.hpp"

namespace confeval {

// Evaluation reports

/// Deterministic pretty-printed JSON (no timestamps).
std::string report_to_json(const EvaluationReport& r);

/// Accepts full reports written by report_to_json as well as hand-made
/// summaries. Each of the nine labels must appear once in "per_class" with
/// label, support, tp, f1 and auc (a number or "undefined"); confusion
/// counts, precision, recall and headline metrics are optional. Tiers are
/// recomputed when every class carries a full confusion.
EvaluationReport report_from_json(std::string_view text, const TierBounds& bounds = {});
EvaluationReport read_report_file(const std::filesystem::path& path, const TierBounds& bounds = {});

std::string per_class_markdown(const EvaluationReport& r);
std::string per_class_csv(const EvaluationReport& r);
std::string tier_markdown(const EvaluationReport& r);
std::string error_patterns_markdown(const EvaluationReport& r, std::size_t top = 10);

/// Headline metrics followed by the per-class, tier and error tables.
std::string report_markdown(const EvaluationReport& r);

// Two-model comparison

struct Comparison {
  std::string name_a;
  std::string name_b;
  GapSummary gaps;
  std::optional<TrendFit> trend;  // absent when the counts do not vary
  std::vector<TruePositiveDelta> tp;
};

/// Class counts are the gold supports, which must agree between reports.
Comparison compare_reports(const EvaluationReport& a, const EvaluationReport& b,
                           const GapThresholds& thresholds = {});

std::string auc_table_markdown(const Comparison& c);       // per-class AUC pair, diff, average
std::string gap_category_markdown(const Comparison& c);    // categories ordered by diff
std::string tp_delta_markdown(const Comparison& c);        // true-positive counts
std::string figure_series_csv(const Comparison& c);        // prevalence vs AUC and gap
std::string comparison_json(const Comparison& c);
std::string comparison_markdown(const Comparison& c);

// Label distribution

std::string label_distribution_markdown(std::span<const LabelCountRow> rows);
std::string label_distribution_csv(std::span<const LabelCountRow> rows);

// Cost projections

std::string cost_markdown(const CostAggregate& agg, std::span<const PricingEntry> pricing);
std::string cost_csv(const CostAggregate& agg);
std::string cost_comparison_markdown(std::span<const CostComparison> rows);

}  // namespace confeval
