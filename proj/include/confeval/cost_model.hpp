#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace confeval {

struct PricingEntry {
  std::string model_id;
  double input_per_million = 0.0;   // USD per 1e6 input tokens
  double output_per_million = 0.0;  // USD per 1e6 output tokens
  std::string as_of;
  std::string display_name;  // defaults to model_id
};

/// Plain-text pricing table, one entry per line:
///   <model_id> <input $/M> <output $/M> <as_of> [display name ...]
/// '#' starts a comment. Throws RecordError on malformed lines, negative
/// prices, missing dates or duplicate model ids.
std::vector<PricingEntry> parse_pricing(std::istream& in);
std::vector<PricingEntry> read_pricing_file(const std::filesystem::path& path);

const PricingEntry& find_pricing(std::span<const PricingEntry> table, const std::string& model_id);

inline constexpr std::int64_t kDefaultInputTokens = 350;
inline constexpr std::int64_t kDefaultOutputTokens = 30;

struct CostEstimate {
  std::string model_id;
  std::int64_t rows = 0;
  std::int64_t input_tokens_per_row = kDefaultInputTokens;
  std::int64_t output_tokens_per_row = kDefaultOutputTokens;
  double input_usd = 0.0;
  double output_usd = 0.0;
  double total_usd = 0.0;
};

/// Full precision; round only for display.
CostEstimate estimate_cost(std::int64_t rows, const PricingEntry& pricing,
                           std::int64_t input_tokens = kDefaultInputTokens,
                           std::int64_t output_tokens = kDefaultOutputTokens);

struct ScaleTotal {
  std::int64_t rows = 0;
  std::vector<CostEstimate> estimates;  // sorted by model id
  double total_usd = 0.0;
};

struct CostAggregate {
  std::vector<ScaleTotal> scales;  // ascending rows
  double grand_total_usd = 0.0;
};

/// Groups estimates by row count. Every scale must cover the same set of
/// models, otherwise InputError. Input order does not affect the result.
CostAggregate aggregate_costs(std::span<const CostEstimate> estimates);

/// Scales every dollar field by `factor`. Throws InputError if factor <= 0.
/// Factors outside the typical 5-20 band set *warning when given.
CostEstimate iteration_multiplier(const CostEstimate& single_pass, double factor,
                                  std::string* warning = nullptr);

double round_cents(double usd);

/// A printed cost to compare against; model_id "TOTAL" names a scale total.
struct ReferenceCost {
  std::string model_id;
  std::int64_t rows = 0;
  double printed_usd = 0.0;
};

/// Lines of `<model_id> <rows> <printed_usd>`, '#' comments.
std::vector<ReferenceCost> parse_reference_costs(std::istream& in);
std::vector<ReferenceCost> read_reference_costs_file(const std::filesystem::path& path);

struct CostComparison {
  ReferenceCost reference;
  double computed_usd = 0.0;
  double delta_usd = 0.0;  // computed - printed
  bool within_tolerance = false;
  bool discrepancy = false;  // computed does not round to the printed cents
};

/// Matches references against the aggregate. A reference with no computed
/// counterpart is an InputError.
std::vector<CostComparison> compare_to_reference(const CostAggregate& aggregate,
                                                 std::span<const ReferenceCost> references,
                                                 double tolerance_usd);

struct Reconciliation {
  double projected_usd = 0.0;
  double actual_usd = 0.0;
  double relative_error = 0.0;  // |projected - actual| / actual; 0 when both are 0
};

/// Projected cost from the per-row token assumptions versus the cost of the
/// token totals actually reported by the provider.
Reconciliation reconcile(const PricingEntry& pricing, std::int64_t rows,
                         std::int64_t actual_input_tokens, std::int64_t actual_output_tokens,
                         std::int64_t input_tokens = kDefaultInputTokens,
                         std::int64_t output_tokens = kDefaultOutputTokens);

}  // namespace confeval
