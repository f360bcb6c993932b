#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "confeval/batch_runner.hpp"
#include "confeval/chat_client.hpp"
#include "confeval/distribution.hpp"
#include "confeval/gap_analysis.hpp"
#include "confeval/metrics.hpp"

namespace CLI {
class App;
}

namespace confeval::cli {

/// Everything a run depends on besides its input files. Defaults follow the
/// evaluation protocol: 2017 cutoff, 2,000-event sample, tau 0.5, 10 workers.
struct RunConfig {
  std::string events;
  std::string predictions;
  std::string report_a;
  std::string report_b;
  std::string pricing;
  std::string reference_costs;
  std::string checkpoint;
  std::string output_dir = "reports";
  std::string model_name;

  int cutoff_year = 2017;
  std::size_t sample_n = 2000;
  std::uint64_t seed = 20260201;

  double tau = 0.5;
  std::string binarize = "threshold";
  std::string failure_policy = "zero";
  double tier_low_max = 0.01;
  double tier_high_min = 0.20;
  double gap_minor_max = 0.05;
  double gap_major_min = 0.20;

  std::vector<std::string> endpoints;  // model_id,base_url[,KEY_ENV]
  std::size_t workers = 10;
  int max_retries = 3;
  int backoff_base_ms = 500;
  double rate_limit = 0.0;
  int timeout_ms = 60000;
  bool strict_parse = false;
  double renorm_tolerance = 0.05;
  std::size_t task_limit = 0;  // 0 = no limit

  std::vector<std::int64_t> rows = {2000, 37709, 170623};
  std::int64_t input_tokens = 350;
  std::int64_t output_tokens = 30;
  double iterations = 1.0;
  double cost_tolerance = 0.02;

  double prevalence = -1.0;  // unset
  std::string tolerance;
  std::string resources;
};

/// Registers every RunConfig field as a root-level flag (visible to all
/// subcommands) plus --config for flat key = value files.
void add_config_options(CLI::App& app, RunConfig& cfg);

/// key = value lines readable by --config; reproduces `cfg` exactly.
std::string serialize_config(const RunConfig& cfg);

TierBounds tier_bounds(const RunConfig& cfg);
GapThresholds gap_thresholds(const RunConfig& cfg);
BinarizeMode binarize_mode(const RunConfig& cfg);
ParseOptions parse_options(const RunConfig& cfg);

/// "model_id,base_url[,KEY_ENV]" plus the retry/rate settings in `cfg`.
/// A trailing empty KEY_ENV means no Authorization header.
EndpointConfig parse_endpoint(const std::string& arg, const RunConfig& cfg);

}  // namespace confeval::cli
