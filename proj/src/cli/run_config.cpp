#include "confeval/cli/run_config.hpp"

#include <charconv>
#include <sstream>

#include <CLI11.hpp>

#include "confeval/errors.hpp"

namespace confeval::cli {

void add_config_options(CLI::App& app, RunConfig& c) {
  app.set_config("--config", "", "flat key = value file; flags given on the command line win");
  app.allow_config_extras(CLI::config_extras_mode::error);

  app.add_option("--events", c.events, "events JSONL")->group("Inputs");
  app.add_option("--predictions", c.predictions, "predictions JSONL")->group("Inputs");
  app.add_option("--report-a", c.report_a, "first evaluation report (JSON)")->group("Inputs");
  app.add_option("--report-b", c.report_b, "second evaluation report (JSON)")->group("Inputs");
  app.add_option("--pricing", c.pricing, "pricing table")->group("Inputs");
  app.add_option("--reference-costs", c.reference_costs, "printed costs to check against")
      ->group("Inputs");
  app.add_option("--checkpoint", c.checkpoint, "classification checkpoint JSONL")->group("Inputs");
  app.add_option("--output-dir", c.output_dir, "where reports are written")
      ->capture_default_str()
      ->group("Inputs");
  app.add_option("--model-name", c.model_name, "model name used in reports")->group("Inputs");

  app.add_option("--cutoff-year", c.cutoff_year, "train is year < cutoff")
      ->capture_default_str()
      ->group("Data");
  app.add_option("--sample-n", c.sample_n, "stratified sample size")
      ->capture_default_str()
      ->group("Data");
  app.add_option("--seed", c.seed, "sampling seed")->capture_default_str()->group("Data");

  app.add_option("--tau", c.tau, "decision threshold")->capture_default_str()->group("Evaluation");
  app.add_option("--binarize", c.binarize, "threshold | argmax | hybrid")
      ->capture_default_str()
      ->group("Evaluation");
  app.add_option("--failure-policy", c.failure_policy, "zero | exclude (failed LLM replies)")
      ->capture_default_str()
      ->group("Evaluation");
  app.add_option("--tier-low-max", c.tier_low_max, "prevalence below this is Low")
      ->capture_default_str()
      ->group("Evaluation");
  app.add_option("--tier-high-min", c.tier_high_min, "prevalence at or above this is High")
      ->capture_default_str()
      ->group("Evaluation");
  app.add_option("--gap-minor-max", c.gap_minor_max, "|AUC diff| below this is Minor")
      ->capture_default_str()
      ->group("Evaluation");
  app.add_option("--gap-major-min", c.gap_major_min, "|AUC diff| at or above this is Major")
      ->capture_default_str()
      ->group("Evaluation");

  app.add_option("--endpoint", c.endpoints, "model_id,base_url[,KEY_ENV] (repeatable)")
      ->group("Classification");
  app.add_option("--workers", c.workers, "concurrent requests")
      ->capture_default_str()
      ->group("Classification");
  app.add_option("--max-retries", c.max_retries)->capture_default_str()->group("Classification");
  app.add_option("--backoff-base-ms", c.backoff_base_ms)->capture_default_str()->group("Classification");
  app.add_option("--rate-limit", c.rate_limit, "requests/second per endpoint, 0 = unlimited")
      ->capture_default_str()
      ->group("Classification");
  app.add_option("--timeout-ms", c.timeout_ms)->capture_default_str()->group("Classification");
  app.add_option("--strict-parse", c.strict_parse, "reject replies with unknown keys")
      ->capture_default_str()
      ->group("Classification");
  app.add_option("--renorm-tolerance", c.renorm_tolerance)
      ->capture_default_str()
      ->group("Classification");
  app.add_option("--task-limit", c.task_limit, "stop after this many requests (0 = all)")
      ->capture_default_str()
      ->group("Classification");

  app.add_option("--rows", c.rows, "row scales, comma separated")
      ->delimiter(',')
      ->capture_default_str()
      ->group("Cost");
  app.add_option("--input-tokens", c.input_tokens)->capture_default_str()->group("Cost");
  app.add_option("--output-tokens", c.output_tokens)->capture_default_str()->group("Cost");
  app.add_option("--iterations", c.iterations, "multiplier for prompt iteration")
      ->capture_default_str()
      ->group("Cost");
  app.add_option("--cost-tolerance", c.cost_tolerance, "USD tolerance against reference costs")
      ->capture_default_str()
      ->group("Cost");

  app.add_option("--prevalence", c.prevalence, "prevalence of the class of interest")
      ->group("Recommendation");
  app.add_option("--tolerance", c.tolerance, "aggregate | event_level")->group("Recommendation");
  app.add_option("--resources", c.resources, "commodity | specialized")->group("Recommendation");
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out.push_back('\\');
    out.push_back(ch);
  }
  return out + "\"";
}

// Shortest text that reads back to the same double.
std::string num(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  auto str = [&](const char* key, const std::string& v) {
    if (!v.empty()) out << key << " = " << quote(v) << "\n";
  };
  str("events", c.events);
  str("predictions", c.predictions);
  str("report-a", c.report_a);
  str("report-b", c.report_b);
  str("pricing", c.pricing);
  str("reference-costs", c.reference_costs);
  str("checkpoint", c.checkpoint);
  str("output-dir", c.output_dir);
  str("model-name", c.model_name);
  out << "cutoff-year = " << c.cutoff_year << "\n"
      << "sample-n = " << c.sample_n << "\n"
      << "seed = " << c.seed << "\n"
      << "tau = " << num(c.tau) << "\n"
      << "binarize = " << quote(c.binarize) << "\n"
      << "failure-policy = " << quote(c.failure_policy) << "\n"
      << "tier-low-max = " << num(c.tier_low_max) << "\n"
      << "tier-high-min = " << num(c.tier_high_min) << "\n"
      << "gap-minor-max = " << num(c.gap_minor_max) << "\n"
      << "gap-major-min = " << num(c.gap_major_min) << "\n";
  if (!c.endpoints.empty()) {
    out << "endpoint = [";
    for (std::size_t i = 0; i < c.endpoints.size(); ++i) out << (i ? ", " : "") << quote(c.endpoints[i]);
    out << "]\n";
  }
  out << "workers = " << c.workers << "\n"
      << "max-retries = " << c.max_retries << "\n"
      << "backoff-base-ms = " << c.backoff_base_ms << "\n"
      << "rate-limit = " << num(c.rate_limit) << "\n"
      << "timeout-ms = " << c.timeout_ms << "\n"
      << "strict-parse = " << (c.strict_parse ? "true" : "false") << "\n"
      << "renorm-tolerance = " << num(c.renorm_tolerance) << "\n"
      << "task-limit = " << c.task_limit << "\n"
      << "rows = [";
  for (std::size_t i = 0; i < c.rows.size(); ++i) out << (i ? ", " : "") << c.rows[i];
  out << "]\n"
      << "input-tokens = " << c.input_tokens << "\n"
      << "output-tokens = " << c.output_tokens << "\n"
      << "iterations = " << num(c.iterations) << "\n"
      << "cost-tolerance = " << num(c.cost_tolerance) << "\n";
  if (c.prevalence >= 0) out << "prevalence = " << num(c.prevalence) << "\n";
  str("tolerance", c.tolerance);
  str("resources", c.resources);
  return out.str();
}

TierBounds tier_bounds(const RunConfig& c) {
  if (!(c.tier_low_max > 0 && c.tier_low_max < c.tier_high_min && c.tier_high_min <= 1)) {
    throw InputError("tier bounds must satisfy 0 < low-max < high-min <= 1");
  }
  return {c.tier_low_max, c.tier_high_min};
}

GapThresholds gap_thresholds(const RunConfig& c) {
  if (!(c.gap_minor_max > 0 && c.gap_minor_max < c.gap_major_min)) {
    throw InputError("gap thresholds must satisfy 0 < minor-max < major-min");
  }
  return {c.gap_minor_max, c.gap_major_min};
}

BinarizeMode binarize_mode(const RunConfig& c) { return parse_binarize_mode(c.binarize); }

ParseOptions parse_options(const RunConfig& c) {
  if (!(c.renorm_tolerance >= 0)) throw InputError("renorm tolerance must be non-negative");
  return {c.strict_parse, c.renorm_tolerance};
}

EndpointConfig parse_endpoint(const std::string& arg, const RunConfig& c) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto comma = arg.find(',', start);
    parts.push_back(arg.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (parts.size() < 2 || parts.size() > 3 || parts[0].empty() || parts[1].empty()) {
    throw InputError("endpoint '" + arg + "' is not model_id,base_url[,KEY_ENV]");
  }
  EndpointConfig e;
  e.model_id = parts[0];
  e.base_url = parts[1];
  if (parts.size() == 3) e.api_key_env = parts[2];
  if (c.max_retries < 0) throw InputError("max-retries must be >= 0");
  e.max_retries = c.max_retries;
  e.backoff_base_ms = c.backoff_base_ms;
  e.rate_limit = c.rate_limit;
  e.timeout_ms = c.timeout_ms;
  return e;
}

}  // namespace confeval::cli
