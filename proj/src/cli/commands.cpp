#include "confeval/cli/commands.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "confeval/batch_runner.hpp"
#include "confeval/cli/run_config.hpp"
#include "confeval/cost_model.hpp"
#include "confeval/dataset.hpp"
#include "confeval/errors.hpp"
#include "confeval/gap_analysis.hpp"
#include "confeval/report_io.hpp"
#include "confeval/text_format.hpp"

namespace confeval::cli {

namespace fs = std::filesystem;

namespace {

void need(const std::string& value, const char* flag, const char* command) {
  if (value.empty()) {
    throw InputError(std::string(command) + " needs " + flag + " (see 'confeval " + command +
                     " --help')");
  }
}

void write_text(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << content) || !out.flush()) {
    throw RuntimeFailure("cannot write " + path.string());
  }
}

std::string slug(const std::string& name) {
  std::string s;
  for (char c : name) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    s.push_back(keep ? c : '_');
  }
  return s.empty() ? "model" : s;
}

void cmd_split(const RunConfig& c, std::ostream& out) {
  need(c.events, "--events", "split");
  const Dataset d = read_events_file(c.events);
  const auto [train, test] = temporal_split(d, c.cutoff_year);
  const fs::path dir = c.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  write_events_file(dir / "train.jsonl", train);
  write_events_file(dir / "test.jsonl", test);
  out << "train: " << train.size() << " events (year < " << c.cutoff_year << ") -> "
      << (dir / "train.jsonl").string() << "\n"
      << "test:  " << test.size() << " events -> " << (dir / "test.jsonl").string() << "\n";
  if (!test.empty()) {
    const auto rows = label_distribution(test);
    write_text(dir / "test_distribution.md", label_distribution_markdown(rows));
    write_text(dir / "test_distribution.csv", label_distribution_csv(rows));
    out << "\n" << label_distribution_markdown(rows);
  }
}

void cmd_sample(const RunConfig& c, std::ostream& out) {
  need(c.events, "--events", "sample");
  const Dataset d = read_events_file(c.events);
  const Dataset s = stratified_sample(d, c.sample_n, c.seed);
  const fs::path path = fs::path(c.output_dir) / "sample.jsonl";
  std::error_code ec;
  fs::create_directories(c.output_dir, ec);
  write_events_file(path, s);
  out << "sampled " << s.size() << " of " << d.size() << " events (seed " << c.seed << ") -> "
      << path.string() << "\n\n"
      << label_distribution_markdown(label_distribution(s));
}

std::set<std::string> prediction_ids(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open predictions file '" + path + "'");
  std::set<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_object() && j.contains("id") && j["id"].is_string()) ids.insert(j["id"].get<std::string>());
  }
  return ids;
}

void cmd_evaluate(const RunConfig& c, std::ostream& out) {
  need(c.events, "--events", "evaluate");
  need(c.predictions, "--predictions", "evaluate");
  const auto bounds = tier_bounds(c);
  const auto mode = binarize_mode(c);
  const auto policy = parse_failure_policy(c.failure_policy);
  Dataset d = read_events_file(c.events);
  if (policy == FailurePolicy::kExclude) {
    const auto ids = prediction_ids(c.predictions);
    std::vector<EventRecord> kept;
    for (const auto& e : d.events()) {
      if (ids.count(e.id)) kept.push_back(e);
    }
    const std::size_t dropped = d.size() - kept.size();
    d = Dataset(d.name(), std::move(kept));
    if (dropped) out << "excluded " << dropped << " event(s) without a prediction\n";
  }
  const std::string name = c.model_name.empty() ? fs::path(c.predictions).stem().string() : c.model_name;
  const PredictionSet p = read_predictions_file(c.predictions, d, name);
  const LabelMatrix gold = gold_matrix(d);
  const LabelMatrix pred = binarize(p.probs, mode, c.tau);
  const EvaluationReport r = evaluate(name, gold, p.probs, pred, bounds);

  const fs::path base = fs::path(c.output_dir) / slug(name);
  write_text(base.string() + ".json", report_to_json(r));
  write_text(base.string() + ".md", report_markdown(r));
  write_text(base.string() + ".csv", per_class_csv(r));
  out << report_markdown(r) << "\nwritten: " << base.string() << ".{json,md,csv}\n";
}

void cmd_compare(const RunConfig& c, std::ostream& out) {
  need(c.report_a, "--report-a", "compare");
  need(c.report_b, "--report-b", "compare");
  const auto bounds = tier_bounds(c);
  const auto a = read_report_file(c.report_a, bounds);
  const auto b = read_report_file(c.report_b, bounds);
  const Comparison cmp = compare_reports(a, b, gap_thresholds(c));
  const fs::path dir = c.output_dir;
  write_text(dir / "comparison.json", comparison_json(cmp));
  write_text(dir / "comparison.md", comparison_markdown(cmp));
  write_text(dir / "figure_series.csv", figure_series_csv(cmp));
  out << comparison_markdown(cmp) << "\nwritten: " << (dir / "comparison.{json,md}").string()
      << ", " << (dir / "figure_series.csv").string() << "\n";
}

void cmd_classify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  need(c.events, "--events", "classify");
  if (c.endpoints.empty()) throw InputError("classify needs at least one --endpoint");
  const Dataset d = read_events_file(c.events);
  std::vector<EndpointConfig> endpoints;
  for (const auto& arg : c.endpoints) endpoints.push_back(parse_endpoint(arg, c));

  BatchOptions opt;
  opt.workers = c.workers;
  opt.checkpoint_path = c.checkpoint.empty() ? fs::path(c.output_dir) / "checkpoint.jsonl"
                                             : fs::path(c.checkpoint);
  opt.failure_policy = parse_failure_policy(c.failure_policy);
  opt.parse = parse_options(c);
  if (c.task_limit > 0) opt.task_limit = c.task_limit;
  std::error_code ec;
  fs::create_directories(c.output_dir, ec);
  if (opt.checkpoint_path.has_parent_path()) fs::create_directories(opt.checkpoint_path.parent_path(), ec);

  std::vector<PricingEntry> pricing;
  if (!c.pricing.empty()) pricing = read_pricing_file(c.pricing);

  const BatchResult res = run_batch(d, endpoints, opt);
  out << "tasks: " << res.tasks_total << " total, " << res.tasks_skipped << " resumed from checkpoint, "
      << res.tasks_run << " run" << (res.interrupted ? " (stopped at task limit)" : "") << "; "
      << fixed(res.wall_seconds, 1) << " s\n";
  if (res.checkpoint_malformed_lines) {
    err << "warning: skipped " << res.checkpoint_malformed_lines << " malformed checkpoint line(s)\n";
  }
  for (const auto& er : res.endpoints) {
    const fs::path path = fs::path(c.output_dir) / (slug(er.model_id) + ".predictions.jsonl");
    std::ostringstream buf;
    write_predictions(buf, er.predictions);
    write_text(path, buf.str());
    out << er.model_id << ": " << er.succeeded << " parsed, " << er.failures.size() << " failed, "
        << er.pending << " pending -> " << path.string() << "\n";
    if (er.auth_error) err << "  disabled: " << *er.auth_error << "\n";
    std::map<std::string, std::size_t> kinds;
    for (const auto& f : er.failures) ++kinds[f.kind];
    for (const auto& [kind, n] : kinds) out << "  " << kind << ": " << n << "\n";
    if (!pricing.empty() && er.usage.input + er.usage.output > 0) {
      for (const auto& p : pricing) {
        if (p.model_id != er.model_id) continue;
        const auto recon = reconcile(p, static_cast<std::int64_t>(er.succeeded + er.failures.size()),
                                     er.usage.input, er.usage.output, c.input_tokens, c.output_tokens);
        out << "  cost: projected " << money(recon.projected_usd) << ", actual "
            << money(recon.actual_usd) << " (" << percent(recon.relative_error, 1)
            << " projection error)\n";
      }
    }
  }
}

void cmd_cost(const RunConfig& c, std::ostream& out, std::ostream& err) {
  need(c.pricing, "--pricing", "cost");
  if (c.rows.empty()) throw InputError("cost needs at least one --rows value");
  const auto pricing = read_pricing_file(c.pricing);
  if (pricing.empty()) throw InputError("pricing table " + c.pricing + " has no entries");
  std::string warning;
  std::vector<CostEstimate> estimates;
  for (auto rows : c.rows) {
    for (const auto& p : pricing) {
      auto e = estimate_cost(rows, p, c.input_tokens, c.output_tokens);
      if (c.iterations != 1.0) e = iteration_multiplier(e, c.iterations, &warning);
      estimates.push_back(e);
    }
  }
  if (!warning.empty()) err << "warning: " << warning << "\n";
  const auto agg = aggregate_costs(estimates);
  std::string md = cost_markdown(agg, pricing);
  md += "\n" + std::to_string(c.input_tokens) + " input and " + std::to_string(c.output_tokens) +
        " output tokens per row; " +
        (c.iterations == 1.0 ? std::string("single pass") : "x" + fixed(c.iterations, 2) + " iterations") +
        "; prices as of " + pricing.front().as_of + ".\n";
  const fs::path dir = c.output_dir;
  if (!c.reference_costs.empty()) {
    const auto refs = read_reference_costs_file(c.reference_costs);
    const auto cmp = compare_to_reference(agg, refs, c.cost_tolerance);
    md += "\n## Against reference\n\n" + cost_comparison_markdown(cmp);
  }
  write_text(dir / "cost.md", md);
  write_text(dir / "cost.csv", cost_csv(agg));
  out << md;
}

void cmd_recommend(const RunConfig& c, std::ostream& out) {
  if (c.prevalence < 0) throw InputError("recommend needs --prevalence (a fraction in [0,1])");
  need(c.tolerance, "--tolerance", "recommend");
  need(c.resources, "--resources", "recommend");
  if (c.prevalence > 1) throw InputError("--prevalence must be a fraction in [0,1]");
  const auto rec = recommend_approach(c.prevalence, parse_error_tolerance(c.tolerance),
                                      parse_resources(c.resources));
  out << "recommendation: " << to_string(rec.choice)
      << (rec.manual_augment ? " + manual verification of the class of interest" : "") << "\n";
  for (const auto& f : rec.rationale) out << "  [" << to_string(f.consideration) << "] " << f.reason << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app("Evaluate, compare and cost multi-label attack-type classifiers.", "confeval");
  app.fallthrough();
  app.require_subcommand(0, 1);  // --dump-config alone is fine
  add_config_options(app, cfg);
  bool dump_config = false;
  app.add_flag("--dump-config", dump_config, "print the effective configuration and exit");

  std::function<void()> action;
  auto sub = [&](const char* name, const char* help, std::function<void()> fn) {
    app.add_subcommand(name, help)->callback([&action, fn] { action = fn; });
  };
  sub("split", "temporal train/test split (--events, --cutoff-year)", [&] { cmd_split(cfg, out); });
  sub("sample", "stratified sample (--events, --sample-n, --seed)", [&] { cmd_sample(cfg, out); });
  sub("evaluate", "metric suite for one prediction file (--events, --predictions)",
      [&] { cmd_evaluate(cfg, out); });
  sub("compare", "AUC gap, trend and true-positive comparison (--report-a, --report-b)",
      [&] { cmd_compare(cfg, out); });
  sub("classify", "zero-shot classification through chat endpoints (--events, --endpoint)",
      [&] { cmd_classify(cfg, out, err); });
  sub("cost", "projected API cost (--pricing, --rows)", [&] { cmd_cost(cfg, out, err); });
  sub("recommend", "approach recommendation (--prevalence, --tolerance, --resources)",
      [&] { cmd_recommend(cfg, out); });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitInputError;
  }

  try {
    if (dump_config) {
      out << serialize_config(cfg);
      return kExitOk;
    }
    if (!action) {
      err << "error: a subcommand is required\n\n" << app.help();
      return kExitInputError;
    }
    action();
    return kExitOk;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const RuntimeFailure& e) {
    err << "runtime failure: " << e.what() << "\n";
    return kExitRuntimeFailure;
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << "\n";
    return kExitRuntimeFailure;
  }
}

}  // namespace confeval::cli
