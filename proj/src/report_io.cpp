#include "confeval/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "confeval/errors.hpp"
#include "confeval/labels.hpp"
#include "confeval/text_format.hpp"

namespace confeval {

using ojson = nlohmann::ordered_json;
using Align = MarkdownTable::Align;

namespace {

ojson opt(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

ojson tier_json(const TierCalibration& t) {
  ojson members = ojson::array();
  for (auto m : t.members) members.push_back(label_name(m));
  return {{"name", t.name},     {"members", members},         {"tp", t.pooled.tp},
          {"fp", t.pooled.fp},  {"fn", t.pooled.fn},          {"tn", t.pooled.tn},
          {"tpr", opt(t.tpr)},  {"fpr", opt(t.fpr)},          {"precision", opt(t.precision)},
          {"f1", opt(t.f1)}};
}

std::string opt_fixed(const std::optional<double>& v, int decimals) {
  return v ? fixed(*v, decimals) : "n/a";
}

std::string opt_percent(const std::optional<double>& v, int decimals) {
  return v ? percent(*v, decimals) : "n/a";
}

std::size_t label_index(const std::string& name) {
  const auto l = parse_label(name);
  if (!l) throw InputError("unknown label '" + name + "' in report");
  return index_of(*l);
}

template <typename T>
T required(const ojson& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) throw InputError(where + ": missing '" + key + "'");
  try {
    return it->get<T>();
  } catch (const ojson::exception&) {
    throw InputError(where + ": '" + key + "' has the wrong type");
  }
}

template <typename T>
std::optional<T> optional_field(const ojson& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const ojson::exception&) {
    throw InputError(where + ": '" + key + "' has the wrong type");
  }
}

}  // namespace

std::string report_to_json(const EvaluationReport& r) {
  ojson per_class = ojson::array();
  for (const auto& m : r.per_class) {
    per_class.push_back({{"label", label_name(m.label)},
                         {"support", m.support},
                         {"tp", m.confusion.tp},
                         {"fp", m.confusion.fp},
                         {"fn", m.confusion.fn},
                         {"tn", m.confusion.tn},
                         {"precision", m.precision},
                         {"recall", m.recall},
                         {"f1", m.f1},
                         {"auc", m.auc ? ojson(*m.auc) : ojson("undefined")},
                         {"prevalence", m.label < r.prevalence.size() ? r.prevalence[m.label] : 0.0},
                         {"no_predictions", m.no_predictions},
                         {"no_support", m.no_support}});
  }
  ojson tiers = ojson::array();
  for (const auto& t : r.tiers.tiers) tiers.push_back(tier_json(t));
  tiers.push_back(tier_json(r.tiers.overall));
  ojson errors = ojson::array();
  for (const auto& e : r.errors) {
    errors.push_back({{"from", label_name(e.from_label)}, {"to", label_name(e.to_label)}, {"count", e.count}});
  }
  ojson j = {{"model", r.model_name},
             {"n_events", r.n_events},
             {"subset_accuracy", r.subset_accuracy},
             {"micro_precision", r.micro_precision},
             {"micro_recall", r.micro_recall},
             {"micro_f1", r.micro_f1},
             {"macro_f1", r.macro_f1},
             {"total_tp", r.total_tp},
             {"per_class", per_class},
             {"tiers", tiers},
             {"error_patterns", errors}};
  return j.dump(2) + "\n";
}

EvaluationReport report_from_json(std::string_view text, const TierBounds& bounds) {
  const ojson j = ojson::parse(text.begin(), text.end(), nullptr, false);
  if (!j.is_object()) throw InputError("report is not a JSON object");
  const auto pc = j.find("per_class");
  if (pc == j.end() || !pc->is_array()) throw InputError("report lacks a 'per_class' array");

  EvaluationReport r;
  r.model_name = j.value("model", std::string("model"));
  r.n_events = optional_field<std::int64_t>(j, "n_events", "report").value_or(0);
  r.per_class.resize(kNumLabels);
  std::vector<bool> seen(kNumLabels, false);
  bool full_confusions = true;
  for (const auto& e : *pc) {
    if (!e.is_object()) throw InputError("per_class entries must be objects");
    const auto name = required<std::string>(e, "label", "per_class entry");
    const std::size_t k = label_index(name);
    if (seen[k]) throw InputError("label '" + name + "' listed twice in report");
    seen[k] = true;
    auto& m = r.per_class[k];
    m.label = k;
    m.support = required<std::int64_t>(e, "support", name);
    m.confusion.tp = required<std::int64_t>(e, "tp", name);
    m.f1 = required<double>(e, "f1", name);
    if (m.support < 0 || m.confusion.tp < 0 || m.confusion.tp > m.support) {
      throw InputError(name + ": need 0 <= tp <= support");
    }
    m.confusion.fn = optional_field<std::int64_t>(e, "fn", name).value_or(m.support - m.confusion.tp);
    if (m.confusion.fn != m.support - m.confusion.tp) throw InputError(name + ": tp + fn != support");
    const auto fp = optional_field<std::int64_t>(e, "fp", name);
    const auto tn = optional_field<std::int64_t>(e, "tn", name);
    full_confusions = full_confusions && fp && tn;
    m.confusion.fp = fp.value_or(0);
    m.confusion.tn = tn.value_or(0);
    m.precision = optional_field<double>(e, "precision", name).value_or(0.0);
    m.recall = optional_field<double>(e, "recall", name)
                   .value_or(m.support ? static_cast<double>(m.confusion.tp) / m.support : 0.0);
    m.no_support = m.support == 0;
    m.no_predictions = fp && m.confusion.tp + *fp == 0;

    const auto auc = e.find("auc");
    if (auc == e.end()) throw InputError(name + ": missing 'auc'");
    if (auc->is_number()) {
      m.auc = auc->get<double>();
      if (!(*m.auc >= 0.0 && *m.auc <= 1.0)) throw InputError(name + ": auc outside [0,1]");
    } else if (!auc->is_null() && !(auc->is_string() && auc->get<std::string>() == "undefined")) {
      throw InputError(name + ": auc must be a number or \"undefined\"");
    }
  }
  for (std::size_t k = 0; k < kNumLabels; ++k) {
    if (!seen[k]) throw InputError("report is missing label '" + label_name(k) + "'");
  }

  std::int64_t instances = 0;
  for (const auto& m : r.per_class) instances += m.support;
  r.prevalence.resize(kNumLabels);
  for (std::size_t k = 0; k < kNumLabels; ++k) {
    r.prevalence[k] = instances ? static_cast<double>(r.per_class[k].support) / instances : 0.0;
    r.total_tp += r.per_class[k].confusion.tp;
  }
  r.subset_accuracy = j.value("subset_accuracy", 0.0);
  r.micro_precision = j.value("micro_precision", 0.0);
  r.micro_recall = j.value("micro_recall", 0.0);
  r.micro_f1 = j.value("micro_f1", 0.0);
  if (const auto macro = optional_field<double>(j, "macro_f1", "report")) {
    r.macro_f1 = *macro;
  } else {
    for (const auto& m : r.per_class) r.macro_f1 += m.f1 / kNumLabels;
  }
  if (full_confusions) {
    std::vector<BinaryConfusion> conf;
    for (const auto& m : r.per_class) conf.push_back(m.confusion);
    r.tiers = tier_calibration(conf, r.prevalence, bounds);
  }
  if (const auto ep = j.find("error_patterns"); ep != j.end() && ep->is_array()) {
    for (const auto& e : *ep) {
      r.errors.push_back({label_index(required<std::string>(e, "from", "error pattern")),
                          label_index(required<std::string>(e, "to", "error pattern")),
                          required<std::int64_t>(e, "count", "error pattern")});
    }
  }
  return r;
}

EvaluationReport read_report_file(const std::filesystem::path& path, const TierBounds& bounds) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open report " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return report_from_json(ss.str(), bounds);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string per_class_markdown(const EvaluationReport& r) {
  MarkdownTable t({"Attack Type", "Support", "TP", "FP", "FN", "Precision", "Recall", "F1", "AUC"},
                  {Align::kLeft, Align::kRight, Align::kRight, Align::kRight, Align::kRight,
                   Align::kRight, Align::kRight, Align::kRight, Align::kRight});
  std::vector<const PerClassMetrics*> rows;
  for (const auto& m : r.per_class) rows.push_back(&m);
  std::stable_sort(rows.begin(), rows.end(),
                   [](auto* a, auto* b) { return a->support > b->support; });
  for (const auto* m : rows) {
    t.add_row({label_name(m->label), thousands(m->support), thousands(m->confusion.tp),
               thousands(m->confusion.fp), thousands(m->confusion.fn), fixed(m->precision, 4),
               fixed(m->recall, 4), fixed(m->f1, 4), opt_fixed(m->auc, 4)});
  }
  return t.str();
}

std::string per_class_csv(const EvaluationReport& r) {
  std::string out = csv_line({"label", "support", "tp", "fp", "fn", "tn", "precision", "recall", "f1",
                              "auc", "prevalence"});
  for (const auto& m : r.per_class) {
    out += csv_line({label_name(m.label), std::to_string(m.support), std::to_string(m.confusion.tp),
                     std::to_string(m.confusion.fp), std::to_string(m.confusion.fn),
                     std::to_string(m.confusion.tn), fixed(m.precision, 6), fixed(m.recall, 6),
                     fixed(m.f1, 6), m.auc ? fixed(*m.auc, 6) : "",
                     fixed(m.label < r.prevalence.size() ? r.prevalence[m.label] : 0.0, 6)});
  }
  return out;
}

std::string tier_markdown(const EvaluationReport& r) {
  MarkdownTable t({"Prevalence Tier", "Classes", "True Pos. Rate", "False Pos. Rate", "Precision", "F1"},
                  {Align::kLeft, Align::kRight, Align::kRight, Align::kRight, Align::kRight,
                   Align::kRight});
  auto row = [&](const TierCalibration& c) {
    t.add_row({c.name, std::to_string(c.members.size()), opt_percent(c.tpr, 1),
               opt_percent(c.fpr, 1), opt_percent(c.precision, 1), opt_fixed(c.f1, 4)});
  };
  for (const auto& c : r.tiers.tiers) row(c);
  row(r.tiers.overall);
  return t.str();
}

std::string error_patterns_markdown(const EvaluationReport& r, std::size_t top) {
  MarkdownTable t({"Error Type", "Count"}, {Align::kLeft, Align::kRight});
  for (std::size_t i = 0; i < r.errors.size() && i < top; ++i) {
    const auto& e = r.errors[i];
    t.add_row({label_name(e.from_label) + " misclassified as " + label_name(e.to_label),
               thousands(e.count)});
  }
  return t.str();
}

std::string report_markdown(const EvaluationReport& r) {
  std::ostringstream out;
  out << "# " << r.model_name << "\n\n";
  MarkdownTable h({"Metric", "Value"}, {Align::kLeft, Align::kRight});
  h.add_row({"Events", thousands(r.n_events)});
  h.add_row({"Subset accuracy", percent(r.subset_accuracy, 2)});
  h.add_row({"Micro precision", fixed(r.micro_precision, 4)});
  h.add_row({"Micro recall", fixed(r.micro_recall, 4)});
  h.add_row({"Micro F1", fixed(r.micro_f1, 4)});
  h.add_row({"Macro F1", fixed(r.macro_f1, 4)});
  h.add_row({"True positives", thousands(r.total_tp)});
  out << h.str() << "\n## Per class\n\n" << per_class_markdown(r) << "\n## Prevalence tiers\n\n"
      << tier_markdown(r) << "\n## Error patterns\n\n" << error_patterns_markdown(r);
  return out.str();
}

Comparison compare_reports(const EvaluationReport& a, const EvaluationReport& b,
                           const GapThresholds& thresholds) {
  if (a.per_class.size() != kNumLabels || b.per_class.size() != kNumLabels) {
    throw InputError("reports must cover all nine labels");
  }
  std::vector<std::int64_t> counts(kNumLabels);
  for (std::size_t k = 0; k < kNumLabels; ++k) {
    counts[k] = a.per_class[k].support;
    if (b.per_class[k].support != counts[k]) {
      throw InputError("reports disagree on the support of '" + label_name(k) +
                       "'; were they computed on the same events?");
    }
  }
  Comparison c;
  c.name_a = a.model_name;
  c.name_b = b.model_name;
  c.gaps = auc_gaps(a, b, counts, thresholds);
  c.tp = true_positive_delta(a, b);

  std::vector<std::pair<double, double>> points;
  for (const auto& g : c.gaps.records) {
    if (g.count > 0) points.emplace_back(static_cast<double>(g.count), g.diff);
  }
  try {
    c.trend = fit_log_trend(points);
  } catch (const std::invalid_argument&) {
    c.trend.reset();
  }
  return c;
}

std::string auc_table_markdown(const Comparison& c) {
  MarkdownTable t({"Attack Type", c.name_a + " AUC", c.name_b + " AUC", "Difference"},
                  {Align::kLeft, Align::kRight, Align::kRight, Align::kRight});
  for (const auto& g : c.gaps.records) {
    t.add_row({label_name(g.label), fixed(g.auc_a, 4), fixed(g.auc_b, 4), signed_fixed(g.diff, 4)});
  }
  t.add_row({"Average", fixed(c.gaps.mean_auc_a, 4), fixed(c.gaps.mean_auc_b, 4),
             signed_fixed(c.gaps.mean_diff, 4)});
  return t.str();
}

std::string gap_category_markdown(const Comparison& c) {
  auto recs = c.gaps.records;
  std::stable_sort(recs.begin(), recs.end(), [](const GapRecord& x, const GapRecord& y) {
    if (x.category != y.category) return x.category > y.category;
    return x.diff > y.diff;
  });
  MarkdownTable t({"Attack Type", "AUC Difference", "Prevalence %", "Gap Category"},
                  {Align::kLeft, Align::kRight, Align::kRight, Align::kLeft});
  for (const auto& g : recs) {
    t.add_row({label_name(g.label), signed_fixed(g.diff, 4) + " (" + percent(std::abs(g.diff), 1) + ")",
               percent(g.prevalence, 1), to_string(g.category) + " Gap"});
  }
  return t.str();
}

std::string tp_delta_markdown(const Comparison& c) {
  MarkdownTable t({"Attack Type", c.name_a, c.name_b, "Difference", "Diff % of " + c.name_a,
                   "Diff % of " + c.name_b},
                  {Align::kLeft, Align::kRight, Align::kRight, Align::kRight, Align::kRight,
                   Align::kRight});
  auto pct = [](const std::optional<double>& p) {
    return p ? signed_fixed(*p * 100.0, 1) + "%" : "n/a";
  };
  std::vector<TruePositiveDelta> rows(c.tp.begin(), c.tp.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
    if (x.total_row != y.total_row) return y.total_row;
    return x.tp_a > y.tp_a;
  });
  for (const auto& d : rows) {
    t.add_row({d.total_row ? "Total" : label_name(d.label), thousands(d.tp_a), thousands(d.tp_b),
               (d.diff > 0 ? "+" : "") + thousands(d.diff),
               pct(d.pct_of_a), pct(d.pct_of_b)});
  }
  return t.str();
}

std::string figure_series_csv(const Comparison& c) {
  auto recs = c.gaps.records;
  std::stable_sort(recs.begin(), recs.end(),
                   [](const GapRecord& x, const GapRecord& y) { return x.count < y.count; });
  std::string out = csv_line({"label", "count", "prevalence", "auc_a", "auc_b", "diff", "trend"});
  for (const auto& g : recs) {
    const std::string trend =
        c.trend && g.count > 0 ? fixed((*c.trend)(static_cast<double>(g.count)), 6) : "";
    out += csv_line({label_name(g.label), std::to_string(g.count), fixed(g.prevalence, 6),
                     fixed(g.auc_a, 6), fixed(g.auc_b, 6), fixed(g.diff, 6), trend});
  }
  return out;
}

std::string comparison_json(const Comparison& c) {
  ojson records = ojson::array();
  for (const auto& g : c.gaps.records) {
    records.push_back({{"label", label_name(g.label)},
                       {"count", g.count},
                       {"prevalence", g.prevalence},
                       {"auc_a", g.auc_a},
                       {"auc_b", g.auc_b},
                       {"diff", g.diff},
                       {"category", to_string(g.category)}});
  }
  ojson tp = ojson::array();
  for (const auto& d : c.tp) {
    tp.push_back({{"label", d.total_row ? "Total" : label_name(d.label)},
                  {"tp_a", d.tp_a},
                  {"tp_b", d.tp_b},
                  {"diff", d.diff},
                  {"pct_of_a", opt(d.pct_of_a)},
                  {"pct_of_b", opt(d.pct_of_b)}});
  }
  ojson trend = nullptr;
  if (c.trend) {
    trend = {{"slope", c.trend->slope},
             {"intercept", c.trend->intercept},
             {"r_squared", c.trend->r_squared},
             {"n_points", c.trend->n_points}};
  }
  ojson j = {{"model_a", c.name_a},
             {"model_b", c.name_b},
             {"gaps", records},
             {"mean_auc_a", c.gaps.mean_auc_a},
             {"mean_auc_b", c.gaps.mean_auc_b},
             {"mean_diff", c.gaps.mean_diff},
             {"trend", trend},
             {"true_positives", tp}};
  return j.dump(2) + "\n";
}

std::string comparison_markdown(const Comparison& c) {
  std::ostringstream out;
  out << "# " << c.name_a << " vs " << c.name_b << "\n\n## Per-class AUC\n\n"
      << auc_table_markdown(c) << "\n## Gap categories\n\n" << gap_category_markdown(c)
      << "\n## Trend\n\n";
  if (c.trend) {
    out << "diff = " << fixed(c.trend->slope, 4) << " * ln(count) " << (c.trend->intercept < 0 ? "- " : "+ ")
        << fixed(std::abs(c.trend->intercept), 4) << " (R^2 = " << fixed(c.trend->r_squared, 3)
        << ", n = " << c.trend->n_points << ")\n";
  } else {
    out << "not enough variation in class counts to fit a trend\n";
  }
  out << "\n## True positives\n\n" << tp_delta_markdown(c);
  return out.str();
}

std::string label_distribution_markdown(std::span<const LabelCountRow> rows) {
  MarkdownTable t({"Attack Type", "Count", "Percentage"}, {Align::kLeft, Align::kRight, Align::kRight});
  std::size_t total = 0;
  for (const auto& r : rows) {
    t.add_row({std::string(to_string(r.label)), thousands(static_cast<std::int64_t>(r.count)),
               percent(r.percentage, 1)});
    total += r.count;
  }
  t.add_row({"Total", thousands(static_cast<std::int64_t>(total)), "100.0%"});
  return t.str();
}

std::string label_distribution_csv(std::span<const LabelCountRow> rows) {
  std::string out = csv_line({"label", "count", "percentage"});
  for (const auto& r : rows) {
    out += csv_line({std::string(to_string(r.label)), std::to_string(r.count), fixed(r.percentage, 6)});
  }
  return out;
}

std::string cost_markdown(const CostAggregate& agg, std::span<const PricingEntry> pricing) {
  std::vector<std::string> header = {"Model", "Input ($/M tok.)", "Output ($/M tok.)"};
  std::vector<Align> align = {Align::kLeft, Align::kRight, Align::kRight};
  for (const auto& s : agg.scales) {
    header.push_back(thousands(s.rows) + " rows");
    align.push_back(Align::kRight);
  }
  MarkdownTable t(header, align);
  if (agg.scales.empty()) return t.str();
  // Pricing-table order first, then any model the table does not list.
  std::vector<const CostEstimate*> order;
  for (const auto& q : pricing) {
    for (const auto& e : agg.scales.front().estimates) {
      if (e.model_id == q.model_id) order.push_back(&e);
    }
  }
  for (const auto& e : agg.scales.front().estimates) {
    if (std::find(order.begin(), order.end(), &e) == order.end()) order.push_back(&e);
  }
  for (const auto* ep : order) {
    const auto& e = *ep;
    const PricingEntry* p = nullptr;
    for (const auto& q : pricing) {
      if (q.model_id == e.model_id) p = &q;
    }
    std::vector<std::string> row = {p ? p->display_name : e.model_id,
                                    p ? money(p->input_per_million) : "",
                                    p ? money(p->output_per_million) : ""};
    for (const auto& s : agg.scales) {
      for (const auto& x : s.estimates) {
        if (x.model_id == e.model_id) row.push_back(money(x.total_usd));
      }
    }
    t.add_row(row);
  }
  std::vector<std::string> total = {std::to_string(agg.scales.front().estimates.size()) + "-model total",
                                    "---", "---"};
  for (const auto& s : agg.scales) total.push_back(money(s.total_usd));
  t.add_row(total);
  return t.str();
}

std::string cost_csv(const CostAggregate& agg) {
  std::string out = csv_line({"model_id", "rows", "input_tokens_per_row", "output_tokens_per_row",
                              "input_usd", "output_usd", "total_usd"});
  for (const auto& s : agg.scales) {
    for (const auto& e : s.estimates) {
      out += csv_line({e.model_id, std::to_string(e.rows), std::to_string(e.input_tokens_per_row),
                       std::to_string(e.output_tokens_per_row), fixed(e.input_usd, 6),
                       fixed(e.output_usd, 6), fixed(e.total_usd, 6)});
    }
    out += csv_line({"TOTAL", std::to_string(s.rows), "", "", "", "", fixed(s.total_usd, 6)});
  }
  return out;
}

std::string cost_comparison_markdown(std::span<const CostComparison> rows) {
  MarkdownTable t({"Model", "Rows", "Computed", "Printed", "Delta", "Status"},
                  {Align::kLeft, Align::kRight, Align::kRight, Align::kRight, Align::kRight,
                   Align::kLeft});
  for (const auto& c : rows) {
    std::string status = !c.discrepancy ? "match" : c.within_tolerance ? "DISCREPANCY (within tolerance)"
                                                                       : "DISCREPANCY";
    t.add_row({c.reference.model_id, thousands(c.reference.rows), money(c.computed_usd),
               money(c.reference.printed_usd), signed_fixed(c.delta_usd, 2), status});
  }
  return t.str();
}

}  // namespace confeval
