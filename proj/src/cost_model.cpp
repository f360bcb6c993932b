#include "confeval/cost_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "confeval/errors.hpp"
#include "confeval/text_format.hpp"

namespace confeval {

namespace {

std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

double parse_price(const std::string& tok, std::size_t line_no, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size() || !std::isfinite(v)) {
    throw RecordError(line_no, std::string("bad ") + what + " '" + tok + "'");
  }
  if (v < 0) throw RecordError(line_no, std::string(what) + " must be non-negative");
  return v;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<PricingEntry> parse_pricing(std::istream& in) {
  std::vector<PricingEntry> out;
  std::set<std::string> seen;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    std::istringstream ss(strip_comment(line));
    PricingEntry e;
    std::string in_tok, out_tok;
    if (!(ss >> e.model_id)) continue;
    if (!(ss >> in_tok >> out_tok >> e.as_of)) {
      throw RecordError(line_no, "expected: model_id input_price output_price as_of [name]");
    }
    e.input_per_million = parse_price(in_tok, line_no, "input price");
    e.output_per_million = parse_price(out_tok, line_no, "output price");
    std::getline(ss >> std::ws, e.display_name);
    while (!e.display_name.empty() && std::isspace(static_cast<unsigned char>(e.display_name.back()))) {
      e.display_name.pop_back();
    }
    if (e.display_name.empty()) e.display_name = e.model_id;
    if (!seen.insert(e.model_id).second) {
      throw RecordError(line_no, "duplicate model id '" + e.model_id + "'");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<PricingEntry> read_pricing_file(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_pricing(in);
}

const PricingEntry& find_pricing(std::span<const PricingEntry> table, const std::string& model_id) {
  for (const auto& e : table) {
    if (e.model_id == model_id) return e;
  }
  throw InputError("no pricing entry for model '" + model_id + "'");
}

CostEstimate estimate_cost(std::int64_t rows, const PricingEntry& pricing, std::int64_t input_tokens,
                           std::int64_t output_tokens) {
  if (rows < 0 || input_tokens < 0 || output_tokens < 0) {
    throw InputError("rows and token counts must be non-negative");
  }
  if (pricing.input_per_million < 0 || pricing.output_per_million < 0) {
    throw InputError("prices must be non-negative");
  }
  CostEstimate c;
  c.model_id = pricing.model_id;
  c.rows = rows;
  c.input_tokens_per_row = input_tokens;
  c.output_tokens_per_row = output_tokens;
  c.input_usd = static_cast<double>(rows) * static_cast<double>(input_tokens) *
                pricing.input_per_million / 1e6;
  c.output_usd = static_cast<double>(rows) * static_cast<double>(output_tokens) *
                 pricing.output_per_million / 1e6;
  c.total_usd = c.input_usd + c.output_usd;
  return c;
}

CostAggregate aggregate_costs(std::span<const CostEstimate> estimates) {
  if (estimates.empty()) throw InputError("no cost estimates to aggregate");
  std::map<std::int64_t, std::vector<CostEstimate>> by_rows;
  for (const auto& e : estimates) by_rows[e.rows].push_back(e);

  CostAggregate agg;
  std::set<std::string> reference_models;
  for (auto& [rows, list] : by_rows) {
    std::sort(list.begin(), list.end(),
              [](const CostEstimate& a, const CostEstimate& b) { return a.model_id < b.model_id; });
    std::set<std::string> models;
    for (const auto& e : list) {
      if (!models.insert(e.model_id).second) {
        throw InputError("model '" + e.model_id + "' appears twice at " + std::to_string(rows) +
                         " rows");
      }
    }
    if (agg.scales.empty()) {
      reference_models = models;
    } else if (models != reference_models) {
      throw InputError("row scale " + std::to_string(rows) +
                       " covers a different model set than scale " +
                       std::to_string(agg.scales.front().rows));
    }
    ScaleTotal s;
    s.rows = rows;
    for (const auto& e : list) s.total_usd += e.total_usd;
    s.estimates = std::move(list);
    agg.grand_total_usd += s.total_usd;
    agg.scales.push_back(std::move(s));
  }
  return agg;
}

CostEstimate iteration_multiplier(const CostEstimate& single_pass, double factor,
                                  std::string* warning) {
  if (!(factor > 0) || !std::isfinite(factor)) throw InputError("iteration factor must be positive");
  if (warning) {
    warning->clear();
    if (factor < 5 || factor > 20) {
      *warning = "iteration factor " + fixed(factor, 2) + " is outside the typical 5-20 range";
    }
  }
  CostEstimate c = single_pass;
  c.input_usd *= factor;
  c.output_usd *= factor;
  c.total_usd *= factor;
  return c;
}

double round_cents(double usd) { return std::stod(fixed(usd, 2)); }

std::vector<ReferenceCost> parse_reference_costs(std::istream& in) {
  std::vector<ReferenceCost> out;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    std::istringstream ss(strip_comment(line));
    ReferenceCost r;
    if (!(ss >> r.model_id)) continue;
    std::string rows_tok, usd_tok, extra;
    if (!(ss >> rows_tok >> usd_tok) || (ss >> extra)) {
      throw RecordError(line_no, "expected: model_id rows printed_usd");
    }
    try {
      std::size_t used = 0;
      r.rows = std::stoll(rows_tok, &used);
      if (used != rows_tok.size() || r.rows < 0) throw std::invalid_argument("rows");
    } catch (const std::exception&) {
      throw RecordError(line_no, "bad row count '" + rows_tok + "'");
    }
    r.printed_usd = parse_price(usd_tok, line_no, "printed cost");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ReferenceCost> read_reference_costs_file(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_reference_costs(in);
}

std::vector<CostComparison> compare_to_reference(const CostAggregate& aggregate,
                                                 std::span<const ReferenceCost> references,
                                                 double tolerance_usd) {
  std::vector<CostComparison> out;
  for (const auto& ref : references) {
    const auto scale = std::find_if(aggregate.scales.begin(), aggregate.scales.end(),
                                    [&](const ScaleTotal& s) { return s.rows == ref.rows; });
    if (scale == aggregate.scales.end()) {
      throw InputError("no estimates at " + std::to_string(ref.rows) + " rows");
    }
    double computed = 0.0;
    if (ref.model_id == "TOTAL") {
      computed = scale->total_usd;
    } else {
      const auto e = std::find_if(scale->estimates.begin(), scale->estimates.end(),
                                  [&](const CostEstimate& c) { return c.model_id == ref.model_id; });
      if (e == scale->estimates.end()) {
        throw InputError("no estimate for '" + ref.model_id + "' at " + std::to_string(ref.rows) +
                         " rows");
      }
      computed = e->total_usd;
    }
    CostComparison c;
    c.reference = ref;
    c.computed_usd = computed;
    c.delta_usd = computed - ref.printed_usd;
    c.within_tolerance = std::abs(c.delta_usd) <= tolerance_usd + 1e-9;
    c.discrepancy = fixed(computed, 2) != fixed(ref.printed_usd, 2);
    out.push_back(c);
  }
  return out;
}

Reconciliation reconcile(const PricingEntry& pricing, std::int64_t rows,
                         std::int64_t actual_input_tokens, std::int64_t actual_output_tokens,
                         std::int64_t input_tokens, std::int64_t output_tokens) {
  if (actual_input_tokens < 0 || actual_output_tokens < 0) {
    throw InputError("token counts must be non-negative");
  }
  Reconciliation r;
  r.projected_usd = estimate_cost(rows, pricing, input_tokens, output_tokens).total_usd;
  r.actual_usd = (static_cast<double>(actual_input_tokens) * pricing.input_per_million +
                  static_cast<double>(actual_output_tokens) * pricing.output_per_million) /
                 1e6;
  if (r.actual_usd > 0) {
    r.relative_error = std::abs(r.projected_usd - r.actual_usd) / r.actual_usd;
  } else {
    r.relative_error = r.projected_usd > 0 ? INFINITY : 0.0;
  }
  return r;
}

}  // namespace confeval
