#include "confeval/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

#include "confeval/errors.hpp"

namespace confeval {

using nlohmann::json;

Dataset::Dataset(std::string name, std::vector<EventRecord> events)
    : name_(std::move(name)), events_(std::move(events)) {
  index_.reserve(events_.size());
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const auto& e = events_[i];
    if (e.gold.none()) throw InputError("event '" + e.id + "' has an empty gold label set");
    if (!index_.emplace(e.id, i).second) throw InputError("duplicate event id '" + e.id + "'");
  }
}

std::optional<std::size_t> Dataset::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

json parse_line(const std::string& line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw RecordError(line_no, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw RecordError(line_no, "record is not a JSON object");
  return j;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

int parse_year_text(const std::string& s, std::size_t line_no) {
  if (s.size() < 4 || !std::all_of(s.begin(), s.begin() + 4,
                                   [](unsigned char c) { return std::isdigit(c) != 0; })) {
    throw RecordError(line_no, "cannot read a year from '" + s + "'");
  }
  return std::stoi(s.substr(0, 4));
}

int read_year(const json& j, std::size_t line_no) {
  const json* field = nullptr;
  if (j.contains("year")) {
    field = &j["year"];
  } else if (j.contains("date")) {
    field = &j["date"];
  } else {
    throw RecordError(line_no, "missing field 'year'");
  }
  if (field->is_number_integer()) return field->get<int>();
  if (field->is_string()) return parse_year_text(field->get<std::string>(), line_no);
  throw RecordError(line_no, "field 'year' must be an integer or date string");
}

}  // namespace

Dataset parse_events(std::istream& in, std::string name) {
  std::vector<EventRecord> events;
  std::unordered_map<std::string, std::size_t> first_line;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const json j = parse_line(line, line_no);

    EventRecord e;
    if (!j.contains("id") || !j["id"].is_string()) {
      throw RecordError(line_no, "missing or non-string field 'id'");
    }
    e.id = j["id"].get<std::string>();
    e.year = read_year(j, line_no);
    if (!j.contains("text") || !j["text"].is_string()) {
      throw RecordError(line_no, "missing or non-string field 'text'");
    }
    e.text = j["text"].get<std::string>();
    if (e.text.empty()) throw RecordError(line_no, "empty 'text'");
    if (!j.contains("labels") || !j["labels"].is_array()) {
      throw RecordError(line_no, "missing or non-array field 'labels'");
    }
    const auto& labels = j["labels"];
    if (labels.empty()) throw RecordError(line_no, "empty label array for id '" + e.id + "'");
    for (const auto& l : labels) {
      if (!l.is_string()) throw RecordError(line_no, "label entries must be strings");
      const auto s = l.get<std::string>();
      const auto parsed = parse_label(s);
      if (!parsed) throw RecordError(line_no, "unknown label '" + s + "'");
      e.gold.set(index_of(*parsed));
    }

    auto [it, inserted] = first_line.emplace(e.id, line_no);
    if (!inserted) {
      throw RecordError(line_no, "duplicate id '" + e.id + "' (first seen on line " +
                                     std::to_string(it->second) + ")");
    }
    events.push_back(std::move(e));
  }
  return Dataset(std::move(name), std::move(events));
}

Dataset read_events_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open events file '" + path.string() + "'");
  return parse_events(in, path.stem().string());
}

void write_events(std::ostream& out, const Dataset& d) {
  for (const auto& e : d.events()) {
    json labels = json::array();
    for (auto l : to_labels(e.gold)) labels.push_back(std::string(to_string(l)));
    json j = {{"id", e.id}, {"year", e.year}, {"text", e.text}, {"labels", labels}};
    out << j.dump() << '\n';
  }
}

void write_events_file(const std::filesystem::path& path, const Dataset& d) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write events file '" + path.string() + "'");
  write_events(out, d);
}

std::pair<Dataset, Dataset> temporal_split(const Dataset& d, int cutoff_year) {
  std::vector<EventRecord> train, test;
  for (const auto& e : d.events()) {
    (e.year < cutoff_year ? train : test).push_back(e);
  }
  return {Dataset(d.name() + "_train", std::move(train)),
          Dataset(d.name() + "_test", std::move(test))};
}

std::vector<std::size_t> label_counts(const Dataset& d) {
  std::vector<std::size_t> counts(kNumLabels, 0);
  for (const auto& e : d.events()) {
    for (std::size_t j = 0; j < kNumLabels; ++j) counts[j] += e.gold.test(j) ? 1 : 0;
  }
  return counts;
}

std::vector<LabelCountRow> label_distribution(std::span<const std::size_t> counts) {
  if (counts.size() != kNumLabels) throw std::invalid_argument("expected 9 label counts");
  const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (total == 0) throw InputError("label distribution of an empty dataset");
  std::vector<LabelCountRow> rows;
  for (std::size_t j = 0; j < kNumLabels; ++j) {
    rows.push_back({label_at(j), counts[j],
                    static_cast<double>(counts[j]) / static_cast<double>(total)});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.count > b.count; });
  return rows;
}

std::vector<LabelCountRow> label_distribution(const Dataset& d) {
  if (d.empty()) throw InputError("label distribution of an empty dataset");
  const auto counts = label_counts(d);
  return label_distribution(std::span<const std::size_t>(counts));
}

std::size_t stratum_of(const EventRecord& e) {
  for (std::size_t j = 0; j < kNumLabels; ++j) {
    if (e.gold.test(j)) return j;
  }
  return kNumLabels;  // unreachable for valid events
}

std::vector<std::size_t> largest_remainder_allocation(std::span<const std::size_t> sizes,
                                                      std::size_t n) {
  const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  if (n > total) throw std::invalid_argument("allocation exceeds population");
  std::vector<std::size_t> alloc(sizes.size(), 0);
  if (total == 0) return alloc;

  // Exact integer arithmetic: quota_i = n * size_i / total.
  std::vector<std::pair<std::uint64_t, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const std::uint64_t num = static_cast<std::uint64_t>(n) * sizes[i];
    alloc[i] = static_cast<std::size_t>(num / total);
    assigned += alloc[i];
    remainders.emplace_back(num % total, i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++alloc[remainders[k].second];
  return alloc;
}

namespace {

// Portable bounded draw; std::uniform_int_distribution is implementation-defined.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

}  // namespace

Dataset stratified_sample(const Dataset& d, std::size_t n, std::uint64_t seed) {
  if (n > d.size()) {
    throw InputError("sample size " + std::to_string(n) + " exceeds dataset size " +
                     std::to_string(d.size()));
  }
  std::vector<std::vector<std::size_t>> members(kNumLabels);
  for (std::size_t i = 0; i < d.size(); ++i) members[stratum_of(d[i])].push_back(i);

  std::vector<std::size_t> sizes;
  std::vector<std::size_t> strata;
  for (std::size_t s = 0; s < kNumLabels; ++s) {
    if (members[s].empty()) continue;
    sizes.push_back(members[s].size());
    strata.push_back(s);
  }
  if (n < strata.size()) {
    throw InputError("sample size " + std::to_string(n) + " is below the number of strata (" +
                     std::to_string(strata.size()) + ")");
  }
  const auto alloc = largest_remainder_allocation(sizes, n);

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> chosen;
  chosen.reserve(n);
  for (std::size_t k = 0; k < strata.size(); ++k) {
    auto pool = members[strata[k]];
    // Partial Fisher-Yates: the first alloc[k] slots become the selection.
    for (std::size_t i = 0; i < alloc[k]; ++i) {
      const auto j = i + uniform_below(rng, pool.size() - i);
      std::swap(pool[i], pool[j]);
    }
    chosen.insert(chosen.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(alloc[k]));
  }
  std::sort(chosen.begin(), chosen.end());

  std::vector<EventRecord> out;
  out.reserve(chosen.size());
  for (auto i : chosen) out.push_back(d[i]);
  return Dataset(d.name() + "_sample", std::move(out));
}

LabelMatrix gold_matrix(const Dataset& d) {
  LabelMatrix m(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(kNumLabels));
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < kNumLabels; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d[i].gold.test(j);
    }
  }
  return m;
}

PredictionSet load_predictions(std::istream& in, const Dataset& d, std::string model_name) {
  PredictionSet p;
  p.model_name = std::move(model_name);
  p.probs = ProbabilityMatrix::Zero(static_cast<Eigen::Index>(d.size()),
                                    static_cast<Eigen::Index>(kNumLabels));
  std::vector<bool> seen(d.size(), false);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const json j = parse_line(line, line_no);
    if (!j.contains("id") || !j["id"].is_string()) {
      throw RecordError(line_no, "missing or non-string field 'id'");
    }
    const auto id = j["id"].get<std::string>();
    const auto row = d.find(id);
    if (!row) throw RecordError(line_no, "extra id '" + id + "' not present in the dataset");
    if (seen[*row]) throw RecordError(line_no, "id '" + id + "' appears more than once");
    if (!j.contains("probs") || !j["probs"].is_array()) {
      throw RecordError(line_no, "missing or non-array field 'probs'");
    }
    const auto& probs = j["probs"];
    if (probs.size() != kNumLabels) {
      throw RecordError(line_no, "wrong probability vector length " +
                                     std::to_string(probs.size()) + " for id '" + id +
                                     "' (expected 9)");
    }
    for (std::size_t k = 0; k < kNumLabels; ++k) {
      if (!probs[k].is_number()) {
        throw RecordError(line_no, "non-numeric probability for id '" + id + "' at label index " +
                                       std::to_string(k));
      }
      const double v = probs[k].get<double>();
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw RecordError(line_no, "probability out of range [0,1] for id '" + id +
                                       "' at label index " + std::to_string(k));
      }
      p.probs(static_cast<Eigen::Index>(*row), static_cast<Eigen::Index>(k)) = v;
    }
    seen[*row] = true;
  }
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!seen[i]) throw InputError("missing prediction for id '" + d[i].id + "'");
  }
  p.ids.reserve(d.size());
  for (const auto& e : d.events()) p.ids.push_back(e.id);
  return p;
}

PredictionSet read_predictions_file(const std::filesystem::path& path, const Dataset& d,
                                    std::string model_name) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open predictions file '" + path.string() + "'");
  return load_predictions(in, d, std::move(model_name));
}

void write_predictions(std::ostream& out, const PredictionSet& p) {
  for (std::size_t i = 0; i < p.ids.size(); ++i) {
    json probs = json::array();
    for (Eigen::Index k = 0; k < p.probs.cols(); ++k) {
      probs.push_back(p.probs(static_cast<Eigen::Index>(i), k));
    }
    out << json{{"id", p.ids[i]}, {"probs", probs}}.dump() << '\n';
  }
}

void write_predictions_file(const std::filesystem::path& path, const PredictionSet& p) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write predictions file '" + path.string() + "'");
  write_predictions(out, p);
}

}  // namespace confeval
