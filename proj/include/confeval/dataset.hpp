#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "confeval/labels.hpp"
#include "confeval/types.hpp"

namespace confeval {

inline constexpr int kDefaultCutoffYear = 2017;

struct EventRecord {
  std::string id;
  int year = 0;
  std::string text;
  LabelSet gold;
};

/// Ordered, immutable collection of events with unique ids and non-empty
/// gold label sets. The constructor enforces both invariants.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::string name, std::vector<EventRecord> events);

  const std::string& name() const { return name_; }
  const std::vector<EventRecord>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  const EventRecord& operator[](std::size_t i) const { return events_[i]; }

  std::optional<std::size_t> find(std::string_view id) const;

 private:
  std::string name_;
  std::vector<EventRecord> events_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Reads line-delimited JSON records {id, year, text, labels}. `year` may be
/// an integer or a date string whose first four characters are the year;
/// a `date` field is accepted when `year` is absent. Blank lines are skipped.
Dataset parse_events(std::istream& in, std::string name = "events");
Dataset read_events_file(const std::filesystem::path& path);

void write_events(std::ostream& out, const Dataset& d);
void write_events_file(const std::filesystem::path& path, const Dataset& d);

/// Train holds year < cutoff, test holds year >= cutoff. Order is preserved.
std::pair<Dataset, Dataset> temporal_split(const Dataset& d,
                                           int cutoff_year = kDefaultCutoffYear);

struct LabelCountRow {
  AttackLabel label;
  std::size_t count = 0;
  double percentage = 0.0;  // fraction of all (event, label) gold pairs
};

/// Counts (event, label) gold pairs per label, sorted by count descending
/// (ties by label index). Throws InputError on an empty dataset.
std::vector<LabelCountRow> label_distribution(const Dataset& d);

/// Same computation over pre-aggregated counts in label index order.
std::vector<LabelCountRow> label_distribution(std::span<const std::size_t> counts);

/// Per-label gold counts in label index order.
std::vector<std::size_t> label_counts(const Dataset& d);

/// Stratum of an event: the lowest-index label in its gold set.
std::size_t stratum_of(const EventRecord& e);

/// Hamilton (largest remainder) apportionment of `n` seats across groups of
/// the given sizes. Remainder ties go to the lower group index.
std::vector<std::size_t> largest_remainder_allocation(std::span<const std::size_t> sizes,
                                                      std::size_t n);

/// Proportional stratified sample without replacement. Output keeps the
/// original dataset order and is a pure function of (d, n, seed).
Dataset stratified_sample(const Dataset& d, std::size_t n, std::uint64_t seed);

/// N x 9 gold indicator matrix in dataset order.
LabelMatrix gold_matrix(const Dataset& d);

/// One model's probability rows aligned to a dataset (row i is event i).
struct PredictionSet {
  std::string model_name;
  std::vector<std::string> ids;
  ProbabilityMatrix probs;

  std::size_t size() const { return ids.size(); }
};

/// Reads line-delimited {id, probs[9]} records and aligns them to `d`.
/// Every dataset id must appear exactly once; values must lie in [0,1].
PredictionSet load_predictions(std::istream& in, const Dataset& d,
                               std::string model_name = "model");
PredictionSet read_predictions_file(const std::filesystem::path& path, const Dataset& d,
                                    std::string model_name = "model");

void write_predictions(std::ostream& out, const PredictionSet& p);
void write_predictions_file(const std::filesystem::path& path, const PredictionSet& p);

}  // namespace confeval
