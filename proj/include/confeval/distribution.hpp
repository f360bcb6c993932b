#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "confeval/errors.hpp"
#include "confeval/labels.hpp"
#include "confeval/types.hpp"

namespace confeval {

/// Probability distribution over the nine labels recovered from a model
/// reply. Entries are non-negative and sum to one.
struct ParsedDistribution {
  std::array<double, kNumLabels> probs{};
  double raw_sum = 0.0;
  bool was_renormalized = false;
};

enum class DistributionErrorKind {
  kNoJsonObject,     // no balanced {...} span in the reply
  kInvalidJson,      // braces found but nothing parsed as a JSON object
  kNoRecognizedKey,  // object has no canonical label key with a numeric value
  kUnknownKey,       // strict mode: a key outside the label universe
  kZeroMass,         // recognized keys sum to zero
  kMassOutOfTolerance,
};

std::string to_string(DistributionErrorKind k);

class DistributionError : public InputError {
 public:
  DistributionError(DistributionErrorKind kind, const std::string& what)
      : InputError(what), kind_(kind) {}
  DistributionErrorKind kind() const { return kind_; }

 private:
  DistributionErrorKind kind_;
};

struct ParseOptions {
  bool strict = false;
  double renorm_tolerance = 0.05;  // |sum - 1| beyond this is a parse failure
};

/// Extracts the first balanced {...} span that parses as a JSON object
/// (code fences and surrounding prose are ignored), matches keys exactly
/// against the canonical labels, clamps values to [0,1] and renormalizes
/// when the total is within tolerance of one. Throws DistributionError.
ParsedDistribution parse_distribution(std::string_view raw, const ParseOptions& options = {});

/// Returns the candidate JSON object text, if any.
std::optional<std::string_view> extract_json_object(std::string_view raw);

enum class BinarizeMode { kThreshold, kArgmax, kHybrid };

std::string to_string(BinarizeMode m);
BinarizeMode parse_binarize_mode(std::string_view s);

/// threshold: p >= tau. argmax: the single largest entry, lowest index on
/// ties. hybrid: threshold, falling back to argmax when nothing passes.
/// An all-zero row (failed reply) binarizes to the empty set in every mode.
LabelSet distribution_to_labels(std::span<const double> probs,
                                BinarizeMode mode = BinarizeMode::kHybrid, double tau = 0.5);

/// Row-wise distribution_to_labels over a probability matrix.
LabelMatrix binarize(const ProbabilityMatrix& probs, BinarizeMode mode, double tau = 0.5);

}  // namespace confeval
