#include "confeval/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "confeval/weights_loss.hpp"

namespace confeval {

using nlohmann::json;

std::string to_string(DistributionErrorKind k) {
  switch (k) {
    case DistributionErrorKind::kNoJsonObject: return "no_json_object";
    case DistributionErrorKind::kInvalidJson: return "invalid_json";
    case DistributionErrorKind::kNoRecognizedKey: return "no_recognized_key";
    case DistributionErrorKind::kUnknownKey: return "unknown_key";
    case DistributionErrorKind::kZeroMass: return "zero_mass";
    case DistributionErrorKind::kMassOutOfTolerance: return "mass_out_of_tolerance";
  }
  return "unknown";
}

namespace {

// Top-level balanced {...} spans, honoring JSON string literals and escapes.
std::vector<std::string_view> balanced_spans(std::string_view s) {
  std::vector<std::string_view> spans;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto open = s.find('{', i);
    if (open == std::string_view::npos) break;
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    std::size_t k = open;
    for (; k < s.size(); ++k) {
      const char c = s[k];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) break;
      }
    }
    if (k >= s.size()) break;  // unbalanced tail
    spans.push_back(s.substr(open, k - open + 1));
    i = k + 1;
  }
  return spans;
}

std::optional<json> first_object(std::string_view raw, bool& saw_span) {
  const auto spans = balanced_spans(raw);
  saw_span = !spans.empty();
  for (auto span : spans) {
    json j = json::parse(span.begin(), span.end(), nullptr, /*allow_exceptions=*/false);
    if (j.is_object()) return j;
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::string_view> extract_json_object(std::string_view raw) {
  for (auto span : balanced_spans(raw)) {
    json j = json::parse(span.begin(), span.end(), nullptr, false);
    if (j.is_object()) return span;
  }
  return std::nullopt;
}

ParsedDistribution parse_distribution(std::string_view raw, const ParseOptions& options) {
  bool saw_span = false;
  const auto obj = first_object(raw, saw_span);
  if (!obj) {
    if (saw_span) {
      throw DistributionError(DistributionErrorKind::kInvalidJson,
                              "reply contains braces but no valid JSON object");
    }
    throw DistributionError(DistributionErrorKind::kNoJsonObject, "no JSON object in reply");
  }

  ParsedDistribution d;
  bool recognized = false;
  for (const auto& [key, value] : obj->items()) {
    const auto label = parse_label(key);
    if (!label || !value.is_number()) {
      if (options.strict) {
        throw DistributionError(DistributionErrorKind::kUnknownKey,
                                "unexpected key '" + key + "' in reply");
      }
      continue;
    }
    const double v = value.get<double>();
    d.probs[index_of(*label)] = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
    recognized = true;
  }
  if (!recognized) {
    throw DistributionError(DistributionErrorKind::kNoRecognizedKey,
                            "reply names none of the nine categories");
  }

  double sum = 0.0;
  for (double p : d.probs) sum += p;
  d.raw_sum = sum;
  if (sum == 0.0) {
    throw DistributionError(DistributionErrorKind::kZeroMass, "reply assigns zero total mass");
  }
  // The slack keeps decimal edge cases such as 0.7 + 0.2 inside a 0.10 band.
  if (std::abs(sum - 1.0) > options.renorm_tolerance + 1e-12) {
    throw DistributionError(DistributionErrorKind::kMassOutOfTolerance,
                            "probabilities sum to " + std::to_string(sum));
  }
  for (double& p : d.probs) p /= sum;
  d.was_renormalized = std::abs(sum - 1.0) > 1e-9;
  return d;
}

std::string to_string(BinarizeMode m) {
  switch (m) {
    case BinarizeMode::kThreshold: return "threshold";
    case BinarizeMode::kArgmax: return "argmax";
    case BinarizeMode::kHybrid: return "hybrid";
  }
  return "hybrid";
}

BinarizeMode parse_binarize_mode(std::string_view s) {
  if (s == "threshold") return BinarizeMode::kThreshold;
  if (s == "argmax") return BinarizeMode::kArgmax;
  if (s == "hybrid") return BinarizeMode::kHybrid;
  throw InputError("unknown binarization mode '" + std::string(s) +
                   "' (expected threshold|argmax|hybrid)");
}

LabelSet distribution_to_labels(std::span<const double> probs, BinarizeMode mode, double tau) {
  check_threshold(tau);
  if (probs.size() != kNumLabels) throw std::invalid_argument("expected 9 probabilities");
  LabelSet out;
  auto argmax = [&] {
    std::size_t best = 0;
    for (std::size_t j = 1; j < probs.size(); ++j) {
      if (probs[j] > probs[best]) best = j;
    }
    LabelSet s;
    if (probs[best] > 0.0) s.set(best);
    return s;
  };
  auto threshold = [&] {
    LabelSet s;
    for (std::size_t j = 0; j < probs.size(); ++j) s.set(j, probs[j] >= tau);
    return s;
  };
  switch (mode) {
    case BinarizeMode::kThreshold: out = threshold(); break;
    case BinarizeMode::kArgmax: out = argmax(); break;
    case BinarizeMode::kHybrid:
      out = threshold();
      if (out.none()) out = argmax();
      break;
  }
  return out;
}

LabelMatrix binarize(const ProbabilityMatrix& probs, BinarizeMode mode, double tau) {
  if (probs.cols() != static_cast<Eigen::Index>(kNumLabels)) {
    throw std::invalid_argument("expected 9 probability columns");
  }
  LabelMatrix out(probs.rows(), probs.cols());
  std::array<double, kNumLabels> row{};
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    for (Eigen::Index j = 0; j < probs.cols(); ++j) row[static_cast<std::size_t>(j)] = probs(i, j);
    const auto set = distribution_to_labels(row, mode, tau);
    for (Eigen::Index j = 0; j < probs.cols(); ++j) out(i, j) = set.test(static_cast<std::size_t>(j));
  }
  return out;
}

}  // namespace confeval
