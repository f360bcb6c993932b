#include "confeval/labels.hpp"

namespace confeval {

std::optional<AttackLabel> parse_label(std::string_view text) {
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    if (kLabelNames[i] == text) return label_at(i);
  }
  return std::nullopt;
}

std::string label_name(std::size_t index) {
  if (index < kNumLabels) return std::string(kLabelNames[index]);
  return "label_" + std::to_string(index);
}

std::vector<AttackLabel> to_labels(const LabelSet& set) {
  std::vector<AttackLabel> out;
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    if (set.test(i)) out.push_back(label_at(i));
  }
  return out;
}

}  // namespace confeval
