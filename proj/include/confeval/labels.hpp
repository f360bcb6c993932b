#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace confeval {

// GTD attack types. Underlying values are the stable label indices used by
// every matrix column and every JSONL probability vector.
enum class AttackLabel : std::uint8_t {
  kAssassination = 0,
  kArmedAssault = 1,
  kBombingExplosion = 2,
  kHijacking = 3,
  kHostageBarricade = 4,
  kHostageKidnapping = 5,
  kFacilityInfrastructure = 6,
  kUnarmedAssault = 7,
  kUnknown = 8,
};

inline constexpr std::size_t kNumLabels = 9;

inline constexpr std::array<std::string_view, kNumLabels> kLabelNames = {
    "Assassination",
    "Armed Assault",
    "Bombing/Explosion",
    "Hijacking",
    "Hostage Taking (Barricade Incident)",
    "Hostage Taking (Kidnapping)",
    "Facility/Infrastructure Attack",
    "Unarmed Assault",
    "Unknown",
};

inline constexpr std::array<AttackLabel, kNumLabels> kAllLabels = {
    AttackLabel::kAssassination,      AttackLabel::kArmedAssault,
    AttackLabel::kBombingExplosion,   AttackLabel::kHijacking,
    AttackLabel::kHostageBarricade,   AttackLabel::kHostageKidnapping,
    AttackLabel::kFacilityInfrastructure, AttackLabel::kUnarmedAssault,
    AttackLabel::kUnknown,
};

// Gold or predicted label set; bit i corresponds to label index i.
using LabelSet = std::bitset<kNumLabels>;

constexpr std::size_t index_of(AttackLabel label) {
  return static_cast<std::size_t>(label);
}

constexpr AttackLabel label_at(std::size_t index) {
  return static_cast<AttackLabel>(index);
}

constexpr std::string_view to_string(AttackLabel label) {
  return kLabelNames[index_of(label)];
}

// Exact, case-sensitive match against the canonical display strings.
std::optional<AttackLabel> parse_label(std::string_view text);

// Display name for a label index; falls back to "label_<i>" outside 0..8 so
// that reports over narrower synthetic label universes stay printable.
std::string label_name(std::size_t index);

std::vector<AttackLabel> to_labels(const LabelSet& set);

}  // namespace confeval
