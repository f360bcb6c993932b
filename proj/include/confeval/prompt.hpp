#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace confeval {

enum class Role { kSystem, kUser, kAssistant };

std::string to_string(Role r);

struct ChatMessage {
  Role role;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

inline constexpr std::string_view kClassifyPrefix = "Classify this incident: ";

struct FewShotExample {
  std::string_view text;
  std::string_view answer;
};

/// System instruction listing the nine categories and output rules.
std::string_view system_prompt();

/// The five fixed demonstrations, in order.
std::span<const FewShotExample> few_shot_examples();

/// System prompt, five user/assistant demonstration pairs, then the target
/// incident. Throws std::invalid_argument on empty text.
std::vector<ChatMessage> build_messages(std::string_view event_text);

}  // namespace confeval
