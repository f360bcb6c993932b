#include "confeval/prompt.hpp"

#include <array>
#include <stdexcept>

namespace confeval {

namespace {

constexpr std::string_view kSystemPrompt =
    "You are an expert conflict event classifier trained on the Global Terrorism Database "
    "(GTD). Your task is to classify incident descriptions into attack type categories.\n"
    "\n"
    "You MUST classify each incident into exactly the categories from this list:\n"
    "1. Assassination\n"
    "2. Armed Assault\n"
    "3. Bombing/Explosion\n"
    "4. Hijacking\n"
    "5. Hostage Taking (Barricade Incident)\n"
    "6. Hostage Taking (Kidnapping)\n"
    "7. Facility/Infrastructure Attack\n"
    "8. Unarmed Assault\n"
    "9. Unknown\n"
    "\n"
    "Rules:\n"
    "- Output ONLY a valid JSON object mapping category names to probability scores.\n"
    "- Each probability must be between 0.0 and 1.0; probabilities must sum to 1.0.\n"
    "- Use ONLY category names from the list above (exact spelling and capitalization).\n"
    "- An incident may involve multiple attack types. Assign probability mass accordingly.\n"
    "- If the description is vague or unclear, use the \"Unknown\" category.\n"
    "- Do NOT include any explanation, only the JSON object.";

constexpr std::array<FewShotExample, 5> kExamples = {{
    {"01/15/2018: Assailants detonated a vehicle-borne IED near a government checkpoint in "
     "Kabul, Afghanistan. At least 95 people were killed and 158 wounded. The Taliban claimed "
     "responsibility.",
     R"j({"Bombing/Explosion": 1.0})j"},
    {"03/22/2017: Gunmen opened fire on unarmed civilians at a marketplace in Maiduguri, "
     "Nigeria, killing twelve. The attackers fled on motorcycles. Boko Haram was suspected.",
     R"j({"Assassination": 0.4, "Armed Assault": 0.6})j"},
    {"06/10/2019: Assailants abducted four foreign aid workers from their vehicle near the "
     "border region of Mali. The hostages were held for ransom.",
     R"j({"Hostage Taking (Kidnapping)": 1.0})j"},
    {"09/05/2017: Unknown assailants set fire to a telecommunications tower and destroyed "
     "electrical transformers in rural Colombia. The ELN was suspected.",
     R"j({"Facility/Infrastructure Attack": 1.0})j"},
    {"11/28/2018: Armed militants stormed a hotel in Nairobi, Kenya, taking hostages and "
     "detonating explosives in the lobby. Security forces responded and a prolonged siege "
     "ensued. At least 21 killed. Al-Shabaab claimed responsibility.",
     R"j({"Bombing/Explosion": 0.3, "Armed Assault": 0.3, "Hostage Taking (Barricade Incident)": 0.4})j"},
}};

}  // namespace

std::string to_string(Role r) {
  switch (r) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

std::string_view system_prompt() { return kSystemPrompt; }

std::span<const FewShotExample> few_shot_examples() { return kExamples; }

std::vector<ChatMessage> build_messages(std::string_view event_text) {
  if (event_text.empty()) throw std::invalid_argument("cannot classify an empty incident text");
  std::vector<ChatMessage> messages;
  messages.reserve(2 + 2 * kExamples.size());
  messages.push_back({Role::kSystem, std::string(kSystemPrompt)});
  for (const auto& ex : kExamples) {
    messages.push_back({Role::kUser, std::string(kClassifyPrefix) + std::string(ex.text)});
    messages.push_back({Role::kAssistant, std::string(ex.answer)});
  }
  messages.push_back({Role::kUser, std::string(kClassifyPrefix) + std::string(event_text)});
  return messages;
}

}  // namespace confeval
