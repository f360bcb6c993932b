#include <gtest/gtest.h>

#include <json.hpp>

#include "confeval/chat_client.hpp"
#include "confeval/distribution.hpp"
#include "confeval/prompt.hpp"

using namespace confeval;

TEST(Prompt, MessageLayout) {
  const auto m = build_messages("A bomb exploded.");
  ASSERT_EQ(m.size(), 12u);
  EXPECT_EQ(m[0].role, Role::kSystem);
  for (std::size_t i = 1; i < 11; i += 2) {
    EXPECT_EQ(m[i].role, Role::kUser);
    EXPECT_EQ(m[i + 1].role, Role::kAssistant);
    EXPECT_EQ(m[i].content.rfind(kClassifyPrefix, 0), 0u);
  }
  EXPECT_EQ(m[2].content, R"({"Bombing/Explosion": 1.0})");
  EXPECT_EQ(m.back().role, Role::kUser);
  EXPECT_EQ(m.back().content, "Classify this incident: A bomb exploded.");
  for (const auto& msg : m) {
    EXPECT_FALSE(msg.content.empty());
  }
}

TEST(Prompt, SystemPromptListsEveryCategory) {
  const auto s = system_prompt();
  for (auto name : kLabelNames) EXPECT_NE(s.find(name), std::string_view::npos) << name;
  EXPECT_NE(s.find("Output ONLY a valid JSON object"), std::string_view::npos);
}

TEST(Prompt, DemonstrationAnswersAreValidDistributions) {
  for (const auto& ex : few_shot_examples()) {
    const auto d = parse_distribution(ex.answer, {.strict = true});
    EXPECT_FALSE(d.was_renormalized);
    EXPECT_NEAR(d.raw_sum, 1.0, 1e-12);
  }
}

TEST(Prompt, DeterministicAndByteStable) {
  const auto a = build_messages("Gunmen attacked a village.");
  const auto b = build_messages("Gunmen attacked a village.");
  EXPECT_EQ(a, b);
  EndpointConfig ep;
  ep.model_id = "m";
  EXPECT_EQ(request_body(ep, a), request_body(ep, b));
}

TEST(Prompt, EmptyTextRejected) { EXPECT_THROW(build_messages(""), std::invalid_argument); }

TEST(RequestBody, CarriesSamplingDefaults) {
  EndpointConfig ep;
  ep.model_id = "vendor/model";
  const auto j = nlohmann::json::parse(request_body(ep, build_messages("x")));
  EXPECT_EQ(j["model"], "vendor/model");
  EXPECT_EQ(j["temperature"], 0.0);
  EXPECT_EQ(j["max_tokens"], 150);
  EXPECT_EQ(j["top_p"], 1.0);
  EXPECT_EQ(j["messages"].size(), 12u);
  EXPECT_EQ(j["messages"][0]["role"], "system");
  EXPECT_EQ(j["messages"][11]["content"], "Classify this incident: x");
}
