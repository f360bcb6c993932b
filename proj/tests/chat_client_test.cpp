#include <gtest/gtest.h>

#include <cstdlib>

#include "confeval/chat_client.hpp"
#include "support/stub_server.hpp"

using namespace confeval;
using namespace confeval::testing;

namespace {

EndpointConfig endpoint(const StubServer& s, int max_retries = 3) {
  EndpointConfig ep;
  ep.base_url = s.base_url();
  ep.model_id = "stub/model";
  ep.api_key_env = "";
  ep.max_retries = max_retries;
  ep.backoff_base_ms = 1;
  ep.timeout_ms = 5000;
  return ep;
}

const auto kMessages = build_messages("Gunmen attacked a bus.");

}  // namespace

TEST(ChatClient, EchoesContentAndUsage) {
  StubServer s([](const RequestLog&, std::size_t) { return StubReply{200, chat_body(R"({"Unknown": 1.0})", 412, 17)}; });
  const auto r = send_request(endpoint(s), kMessages);
  EXPECT_EQ(r.content, R"({"Unknown": 1.0})");
  EXPECT_EQ(r.usage.input, 412);
  EXPECT_EQ(r.usage.output, 17);
  EXPECT_EQ(r.attempts, 1);
  ASSERT_EQ(s.log().size(), 1u);
  EXPECT_EQ(s.log()[0].model, "stub/model");
  EXPECT_EQ(s.log()[0].body, request_body(endpoint(s), kMessages));
  EXPECT_EQ(s.log()[0].authorization, "");
}

TEST(ChatClient, RetriesRateLimitThenSucceeds) {
  StubServer s([](const RequestLog&, std::size_t i) {
    return i < 2 ? StubReply{429, "{}"} : StubReply{200, chat_body("{}")};
  });
  const auto r = send_request(endpoint(s), kMessages);
  EXPECT_EQ(r.attempts, 3);
  EXPECT_EQ(s.request_count(), 3u);
}

TEST(ChatClient, ExhaustsRetriesAfterExactlyMaxPlusOne) {
  StubServer s([](const RequestLog&, std::size_t) { return StubReply{500, "oops"}; });
  try {
    send_request(endpoint(s, 2), kMessages);
    FAIL();
  } catch (const RetriesExhaustedError& e) {
    EXPECT_EQ(e.attempts(), 3);
    EXPECT_EQ(e.last_status(), 500);
  }
  EXPECT_EQ(s.request_count(), 3u);
}

TEST(ChatClient, AuthFailureIsNotRetried) {
  StubServer s([](const RequestLog&, std::size_t) { return StubReply{401, "{}"}; });
  EXPECT_THROW(send_request(endpoint(s), kMessages), AuthError);
  EXPECT_EQ(s.request_count(), 1u);
}

TEST(ChatClient, OtherClientErrorsAreTypedAndNotRetried) {
  StubServer s([](const RequestLog&, std::size_t) { return StubReply{400, "{}"}; });
  try {
    send_request(endpoint(s), kMessages);
    FAIL();
  } catch (const HttpStatusError& e) {
    EXPECT_EQ(e.status(), 400);
  }
  EXPECT_EQ(s.request_count(), 1u);
}

TEST(ChatClient, MalformedBody) {
  StubServer s([](const RequestLog&, std::size_t) { return StubReply{200, "<html>"}; });
  EXPECT_THROW(send_request(endpoint(s), kMessages), MalformedResponseError);
  EXPECT_THROW(parse_chat_response(R"({"choices": []})"), MalformedResponseError);
  EXPECT_THROW(parse_chat_response(R"({"choices": [{"message": {"content": 3}}]})"), MalformedResponseError);
}

TEST(ChatClient, KeyComesFromEnvironment) {
  StubServer s([](const RequestLog&, std::size_t) { return StubReply{200, chat_body("{}")}; });
  auto ep = endpoint(s);
  ep.api_key_env = "CONFEVAL_TEST_KEY_UNSET";
  ::unsetenv("CONFEVAL_TEST_KEY_UNSET");
  EXPECT_THROW(send_request(ep, kMessages), AuthError);
  EXPECT_EQ(s.request_count(), 0u);
  ::setenv("CONFEVAL_TEST_KEY_SET", "sk-test", 1);
  ep.api_key_env = "CONFEVAL_TEST_KEY_SET";
  send_request(ep, kMessages);
  EXPECT_EQ(s.log().back().authorization, "Bearer sk-test");
}

TEST(ChatClient, TransportErrorsRetryThenExhaust) {
  EndpointConfig ep;
  ep.base_url = "http://127.0.0.1:1/v1";  // nothing listens on port 1
  ep.model_id = "m";
  ep.api_key_env = "";
  ep.max_retries = 1;
  ep.backoff_base_ms = 1;
  ep.timeout_ms = 1000;
  try {
    send_request(ep, kMessages);
    FAIL();
  } catch (const RetriesExhaustedError& e) {
    EXPECT_EQ(e.attempts(), 2);
    EXPECT_EQ(e.last_status(), 0);
  }
}

TEST(ChatClient, BackoffDoublesAndCaps) {
  EndpointConfig ep;
  ep.backoff_base_ms = 500;
  ep.backoff_max_ms = 3000;
  EXPECT_EQ(backoff_delay_ms(ep, 1), 500);
  EXPECT_EQ(backoff_delay_ms(ep, 2), 1000);
  EXPECT_EQ(backoff_delay_ms(ep, 3), 2000);
  EXPECT_EQ(backoff_delay_ms(ep, 4), 3000);
  EXPECT_EQ(backoff_delay_ms(ep, 40), 3000);
}

TEST(ChatClient, BeforeAttemptHookRunsEachAttempt) {
  StubServer s([](const RequestLog&, std::size_t i) {
    return i == 0 ? StubReply{503, ""} : StubReply{200, chat_body("{}")};
  });
  int calls = 0;
  send_request(endpoint(s), kMessages, [&] { ++calls; });
  EXPECT_EQ(calls, 2);
}

TEST(ChatClient, UrlWithoutSchemeIsInputError) {
  EndpointConfig ep;
  ep.base_url = "localhost/v1";
  ep.api_key_env = "";
  EXPECT_THROW(send_request(ep, kMessages), InputError);
}
