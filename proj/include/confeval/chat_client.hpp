#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "confeval/errors.hpp"
#include "confeval/prompt.hpp"

namespace confeval {

/// One chat-completions endpoint. Sampling defaults are the fixed zero-shot
/// configuration: temperature 0, max_tokens 150, top_p 1.
struct EndpointConfig {
  std::string base_url = "https://openrouter.ai/api/v1";
  std::string model_id;
  std::string api_key_env = "OPENROUTER_API_KEY";  // empty: send no Authorization header
  double temperature = 0.0;
  int max_tokens = 150;
  double top_p = 1.0;
  int max_retries = 3;
  int backoff_base_ms = 500;
  int backoff_max_ms = 30000;
  double rate_limit = 0.0;  // requests per second; 0 disables limiting
  int timeout_ms = 60000;
};

struct TokenUsage {
  std::int64_t input = 0;
  std::int64_t output = 0;
};

struct ChatResponse {
  std::string content;
  TokenUsage usage;
  int attempts = 0;
};

/// Base for request failures; carries the number of attempts made.
class RequestError : public RuntimeFailure {
 public:
  RequestError(const std::string& what, int attempts) : RuntimeFailure(what), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

/// 401/403 or a missing key. Never retried.
class AuthError : public RequestError {
 public:
  using RequestError::RequestError;
};

/// Transient failures (429, 5xx, timeouts, connection errors) persisted
/// through every retry.
class RetriesExhaustedError : public RequestError {
 public:
  RetriesExhaustedError(const std::string& what, int attempts, int last_status)
      : RequestError(what, attempts), last_status_(last_status) {}
  int last_status() const { return last_status_; }  // 0 for transport errors

 private:
  int last_status_;
};

/// 2xx body that is not a chat-completions response.
class MalformedResponseError : public RequestError {
 public:
  using RequestError::RequestError;
};

/// Non-retryable HTTP status other than auth failures.
class HttpStatusError : public RequestError {
 public:
  HttpStatusError(const std::string& what, int attempts, int status)
      : RequestError(what, attempts), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

/// Serialized request body. Byte-stable for fixed inputs.
std::string request_body(const EndpointConfig& endpoint, std::span<const ChatMessage> messages);

/// Content of choices[0].message.content plus reported usage.
ChatResponse parse_chat_response(const std::string& body);

/// Delay before retry number `retry` (1-based): base * 2^(retry-1), capped.
int backoff_delay_ms(const EndpointConfig& endpoint, int retry);

/// POSTs to <base_url>/chat/completions, retrying transient failures with
/// exponential backoff up to max_retries (so at most max_retries + 1 attempts).
/// `before_attempt` runs ahead of every HTTP attempt (rate limiting hook).
ChatResponse send_request(const EndpointConfig& endpoint, std::span<const ChatMessage> messages,
                          const std::function<void()>& before_attempt = {});

}  // namespace confeval
