#include "confeval/chat_client.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace confeval {

using nlohmann::json;

std::string request_body(const EndpointConfig& endpoint, std::span<const ChatMessage> messages) {
  json msgs = json::array();
  for (const auto& m : messages) msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  json body = {{"model", endpoint.model_id},
               {"messages", msgs},
               {"temperature", endpoint.temperature},
               {"max_tokens", endpoint.max_tokens},
               {"top_p", endpoint.top_p}};
  return body.dump();
}

ChatResponse parse_chat_response(const std::string& body) {
  const json j = json::parse(body, nullptr, false);
  if (!j.is_object()) throw MalformedResponseError("response body is not a JSON object", 0);
  const auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) {
    throw MalformedResponseError("response has no choices", 0);
  }
  const auto& first = (*choices)[0];
  if (!first.is_object() || !first.contains("message") || !first["message"].is_object()) {
    throw MalformedResponseError("choices[0] has no message", 0);
  }
  const auto& msg = first["message"];
  ChatResponse r;
  if (msg.contains("content") && msg["content"].is_string()) {
    r.content = msg["content"].get<std::string>();
  } else if (!msg.contains("content") || !msg["content"].is_null()) {
    throw MalformedResponseError("choices[0].message.content is not a string", 0);
  }
  if (j.contains("usage") && j["usage"].is_object()) {
    const auto& u = j["usage"];
    if (u.contains("prompt_tokens") && u["prompt_tokens"].is_number_integer()) {
      r.usage.input = u["prompt_tokens"].get<std::int64_t>();
    }
    if (u.contains("completion_tokens") && u["completion_tokens"].is_number_integer()) {
      r.usage.output = u["completion_tokens"].get<std::int64_t>();
    }
  }
  return r;
}

int backoff_delay_ms(const EndpointConfig& endpoint, int retry) {
  const int shift = std::clamp(retry - 1, 0, 30);
  const long long delay = static_cast<long long>(endpoint.backoff_base_ms) << shift;
  return static_cast<int>(std::min<long long>(delay, endpoint.backoff_max_ms));
}

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& base_url) {
  const auto scheme = base_url.find("://");
  if (scheme == std::string::npos) throw InputError("endpoint URL lacks a scheme: " + base_url);
  const auto slash = base_url.find('/', scheme + 3);
  SplitUrl out;
  out.origin = base_url.substr(0, slash);
  std::string path = slash == std::string::npos ? "" : base_url.substr(slash);
  while (!path.empty() && path.back() == '/') path.pop_back();
  constexpr std::string_view kSuffix = "/chat/completions";
  if (path.size() < kSuffix.size() ||
      path.compare(path.size() - kSuffix.size(), kSuffix.size(), kSuffix) != 0) {
    path += kSuffix;
  }
  out.path = path;
  return out;
}

bool is_transient(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

ChatResponse send_request(const EndpointConfig& endpoint, std::span<const ChatMessage> messages,
                          const std::function<void()>& before_attempt) {
  const auto url = split_url(endpoint.base_url);
  httplib::Headers headers;
  if (!endpoint.api_key_env.empty()) {
    const char* key = std::getenv(endpoint.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw AuthError("API key environment variable '" + endpoint.api_key_env + "' is not set", 0);
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const std::string body = request_body(endpoint, messages);

  httplib::Client client(url.origin);
  const auto timeout = std::chrono::milliseconds(endpoint.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  int last_status = 0;
  std::string last_error;
  const int max_attempts = std::max(0, endpoint.max_retries) + 1;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_delay_ms(endpoint, attempt - 1)));
    }
    if (before_attempt) before_attempt();
    auto res = client.Post(url.path, headers, body, "application/json");
    if (!res) {
      last_status = 0;
      last_error = httplib::to_string(res.error());
      continue;
    }
    const int status = res->status;
    if (status >= 200 && status < 300) {
      try {
        auto parsed = parse_chat_response(res->body);
        parsed.attempts = attempt;
        return parsed;
      } catch (const MalformedResponseError& e) {
        throw MalformedResponseError(e.what(), attempt);
      }
    }
    if (status == 401 || status == 403) {
      throw AuthError("authentication rejected (HTTP " + std::to_string(status) + ") by " +
                          url.origin,
                      attempt);
    }
    if (!is_transient(status)) {
      throw HttpStatusError("HTTP " + std::to_string(status) + " from " + url.origin, attempt,
                            status);
    }
    last_status = status;
    last_error = "HTTP " + std::to_string(status);
  }
  throw RetriesExhaustedError("giving up after " + std::to_string(max_attempts) +
                                  " attempts: " + last_error,
                              max_attempts, last_status);
}

}  // namespace confeval
