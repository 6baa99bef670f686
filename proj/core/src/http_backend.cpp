#include "had/http_backend.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"

namespace had {

RateLimiter::RateLimiter(double requests_per_second) {
  if (requests_per_second > 0.0) {
    interval_ = std::chrono::nanoseconds(
        static_cast<long long>(1e9 / requests_per_second));
  }
}

void RateLimiter::acquire() {
  if (interval_.count() == 0) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mutex_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_slot_);
    next_slot_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

namespace {

constexpr const char* kCompletionsPath = "/chat/completions";

bool retryable_status(int status) {
  return status == 429 || status == 408 || status >= 500;
}

std::chrono::milliseconds backoff_delay(const RetryPolicy& retry, int attempt,
                                        const std::string& retry_after_header) {
  if (!retry_after_header.empty()) {
    char* end = nullptr;
    const double seconds = std::strtod(retry_after_header.c_str(), &end);
    if (end != retry_after_header.c_str() && seconds >= 0) {
      const auto from_header =
          std::chrono::milliseconds(static_cast<long long>(seconds * 1000.0));
      return std::min(from_header, retry.max_delay);
    }
  }
  auto delay = retry.base_delay * (1LL << std::min(attempt, 16));
  return std::min(std::chrono::milliseconds(delay), retry.max_delay);
}

std::string extract_server_message(const std::string& body) {
  try {
    const auto doc = nlohmann::json::parse(body);
    if (doc.contains("error")) {
      const auto& err = doc.at("error");
      if (err.is_object()) return err.value("message", "");
      if (err.is_string()) return err.get<std::string>();
    }
  } catch (const nlohmann::json::exception&) {
  }
  return {};
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendOptions options)
    : options_(std::move(options)), limiter_(options_.requests_per_second) {
  if (!options_.credential_env.empty()) {
    const char* key = std::getenv(options_.credential_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw AuthError("credential environment variable " + options_.credential_env +
                      " is not set");
    }
    api_key_ = key;
  }

  std::string url = options_.endpoint;
  while (!url.empty() && url.back() == '/') url.pop_back();
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("endpoint must include a scheme: " + options_.endpoint);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    host_ = url;
    path_ = kCompletionsPath;
  } else {
    host_ = url.substr(0, path_start);
    path_ = url.substr(path_start);
    if (!path_.ends_with(kCompletionsPath)) path_ += kCompletionsPath;
  }
}

std::string HttpBackend::id() const { return "http:" + host_ + path_; }

CompletionResult HttpBackend::complete(const CompletionRequest& request) {
  validate(request);

  nlohmann::json messages = nlohmann::json::array();
  if (request.prompt.system && !request.prompt.system->empty()) {
    messages.push_back({{"role", "system"}, {"content", *request.prompt.system}});
  }
  messages.push_back({{"role", "user"}, {"content", request.prompt.user}});
  const std::string body = nlohmann::json{{"model", request.model},
                                          {"messages", messages},
                                          {"temperature", request.temperature},
                                          {"max_tokens", request.max_tokens}}
                               .dump();

  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  const auto started = std::chrono::steady_clock::now();
  std::string last_error;
  const int total_attempts = options_.retry.max_retries + 1;

  for (int attempt = 0; attempt < total_attempts; ++attempt) {
    limiter_.acquire();
    attempts_.fetch_add(1, std::memory_order_relaxed);

    httplib::Client client(host_);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(
        options_.timeout));
    client.set_read_timeout(options_.timeout);
    client.set_write_timeout(options_.timeout);

    auto response = client.Post(path_, headers, body, "application/json");

    std::string retry_after;
    if (!response) {
      last_error = "transport failure: " + httplib::to_string(response.error());
    } else if (response->status == 401 || response->status == 403) {
      std::string message = extract_server_message(response->body);
      throw AuthError("authentication rejected (HTTP " +
                      std::to_string(response->status) + ")" +
                      (message.empty() ? "" : ": " + message));
    } else if (response->status >= 200 && response->status < 300) {
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(response->body);
      } catch (const nlohmann::json::exception& ex) {
        throw ProtocolError(std::string("malformed completion body: ") + ex.what());
      }
      if (!doc.contains("choices") || !doc.at("choices").is_array() ||
          doc.at("choices").empty()) {
        throw ProtocolError("completion body has no choices");
      }
      const auto& choice = doc.at("choices").at(0);
      std::string text;
      if (choice.contains("message") && choice.at("message").contains("content") &&
          choice.at("message").at("content").is_string()) {
        text = choice.at("message").at("content").get<std::string>();
      } else if (choice.contains("text") && choice.at("text").is_string()) {
        text = choice.at("text").get<std::string>();
      } else {
        throw ProtocolError("completion choice carries no content");
      }
      TokenUsage usage;
      if (doc.contains("usage")) {
        const auto& u = doc.at("usage");
        usage.prompt_tokens = u.value("prompt_tokens", 0L);
        usage.completion_tokens = u.value("completion_tokens", 0L);
        usage.total_tokens = u.value("total_tokens", 0L);
      }
      const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - started);
      return {std::move(text), usage, latency, false};
    } else if (retryable_status(response->status)) {
      last_error = "HTTP " + std::to_string(response->status);
      retry_after = response->get_header_value("Retry-After");
    } else {
      std::string message = extract_server_message(response->body);
      throw ProtocolError("unexpected HTTP " + std::to_string(response->status) +
                          (message.empty() ? "" : ": " + message));
    }

    if (attempt + 1 < total_attempts) {
      std::this_thread::sleep_for(
          backoff_delay(options_.retry, attempt, retry_after));
    }
  }

  throw TransportError("request '" + request.tag + "' failed after " +
                       std::to_string(total_attempts) + " attempts (" + last_error +
                       ")");
}

}  // namespace had
