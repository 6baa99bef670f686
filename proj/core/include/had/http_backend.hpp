#pragma once

#include <atomic>
#include <chrono>
#include <mutex>
#include <string>

#include "had/backend.hpp"

namespace had {

struct RetryPolicy {
  int max_retries = 3;  // retries after the first attempt
  std::chrono::milliseconds base_delay{250};
  std::chrono::milliseconds max_delay{8000};
};

/// Client-side pacing: blocks callers so requests leave at most
/// `requests_per_second` apart. 0 disables pacing. Thread-safe.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_second = 0.0);
  void acquire();

 private:
  std::chrono::nanoseconds interval_{0};
  std::mutex mutex_;
  std::chrono::steady_clock::time_point next_slot_{};
};

struct HttpBackendOptions {
  /// Base URL of a chat-completions server, e.g. "https://api.openai.com/v1"
  /// or "http://127.0.0.1:8000/v1". "/chat/completions" is appended unless
  /// already present.
  std::string endpoint;
  /// Name of the environment variable holding the API key; empty means the
  /// server needs no credential (local deployments).
  std::string credential_env = "OPENAI_API_KEY";
  RetryPolicy retry;
  double requests_per_second = 0.0;
  std::chrono::milliseconds timeout{30000};
};

/// Chat-completions client over HTTP(S). Sends the de-facto JSON wire format
/// (messages array with optional system role) and retries transient failures
/// (connect errors, timeouts, 429, 5xx) with exponential backoff, honoring a
/// numeric Retry-After header when present.
class HttpBackend final : public Backend {
 public:
  /// Throws AuthError when `credential_env` is set but the variable is
  /// missing or empty.
  explicit HttpBackend(HttpBackendOptions options);

  CompletionResult complete(const CompletionRequest& request) override;
  std::string id() const override;

  /// Total HTTP attempts made, including retried ones.
  long attempts() const { return attempts_.load(std::memory_order_relaxed); }

 private:
  HttpBackendOptions options_;
  std::string host_;  // scheme://authority
  std::string path_;  // /prefix/chat/completions
  std::string api_key_;
  RateLimiter limiter_;
  std::atomic<long> attempts_{0};
};

}  // namespace had
