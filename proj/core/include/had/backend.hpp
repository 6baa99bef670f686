#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

#include "had/agents.hpp"

namespace had {

struct TokenUsage {
  long prompt_tokens = 0;
  long completion_tokens = 0;
  long total_tokens = 0;
};

/// One chat-completion request. `tag` is a free-form label used for logging
/// and fixture lookup; the pipeline writes "<message id>/<role>" tags such as
/// "msg-17/A2" or "msg-17/summative".
struct CompletionRequest {
  std::string model;
  PromptText prompt;
  double temperature = 0.0;
  int max_tokens = 256;
  std::string tag;
};

/// Throws std::invalid_argument when temperature or max_tokens are out of range.
void validate(const CompletionRequest& request);

struct CompletionResult {
  std::string text;  // raw, unparsed model output
  TokenUsage usage;
  std::chrono::milliseconds latency{0};
  bool from_cache = false;
};

class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or missing credential, or the server rejected ours.
class AuthError : public BackendError {
 public:
  using BackendError::BackendError;
};

/// Connection problems or retryable statuses after retries were exhausted.
class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
};

/// The server answered but the body was not a usable completion.
class ProtocolError : public BackendError {
 public:
  using BackendError::BackendError;
};

/// The scripted backend has no response for this request.
class MissingFixtureError : public BackendError {
 public:
  using BackendError::BackendError;
};

class Backend {
 public:
  virtual ~Backend() = default;

  virtual CompletionResult complete(const CompletionRequest& request) = 0;

  /// Stable identity, mixed into cache keys so responses from different
  /// backends never alias.
  virtual std::string id() const = 0;
};

/// Content address of a completion request: SHA-256 over the canonical
/// serialization of (backend id, model, temperature, max_tokens, system
/// text, user text).
struct CacheKey {
  std::string hex;

  friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

CacheKey cache_key(const std::string& backend_id, const CompletionRequest& request);

/// Deterministic completion source driven by fixtures; performs no I/O
/// beyond reading its fixture file. Lookup order: request digest first, then
/// the (message id, role) pair split off the request tag at its first '/'.
/// Unknown requests raise MissingFixtureError.
class ScriptedBackend final : public Backend {
 public:
  ScriptedBackend() = default;

  /// Loads a fixture file:
  ///   {"by_digest": {"<hex>": "reply"},
  ///    "by_tag": {"<message id>": {"<role>": "reply"}}}
  static std::shared_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);
  void load_file(const std::filesystem::path& path);

  void add_by_digest(std::string digest, std::string text);
  void add_by_tag(const std::string& message_id, const std::string& role,
                  std::string text);

  CompletionResult complete(const CompletionRequest& request) override;
  std::string id() const override { return "scripted"; }

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::string> by_digest_;
  std::map<std::string, std::map<std::string, std::string>> by_tag_;
};

/// Wrapper counting complete() calls; the evaluation harness and tests use
/// it to assert call budgets and warm-cache behavior.
class CountingBackend final : public Backend {
 public:
  explicit CountingBackend(std::shared_ptr<Backend> inner) : inner_(std::move(inner)) {}

  CompletionResult complete(const CompletionRequest& request) override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return inner_->complete(request);
  }
  std::string id() const override { return inner_->id(); }

  long calls() const { return calls_.load(std::memory_order_relaxed); }
  void reset() { calls_.store(0, std::memory_order_relaxed); }

 private:
  std::shared_ptr<Backend> inner_;
  std::atomic<long> calls_{0};
};

}  // namespace had
