#include "had/backend.hpp"

#include <fstream>

#include "had/detail/sha256.hpp"
#include "json.hpp"

namespace had {

void validate(const CompletionRequest& request) {
  if (request.temperature < 0.0) {
    throw std::invalid_argument("temperature must be >= 0");
  }
  if (request.max_tokens < 1) {
    throw std::invalid_argument("max_tokens must be >= 1");
  }
}

CacheKey cache_key(const std::string& backend_id, const CompletionRequest& request) {
  nlohmann::json canonical{
      {"backend", backend_id},
      {"model", request.model},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens},
      {"system", request.prompt.system.value_or("")},
      {"user", request.prompt.user},
  };
  return CacheKey{detail::sha256_hex(canonical.dump())};
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(
    const std::filesystem::path& path) {
  auto backend = std::make_shared<ScriptedBackend>();
  backend->load_file(path);
  return backend;
}

void ScriptedBackend::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw MissingFixtureError("cannot open fixture file: " + path.string());
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& ex) {
    throw MissingFixtureError("malformed fixture file " + path.string() + ": " +
                              ex.what());
  }
  std::lock_guard lock(mutex_);
  if (doc.contains("by_digest")) {
    for (const auto& [digest, text] : doc.at("by_digest").items()) {
      by_digest_[digest] = text.get<std::string>();
    }
  }
  if (doc.contains("by_tag")) {
    for (const auto& [message_id, roles] : doc.at("by_tag").items()) {
      for (const auto& [role, text] : roles.items()) {
        by_tag_[message_id][role] = text.get<std::string>();
      }
    }
  }
}

void ScriptedBackend::add_by_digest(std::string digest, std::string text) {
  std::lock_guard lock(mutex_);
  by_digest_[std::move(digest)] = std::move(text);
}

void ScriptedBackend::add_by_tag(const std::string& message_id, const std::string& role,
                                 std::string text) {
  std::lock_guard lock(mutex_);
  by_tag_[message_id][role] = std::move(text);
}

CompletionResult ScriptedBackend::complete(const CompletionRequest& request) {
  validate(request);
  std::lock_guard lock(mutex_);
  const CacheKey key = cache_key(id(), request);
  if (auto it = by_digest_.find(key.hex); it != by_digest_.end()) {
    return {it->second, {}, std::chrono::milliseconds{0}, false};
  }
  const auto slash = request.tag.find('/');
  if (slash != std::string::npos) {
    const std::string message_id = request.tag.substr(0, slash);
    const std::string role = request.tag.substr(slash + 1);
    if (auto by_message = by_tag_.find(message_id); by_message != by_tag_.end()) {
      if (auto it = by_message->second.find(role); it != by_message->second.end()) {
        return {it->second, {}, std::chrono::milliseconds{0}, false};
      }
    }
  }
  throw MissingFixtureError("no fixture for request tag '" + request.tag +
                            "' (digest " + key.hex.substr(0, 12) + ")");
}

}  // namespace had
