#include "had/cache.hpp"

#include <fstream>

#include "json.hpp"

namespace had {

namespace {

nlohmann::json entry_to_json(const CacheKey& key, const CacheEntry& entry) {
  return {
      {"digest", key.hex},
      {"text", entry.text},
      {"model", entry.model},
      {"tag", entry.tag},
      {"usage",
       {{"prompt_tokens", entry.usage.prompt_tokens},
        {"completion_tokens", entry.usage.completion_tokens},
        {"total_tokens", entry.usage.total_tokens}}},
  };
}

CacheEntry entry_from_json(const nlohmann::json& doc) {
  CacheEntry entry;
  entry.text = doc.at("text").get<std::string>();
  entry.model = doc.value("model", "");
  entry.tag = doc.value("tag", "");
  if (doc.contains("usage")) {
    const auto& usage = doc.at("usage");
    entry.usage.prompt_tokens = usage.value("prompt_tokens", 0L);
    entry.usage.completion_tokens = usage.value("completion_tokens", 0L);
    entry.usage.total_tokens = usage.value("total_tokens", 0L);
  }
  return entry;
}

}  // namespace

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) {
    throw CacheError("cannot create cache directory " + dir_.string() + ": " +
                     ec.message());
  }
}

std::filesystem::path ResponseCache::entry_path(const CacheKey& key) const {
  return dir_ / (key.hex + ".json");
}

std::optional<CacheEntry> ResponseCache::get(const CacheKey& key) const {
  {
    std::lock_guard lock(mutex_);
    if (auto it = memory_.find(key.hex); it != memory_.end()) return it->second;
  }
  const auto path = entry_path(key);
  std::ifstream in(path);
  if (!in) return std::nullopt;
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& ex) {
    throw CacheError("corrupt cache entry " + path.string() + ": " + ex.what());
  }
  CacheEntry entry = entry_from_json(doc);
  std::lock_guard lock(mutex_);
  memory_[key.hex] = entry;
  return entry;
}

void ResponseCache::put(const CacheKey& key, const CacheEntry& entry) {
  const auto path = entry_path(key);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw CacheError("cannot write cache entry " + path.string());
    out << entry_to_json(key, entry).dump(2) << "\n";
    if (!out) throw CacheError("short write on cache entry " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CacheError("cannot commit cache entry " + path.string() + ": " + ec.message());
  append_index(key, entry);
  std::lock_guard lock(mutex_);
  memory_[key.hex] = entry;
}

void ResponseCache::append_index(const CacheKey& key, const CacheEntry& entry) {
  std::ofstream out(dir_ / "index.jsonl", std::ios::app);
  if (!out) throw CacheError("cannot append cache index in " + dir_.string());
  out << nlohmann::json{{"digest", key.hex}, {"model", entry.model}, {"tag", entry.tag}}
             .dump()
      << "\n";
}

CompletionResult cached_complete(Backend& backend, ResponseCache& cache,
                                 const CompletionRequest& request) {
  const CacheKey key = cache_key(backend.id(), request);
  if (auto entry = cache.get(key)) {
    return {entry->text, entry->usage, std::chrono::milliseconds{0}, true};
  }
  CompletionResult result = backend.complete(request);
  cache.put(key, {result.text, result.usage, request.model, request.tag});
  result.from_cache = false;
  return result;
}

CompletionResult CachingBackend::complete(const CompletionRequest& request) {
  const CacheKey key = cache_key(inner_->id(), request);
  if (auto entry = cache_->get(key)) {
    hits_.fetch_add(1, std::memory_order_relaxed);
    return {entry->text, entry->usage, std::chrono::milliseconds{0}, true};
  }

  std::shared_ptr<Flight> flight;
  bool leader = false;
  {
    std::lock_guard lock(flights_mutex_);
    auto it = flights_.find(key.hex);
    if (it == flights_.end()) {
      flight = std::make_shared<Flight>();
      flights_.emplace(key.hex, flight);
      leader = true;
    } else {
      flight = it->second;
    }
  }

  if (!leader) {
    std::unique_lock lock(flight->mutex);
    flight->done_cv.wait(lock, [&] { return flight->done; });
    if (flight->error) std::rethrow_exception(flight->error);
    hits_.fetch_add(1, std::memory_order_relaxed);
    CompletionResult result = flight->result;
    result.from_cache = true;
    return result;
  }

  CompletionResult result;
  std::exception_ptr error;
  try {
    result = inner_->complete(request);
    cache_->put(key, {result.text, result.usage, request.model, request.tag});
    result.from_cache = false;
    misses_.fetch_add(1, std::memory_order_relaxed);
  } catch (...) {
    error = std::current_exception();
  }
  {
    std::lock_guard lock(flight->mutex);
    flight->result = result;
    flight->error = error;
    flight->done = true;
  }
  flight->done_cv.notify_all();
  {
    std::lock_guard lock(flights_mutex_);
    flights_.erase(key.hex);
  }
  if (error) std::rethrow_exception(error);
  return result;
}

CachingBackend::Stats CachingBackend::stats() const {
  return {hits_.load(std::memory_order_relaxed), misses_.load(std::memory_order_relaxed)};
}

}  // namespace had
