#pragma once

#include <condition_variable>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "had/backend.hpp"

namespace had {

/// Cache I/O problems; kept distinct from BackendError so callers can tell
/// a broken cache directory from a failing endpoint.
class CacheError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CacheEntry {
  std::string text;
  TokenUsage usage;
  std::string model;
  std::string tag;
};

/// Persistent response store: a directory of JSON blobs named by hex digest
/// plus an index file for human browsing. Lookups never depend on insertion
/// order. Thread-safe.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<CacheEntry> get(const CacheKey& key) const;
  void put(const CacheKey& key, const CacheEntry& entry);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path entry_path(const CacheKey& key) const;
  void append_index(const CacheKey& key, const CacheEntry& entry);

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, CacheEntry> memory_;
};

/// One cached completion: returns the stored text on a hit (from_cache=true,
/// zero backend calls), otherwise delegates, stores and returns. Not
/// single-flight; concurrent callers should go through CachingBackend.
CompletionResult cached_complete(Backend& backend, ResponseCache& cache,
                                 const CompletionRequest& request);

/// Backend wrapper adding the content-addressed cache with single-flight per
/// key: under concurrency, at most one network fetch happens per distinct
/// request; everyone else waits and reads the stored result.
class CachingBackend final : public Backend {
 public:
  CachingBackend(std::shared_ptr<Backend> inner, std::shared_ptr<ResponseCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}

  CompletionResult complete(const CompletionRequest& request) override;
  std::string id() const override { return inner_->id(); }

  struct Stats {
    long hits = 0;
    long misses = 0;
  };
  Stats stats() const;

 private:
  struct Flight {
    std::mutex mutex;
    std::condition_variable done_cv;
    bool done = false;
    CompletionResult result;
    std::exception_ptr error;
  };

  std::shared_ptr<Backend> inner_;
  std::shared_ptr<ResponseCache> cache_;
  std::mutex flights_mutex_;
  std::unordered_map<std::string, std::shared_ptr<Flight>> flights_;
  std::atomic<long> hits_{0};
  std::atomic<long> misses_{0};
};

}  // namespace had
