#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "had/agents.hpp"
#include "had/backend.hpp"
#include "had/discussion.hpp"
#include "json.hpp"

namespace had {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BackendConfig {
  std::string type = "http";  // "http" or "scripted"
  std::string endpoint = "https://api.openai.com/v1";
  std::string model = "gpt-3.5-turbo";
  std::string credential_env = "OPENAI_API_KEY";
  double temperature = 0.0;
  int max_tokens = 256;
  int max_retries = 3;
  int retry_base_ms = 250;
  int retry_max_ms = 8000;
  int timeout_ms = 30000;
  double rate_limit_rps = 0.0;
  std::string fixtures;  // fixture file; setting it selects the scripted backend
};

/// Partial per-agent override, matched by id. Unknown ids append new agents.
struct RosterOverride {
  std::string id;
  std::optional<std::string> name;
  std::optional<std::string> instruction;
  std::optional<bool> enabled;
};

struct DiscussionSection {
  std::string scheme = "auto";  // "auto" | "ternary" | "binary"
  int max_rounds = 1;
  std::string aggregation = "summarizer";
  bool consensus_early_stop = true;
  std::string binary_tie_break = "negative";
  std::string binary_fallback = "negative";
  bool anonymize_opinions = false;
  int parallelism = 4;
};

struct EvalSection {
  int max_consecutive_failures = 5;
  int record_parallelism = 1;
};

struct PathsSection {
  std::string cache_dir = "had_out/cache";
  std::string transcript_dir = "had_out/transcripts";
  std::string report_dir = "had_out/reports";
};

struct RunConfig {
  BackendConfig backend;
  std::vector<RosterOverride> roster;
  DiscussionSection discussion;
  EvalSection eval;
  PathsSection paths;
};

/// Throws ConfigError on unreadable files, bad JSON or invalid values.
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const RunConfig& config);
void validate(const RunConfig& config);

/// SHA-256 over the canonical serialization of the effective config; stamped
/// into reports so every number traces to an exact configuration.
std::string config_hash(const RunConfig& config);

std::vector<AgentSpec> apply_roster_overrides(std::vector<AgentSpec> roster,
                                              const std::vector<RosterOverride>& overrides);

/// Resolves the discussion section against a concrete scheme ("auto" comes
/// from the dataset at hand).
DiscussionConfig make_discussion_config(const RunConfig& config, LabelScheme scheme);

/// Builds the backend named by the config: scripted when fixtures are set or
/// type is "scripted", HTTP otherwise.
std::shared_ptr<Backend> make_backend(const BackendConfig& config);

}  // namespace had
