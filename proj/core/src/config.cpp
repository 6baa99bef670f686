#include "had/config.hpp"

#include <algorithm>
#include <fstream>

#include "had/detail/sha256.hpp"
#include "had/http_backend.hpp"

namespace had {

namespace {

template <typename T>
void read_field(const nlohmann::json& doc, const char* key, T& out) {
  if (doc.contains(key)) out = doc.at(key).get<T>();
}

}  // namespace

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError("malformed config " + path.string() + ": " + ex.what());
  }
  return config_from_json(doc);
}

RunConfig config_from_json(const nlohmann::json& doc) {
  RunConfig config;
  try {
    if (doc.contains("backend")) {
      const auto& b = doc.at("backend");
      read_field(b, "type", config.backend.type);
      read_field(b, "endpoint", config.backend.endpoint);
      read_field(b, "model", config.backend.model);
      read_field(b, "credential_env", config.backend.credential_env);
      read_field(b, "temperature", config.backend.temperature);
      read_field(b, "max_tokens", config.backend.max_tokens);
      read_field(b, "max_retries", config.backend.max_retries);
      read_field(b, "retry_base_ms", config.backend.retry_base_ms);
      read_field(b, "retry_max_ms", config.backend.retry_max_ms);
      read_field(b, "timeout_ms", config.backend.timeout_ms);
      read_field(b, "rate_limit_rps", config.backend.rate_limit_rps);
      read_field(b, "fixtures", config.backend.fixtures);
    }
    if (doc.contains("roster")) {
      for (const auto& entry : doc.at("roster")) {
        RosterOverride item;
        item.id = entry.at("id").get<std::string>();
        if (entry.contains("name")) item.name = entry.at("name").get<std::string>();
        if (entry.contains("instruction")) {
          item.instruction = entry.at("instruction").get<std::string>();
        }
        if (entry.contains("enabled")) item.enabled = entry.at("enabled").get<bool>();
        config.roster.push_back(std::move(item));
      }
    }
    if (doc.contains("discussion")) {
      const auto& d = doc.at("discussion");
      read_field(d, "scheme", config.discussion.scheme);
      read_field(d, "max_rounds", config.discussion.max_rounds);
      read_field(d, "aggregation", config.discussion.aggregation);
      read_field(d, "consensus_early_stop", config.discussion.consensus_early_stop);
      read_field(d, "binary_tie_break", config.discussion.binary_tie_break);
      read_field(d, "binary_fallback", config.discussion.binary_fallback);
      read_field(d, "anonymize_opinions", config.discussion.anonymize_opinions);
      read_field(d, "parallelism", config.discussion.parallelism);
    }
    if (doc.contains("eval")) {
      const auto& e = doc.at("eval");
      read_field(e, "max_consecutive_failures", config.eval.max_consecutive_failures);
      read_field(e, "record_parallelism", config.eval.record_parallelism);
    }
    if (doc.contains("paths")) {
      const auto& p = doc.at("paths");
      read_field(p, "cache_dir", config.paths.cache_dir);
      read_field(p, "transcript_dir", config.paths.transcript_dir);
      read_field(p, "report_dir", config.paths.report_dir);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("bad config value: ") + ex.what());
  }
  validate(config);
  return config;
}

void validate(const RunConfig& config) {
  if (config.backend.type != "http" && config.backend.type != "scripted") {
    throw ConfigError("backend.type must be 'http' or 'scripted'");
  }
  if (config.backend.temperature < 0.0) {
    throw ConfigError("backend.temperature must be >= 0");
  }
  if (config.backend.max_tokens < 1) throw ConfigError("backend.max_tokens must be >= 1");
  if (config.backend.max_retries < 0) throw ConfigError("backend.max_retries must be >= 0");
  if (config.discussion.max_rounds < 1) {
    throw ConfigError("discussion.max_rounds must be >= 1");
  }
  if (config.discussion.parallelism < 1) {
    throw ConfigError("discussion.parallelism must be >= 1");
  }
  if (config.eval.record_parallelism < 1) {
    throw ConfigError("eval.record_parallelism must be >= 1");
  }
  if (config.eval.max_consecutive_failures < 1) {
    throw ConfigError("eval.max_consecutive_failures must be >= 1");
  }
  if (config.discussion.scheme != "auto" &&
      !scheme_from_string(config.discussion.scheme)) {
    throw ConfigError("discussion.scheme must be auto, binary or ternary");
  }
  if (!aggregation_from_string(config.discussion.aggregation)) {
    throw ConfigError("discussion.aggregation must be summarizer or majority");
  }
  for (const char* key : {"binary_tie_break", "binary_fallback"}) {
    const std::string& value = std::string(key) == "binary_tie_break"
                                   ? config.discussion.binary_tie_break
                                   : config.discussion.binary_fallback;
    const auto label = label_from_string(value);
    if (!label || *label == SentimentLabel::Neutral) {
      throw ConfigError(std::string("discussion.") + key +
                        " must be positive or negative");
    }
  }
}

nlohmann::json config_to_json(const RunConfig& config) {
  nlohmann::json roster = nlohmann::json::array();
  for (const RosterOverride& item : config.roster) {
    nlohmann::json entry{{"id", item.id}};
    if (item.name) entry["name"] = *item.name;
    if (item.instruction) entry["instruction"] = *item.instruction;
    if (item.enabled) entry["enabled"] = *item.enabled;
    roster.push_back(std::move(entry));
  }
  return {
      {"backend",
       {{"type", config.backend.type},
        {"endpoint", config.backend.endpoint},
        {"model", config.backend.model},
        {"credential_env", config.backend.credential_env},
        {"temperature", config.backend.temperature},
        {"max_tokens", config.backend.max_tokens},
        {"max_retries", config.backend.max_retries},
        {"retry_base_ms", config.backend.retry_base_ms},
        {"retry_max_ms", config.backend.retry_max_ms},
        {"timeout_ms", config.backend.timeout_ms},
        {"rate_limit_rps", config.backend.rate_limit_rps},
        {"fixtures", config.backend.fixtures}}},
      {"roster", roster},
      {"discussion",
       {{"scheme", config.discussion.scheme},
        {"max_rounds", config.discussion.max_rounds},
        {"aggregation", config.discussion.aggregation},
        {"consensus_early_stop", config.discussion.consensus_early_stop},
        {"binary_tie_break", config.discussion.binary_tie_break},
        {"binary_fallback", config.discussion.binary_fallback},
        {"anonymize_opinions", config.discussion.anonymize_opinions},
        {"parallelism", config.discussion.parallelism}}},
      {"eval",
       {{"max_consecutive_failures", config.eval.max_consecutive_failures},
        {"record_parallelism", config.eval.record_parallelism}}},
      {"paths",
       {{"cache_dir", config.paths.cache_dir},
        {"transcript_dir", config.paths.transcript_dir},
        {"report_dir", config.paths.report_dir}}},
  };
}

std::string config_hash(const RunConfig& config) {
  return detail::sha256_hex(config_to_json(config).dump());
}

std::vector<AgentSpec> apply_roster_overrides(
    std::vector<AgentSpec> roster, const std::vector<RosterOverride>& overrides) {
  for (const RosterOverride& item : overrides) {
    auto it = std::find_if(roster.begin(), roster.end(),
                           [&](const AgentSpec& agent) { return agent.id == item.id; });
    if (it == roster.end()) {
      AgentSpec agent;
      agent.id = item.id;
      agent.name = item.name.value_or(item.id);
      agent.instruction = item.instruction.value_or("");
      agent.enabled = item.enabled.value_or(true);
      if (agent.instruction.empty()) {
        throw ConfigError("new roster agent " + item.id + " needs an instruction");
      }
      roster.push_back(std::move(agent));
      continue;
    }
    if (item.name) it->name = *item.name;
    if (item.instruction) it->instruction = *item.instruction;
    if (item.enabled) it->enabled = *item.enabled;
  }
  return roster;
}

DiscussionConfig make_discussion_config(const RunConfig& config, LabelScheme scheme) {
  DiscussionConfig out;
  out.scheme = scheme;
  out.max_rounds = config.discussion.max_rounds;
  out.aggregation = *aggregation_from_string(config.discussion.aggregation);
  out.consensus_early_stop = config.discussion.consensus_early_stop;
  out.binary_tie_break = *label_from_string(config.discussion.binary_tie_break);
  out.binary_fallback = *label_from_string(config.discussion.binary_fallback);
  out.anonymize_opinions = config.discussion.anonymize_opinions;
  out.parallelism = config.discussion.parallelism;
  out.model = config.backend.model;
  out.temperature = config.backend.temperature;
  out.max_tokens = config.backend.max_tokens;
  return out;
}

std::shared_ptr<Backend> make_backend(const BackendConfig& config) {
  if (config.type == "scripted" || !config.fixtures.empty()) {
    if (config.fixtures.empty()) {
      throw ConfigError("scripted backend needs backend.fixtures");
    }
    return ScriptedBackend::from_file(config.fixtures);
  }
  HttpBackendOptions options;
  options.endpoint = config.endpoint;
  options.credential_env = config.credential_env;
  options.retry.max_retries = config.max_retries;
  options.retry.base_delay = std::chrono::milliseconds(config.retry_base_ms);
  options.retry.max_delay = std::chrono::milliseconds(config.retry_max_ms);
  options.requests_per_second = config.rate_limit_rps;
  options.timeout = std::chrono::milliseconds(config.timeout_ms);
  return std::make_shared<HttpBackend>(std::move(options));
}

}  // namespace had
