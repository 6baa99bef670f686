#include "had/discussion.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <semaphore>

#include "had/label_parser.hpp"

namespace had {

std::string to_string(Aggregation aggregation) {
  return aggregation == Aggregation::LlmSummarizer ? "summarizer" : "majority";
}

std::string to_string(PredictionSource source) {
  switch (source) {
    case PredictionSource::Summative: return "summative";
    case PredictionSource::Majority: return "majority";
    case PredictionSource::Naive: return "naive";
    case PredictionSource::FallbackDefault: return "fallback_default";
  }
  return "unknown";
}

std::optional<Aggregation> aggregation_from_string(const std::string& name) {
  if (name == "summarizer" || name == "llm" || name == "llm_summarizer") {
    return Aggregation::LlmSummarizer;
  }
  if (name == "majority" || name == "majority_vote") return Aggregation::MajorityVote;
  return std::nullopt;
}

std::optional<PredictionSource> source_from_string(const std::string& name) {
  if (name == "summative") return PredictionSource::Summative;
  if (name == "majority") return PredictionSource::Majority;
  if (name == "naive") return PredictionSource::Naive;
  if (name == "fallback_default") return PredictionSource::FallbackDefault;
  return std::nullopt;
}

SentimentLabel fallback_label(const DiscussionConfig& config) {
  return config.scheme == LabelScheme::Ternary ? SentimentLabel::Neutral
                                               : config.binary_fallback;
}

std::optional<SentimentLabel> check_consensus(
    std::span<const AgentOpinion> round_opinions) {
  std::optional<SentimentLabel> agreed;
  for (const AgentOpinion& opinion : round_opinions) {
    if (!opinion.parsed.parsed()) continue;
    if (!agreed) {
      agreed = opinion.parsed.label;
    } else if (*agreed != *opinion.parsed.label) {
      return std::nullopt;
    }
  }
  return agreed;
}

std::optional<SentimentLabel> aggregate_majority(std::span<const AgentOpinion> opinions,
                                                 LabelScheme scheme,
                                                 SentimentLabel binary_tie_break) {
  std::map<SentimentLabel, int> counts;
  for (const AgentOpinion& opinion : opinions) {
    if (opinion.parsed.parsed()) ++counts[*opinion.parsed.label];
  }
  if (counts.empty()) return std::nullopt;

  int best = 0;
  for (const auto& [label, count] : counts) best = std::max(best, count);
  std::vector<SentimentLabel> winners;
  for (const auto& [label, count] : counts) {
    if (count == best) winners.push_back(label);
  }
  if (winners.size() == 1) return winners.front();
  return scheme == LabelScheme::Ternary ? SentimentLabel::Neutral : binary_tie_break;
}

namespace {

CompletionRequest make_request(const DiscussionConfig& config, PromptText prompt,
                               std::string tag) {
  CompletionRequest request;
  request.model = config.model;
  request.prompt = std::move(prompt);
  request.temperature = config.temperature;
  request.max_tokens = config.max_tokens;
  request.tag = std::move(tag);
  return request;
}

std::string agent_tag(const Message& message, const AgentSpec& agent, int round) {
  std::string tag = message.id + "/" + agent.id;
  if (round > 1) tag += "/r" + std::to_string(round);
  return tag;
}

}  // namespace

NaiveResult run_naive(const Message& message, Backend& backend,
                      const DiscussionConfig& config) {
  CompletionResult result;
  try {
    result = backend.complete(
        make_request(config, render_naive_prompt(message, config.scheme),
                     message.id + "/naive"));
  } catch (const BackendError& ex) {
    throw DiscussionError("message " + message.id + ": " + ex.what());
  }
  const ParsedLabel parsed = parse_label(result.text, config.scheme);
  if (parsed.parsed()) {
    return {{*parsed.label, PredictionSource::Naive}, result.text};
  }
  return {{fallback_label(config), PredictionSource::FallbackDefault}, result.text};
}

DiscussionTranscript run_had(const Message& message,
                             const std::vector<AgentSpec>& roster, Backend& backend,
                             const DiscussionConfig& config) {
  std::vector<AgentSpec> enabled;
  for (const AgentSpec& agent : roster) {
    if (agent.enabled) enabled.push_back(agent);
  }
  if (enabled.empty()) {
    throw DiscussionError("message " + message.id + ": no enabled agents");
  }
  if (config.max_rounds < 1) {
    throw std::invalid_argument("max_rounds must be >= 1");
  }

  DiscussionTranscript transcript;
  transcript.message = message;

  std::counting_semaphore<> slots(std::max(config.parallelism, 1));

  for (int round = 1; round <= config.max_rounds; ++round) {
    // Prior opinions are frozen before the fan-out so every agent in this
    // round sees the same context.
    const std::vector<AgentOpinion> context = transcript.opinions;

    std::vector<std::future<AgentOpinion>> futures;
    futures.reserve(enabled.size());
    for (const AgentSpec& agent : enabled) {
      futures.push_back(std::async(std::launch::async, [&, round]() {
        slots.acquire();
        struct Release {
          std::counting_semaphore<>& sem;
          ~Release() { sem.release(); }
        } release{slots};
        PromptText prompt =
            render_agent_prompt(agent, message, config.scheme, context, roster,
                                config.anonymize_opinions);
        CompletionResult result = backend.complete(
            make_request(config, std::move(prompt), agent_tag(message, agent, round)));
        return AgentOpinion{agent.id, round, result.text,
                            parse_label(result.text, config.scheme)};
      }));
    }

    // Assemble in roster order no matter when each call finished.
    std::vector<AgentOpinion> round_opinions;
    for (std::size_t i = 0; i < futures.size(); ++i) {
      try {
        round_opinions.push_back(futures[i].get());
      } catch (const BackendError& ex) {
        transcript.failures.push_back({enabled[i].id, round, ex.what()});
      }
    }
    transcript.call_count += static_cast<int>(round_opinions.size());
    transcript.opinions.insert(transcript.opinions.end(), round_opinions.begin(),
                               round_opinions.end());
    transcript.rounds = round;

    if (config.consensus_early_stop && check_consensus(round_opinions).has_value()) {
      break;
    }
  }

  if (transcript.opinions.empty()) {
    throw DiscussionError("message " + message.id + ": every agent call failed");
  }

  // Aggregate over the most recent round that produced opinions.
  const int last_round =
      std::max_element(transcript.opinions.begin(), transcript.opinions.end(),
                       [](const AgentOpinion& a, const AgentOpinion& b) {
                         return a.round < b.round;
                       })
          ->round;
  std::vector<AgentOpinion> last;
  for (const AgentOpinion& opinion : transcript.opinions) {
    if (opinion.round == last_round) last.push_back(opinion);
  }

  const auto majority_or_fallback = [&](PredictionSource majority_source) {
    if (auto label = aggregate_majority(last, config.scheme, config.binary_tie_break)) {
      transcript.final = {*label, majority_source};
    } else {
      transcript.final = {fallback_label(config), PredictionSource::FallbackDefault};
    }
  };

  if (config.aggregation == Aggregation::MajorityVote) {
    majority_or_fallback(PredictionSource::Majority);
    return transcript;
  }

  try {
    PromptText prompt = render_summative_prompt(message, last, config.scheme, roster,
                                                config.anonymize_opinions);
    CompletionResult result = backend.complete(
        make_request(config, std::move(prompt), message.id + "/summative"));
    ++transcript.call_count;
    transcript.summative_text = result.text;
    const ParsedLabel parsed = parse_label(result.text, config.scheme);
    if (parsed.parsed()) {
      transcript.final = {*parsed.label, PredictionSource::Summative};
      return transcript;
    }
  } catch (const BackendError& ex) {
    transcript.failures.push_back({"summative", last_round, ex.what()});
  }
  majority_or_fallback(PredictionSource::Majority);
  return transcript;
}

nlohmann::json transcript_to_json(const DiscussionTranscript& transcript,
                                  std::optional<SentimentLabel> gold) {
  nlohmann::json opinions = nlohmann::json::array();
  for (const AgentOpinion& opinion : transcript.opinions) {
    nlohmann::json parsed{{"evidence", opinion.parsed.evidence}};
    if (opinion.parsed.parsed()) {
      parsed["label"] = to_string(*opinion.parsed.label);
    } else {
      parsed["label"] = nullptr;
    }
    opinions.push_back({{"agent_id", opinion.agent_id},
                        {"round", opinion.round},
                        {"text", opinion.text},
                        {"parsed", parsed}});
  }
  nlohmann::json doc{{"message_id", transcript.message.id},
                     {"text", transcript.message.text},
                     {"opinions", opinions},
                     {"final", to_string(transcript.final.label)},
                     {"source", to_string(transcript.final.source)},
                     {"call_count", transcript.call_count}};
  if (transcript.summative_text) {
    doc["summative_text"] = *transcript.summative_text;
  } else {
    doc["summative_text"] = nullptr;
  }
  if (gold) doc["gold"] = to_string(*gold);
  if (!transcript.failures.empty()) {
    nlohmann::json failures = nlohmann::json::array();
    for (const AgentFailure& failure : transcript.failures) {
      failures.push_back({{"agent_id", failure.agent_id},
                          {"round", failure.round},
                          {"error", failure.error}});
    }
    doc["failures"] = failures;
  }
  return doc;
}

TranscriptRecord transcript_from_json(const nlohmann::json& doc) {
  TranscriptRecord record;
  record.transcript.message.id = doc.at("message_id").get<std::string>();
  record.transcript.message.text = doc.value("text", "");
  for (const auto& opinion_doc : doc.value("opinions", nlohmann::json::array())) {
    AgentOpinion opinion;
    opinion.agent_id = opinion_doc.at("agent_id").get<std::string>();
    opinion.round = opinion_doc.value("round", 1);
    opinion.text = opinion_doc.value("text", "");
    if (opinion_doc.contains("parsed")) {
      const auto& parsed = opinion_doc.at("parsed");
      opinion.parsed.evidence = parsed.value("evidence", "");
      if (parsed.contains("label") && parsed.at("label").is_string()) {
        opinion.parsed.label = label_from_string(parsed.at("label").get<std::string>());
      }
    }
    record.transcript.opinions.push_back(std::move(opinion));
    record.transcript.rounds =
        std::max(record.transcript.rounds, record.transcript.opinions.back().round);
  }
  if (doc.contains("summative_text") && doc.at("summative_text").is_string()) {
    record.transcript.summative_text = doc.at("summative_text").get<std::string>();
  }
  if (auto label = label_from_string(doc.at("final").get<std::string>())) {
    record.transcript.final.label = *label;
  }
  if (auto source = source_from_string(doc.value("source", ""))) {
    record.transcript.final.source = *source;
  }
  record.transcript.call_count = doc.value("call_count", 0);
  for (const auto& failure_doc : doc.value("failures", nlohmann::json::array())) {
    record.transcript.failures.push_back({failure_doc.value("agent_id", ""),
                                          failure_doc.value("round", 1),
                                          failure_doc.value("error", "")});
  }
  if (doc.contains("gold") && doc.at("gold").is_string()) {
    record.gold = label_from_string(doc.at("gold").get<std::string>());
  }
  return record;
}

}  // namespace had
