#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "had/backend.hpp"
#include "json.hpp"

namespace had {

enum class Aggregation { LlmSummarizer, MajorityVote };

enum class PredictionSource { Summative, Majority, Naive, FallbackDefault };

std::string to_string(Aggregation aggregation);
std::string to_string(PredictionSource source);
std::optional<Aggregation> aggregation_from_string(const std::string& name);
std::optional<PredictionSource> source_from_string(const std::string& name);

struct Prediction {
  SentimentLabel label = SentimentLabel::Neutral;
  PredictionSource source = PredictionSource::FallbackDefault;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

struct DiscussionConfig {
  LabelScheme scheme = LabelScheme::Ternary;
  int max_rounds = 1;
  Aggregation aggregation = Aggregation::LlmSummarizer;
  bool consensus_early_stop = true;
  /// Tie in a binary majority; Negative by default (the rarer class in the
  /// corpora, so ties do not inflate majority-class accuracy).
  SentimentLabel binary_tie_break = SentimentLabel::Negative;
  /// Label used when nothing parseable came back: Neutral under Ternary,
  /// this side under Binary.
  SentimentLabel binary_fallback = SentimentLabel::Negative;
  bool anonymize_opinions = false;
  int parallelism = 4;  // concurrent agent calls within a round
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.0;
  int max_tokens = 256;
};

SentimentLabel fallback_label(const DiscussionConfig& config);

struct AgentFailure {
  std::string agent_id;
  int round = 1;
  std::string error;
};

/// Full record of one discussion run. With r completed rounds and k enabled
/// agents, call_count is k*r+1 under LlmSummarizer and k*r under
/// MajorityVote (failed calls excluded).
struct DiscussionTranscript {
  Message message;
  std::vector<AgentOpinion> opinions;  // grouped by round, roster order within
  std::vector<AgentFailure> failures;
  std::optional<std::string> summative_text;
  Prediction final;
  int call_count = 0;
  int rounds = 0;
};

class DiscussionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Consensus of one round: the shared label when every parseable opinion
/// agrees and at least one is parseable, otherwise nothing.
std::optional<SentimentLabel> check_consensus(std::span<const AgentOpinion> round_opinions);

/// Strict plurality over the parseable opinions. Ties resolve to Neutral
/// under Ternary and to `binary_tie_break` under Binary. Returns nothing
/// when no opinion is parseable (callers apply the fallback label).
std::optional<SentimentLabel> aggregate_majority(
    std::span<const AgentOpinion> opinions, LabelScheme scheme,
    SentimentLabel binary_tie_break = SentimentLabel::Negative);

struct NaiveResult {
  Prediction prediction;
  std::string raw_text;
};

/// Single-call baseline: one naive-prompt completion, parsed; an unparseable
/// reply maps to the fallback label.
NaiveResult run_naive(const Message& message, Backend& backend,
                      const DiscussionConfig& config);

/// Runs the discussion: per round, one completion per enabled agent
/// (concurrently, assembled in roster order), early-stopping on round
/// consensus; rounds past the first show each agent the panel's prior
/// opinions. Aggregation runs over the last round, via the summative
/// completion or a majority vote; an unparseable summative reply falls back
/// to the majority, then to the fallback label. Individual agent failures
/// are recorded and tolerated as long as one opinion survives.
DiscussionTranscript run_had(const Message& message,
                             const std::vector<AgentSpec>& roster, Backend& backend,
                             const DiscussionConfig& config);

/// JSON-lines transcript schema: {message_id, text, gold?, opinions:
/// [{agent_id, round, text, parsed}], summative_text, final, source,
/// call_count}.
nlohmann::json transcript_to_json(const DiscussionTranscript& transcript,
                                  std::optional<SentimentLabel> gold = std::nullopt);

struct TranscriptRecord {
  DiscussionTranscript transcript;
  std::optional<SentimentLabel> gold;
};

TranscriptRecord transcript_from_json(const nlohmann::json& doc);

}  // namespace had
