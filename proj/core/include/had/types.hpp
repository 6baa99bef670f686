#pragma once

#include <optional>
#include <string>

namespace had {

enum class SentimentLabel { Positive, Negative, Neutral };

// Binary admits {Positive, Negative}; Ternary admits all three labels.
enum class LabelScheme { Binary, Ternary };

bool is_admissible(SentimentLabel label, LabelScheme scheme);

std::string to_string(SentimentLabel label);
std::string to_string(LabelScheme scheme);
std::optional<SentimentLabel> label_from_string(const std::string& name);
std::optional<LabelScheme> scheme_from_string(const std::string& name);

/// Outcome of reading a sentiment verdict out of free-form text. `label` is
/// empty when the text does not commit to a polarity; `evidence` holds the
/// span the verdict was read from (empty when unparseable).
struct ParsedLabel {
  std::optional<SentimentLabel> label;
  std::string evidence;

  bool parsed() const { return label.has_value(); }

  friend bool operator==(const ParsedLabel&, const ParsedLabel&) = default;
};

/// One input message to classify. `target` optionally names the entity or
/// ticker the sentiment question is about.
struct Message {
  std::string id;
  std::string text;
  std::optional<std::string> target;
};

/// Builds a Message, enforcing that `text` is non-empty after whitespace
/// trimming. Throws std::invalid_argument otherwise.
Message make_message(std::string id, std::string text,
                     std::optional<std::string> target = std::nullopt);

/// One agent's free-text intermediary analysis of a message.
struct AgentOpinion {
  std::string agent_id;
  int round = 1;
  std::string text;
  ParsedLabel parsed;
};

std::string trim(const std::string& s);

}  // namespace had
