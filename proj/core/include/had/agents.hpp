#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "had/types.hpp"

namespace had {

/// One specialist in the discussion roster: a short id ("A1"), a human name
/// ("mood") and the characteristic instruction appended to its prompt.
struct AgentSpec {
  std::string id;
  std::string name;
  std::string instruction;
  bool enabled = true;
};

struct PromptText {
  std::optional<std::string> system;
  std::string user;
};

/// The stock five-agent roster. Each agent watches for one class of
/// sentiment-classification mistakes: irrealis mood, rhetoric, third-party
/// opinions, off-target entities, and unstated external facts.
std::vector<AgentSpec> default_roster();

/// "positive/negative/neutral" for Ternary, "positive/negative" for Binary.
std::string scheme_choices(LabelScheme scheme);

/// Prompt for one agent's intermediary analysis. When `prior_opinions` is
/// non-empty (discussion rounds past the first) they are appended so the
/// agent sees what the rest of the panel said. Throws std::invalid_argument
/// for disabled agents.
PromptText render_agent_prompt(const AgentSpec& agent, const Message& message,
                               LabelScheme scheme,
                               std::span<const AgentOpinion> prior_opinions = {},
                               std::span<const AgentSpec> roster = {},
                               bool anonymize = false);

/// The single-call baseline prompt:
/// "[message] Question: what is the sentiment? Answer with <choices>"
/// where choices read "negative/neutral/positive" (Ternary) or
/// "negative/positive" (Binary).
PromptText render_naive_prompt(const Message& message, LabelScheme scheme);

/// The summative prompt aggregating expert opinions. Opinions render one
/// block per agent, "Expert <id> (<name>): <text>", sorted by agent id
/// regardless of input order. Throws std::invalid_argument when `opinions`
/// is empty.
PromptText render_summative_prompt(const Message& message,
                                   std::span<const AgentOpinion> opinions,
                                   LabelScheme scheme,
                                   std::span<const AgentSpec> roster = {},
                                   bool anonymize = false);

/// The opinion block shared by the summative and multi-round prompts.
std::string render_opinion_block(std::span<const AgentOpinion> opinions,
                                 std::span<const AgentSpec> roster,
                                 bool anonymize);

}  // namespace had
