#include "had/agents.hpp"

#include <algorithm>
#include <stdexcept>

namespace had {

std::vector<AgentSpec> default_roster() {
  return {
      {"A1", "mood", "Please pay special attention to any irrealis mood used.", true},
      {"A2", "rhetoric",
       "Please pay special attention to any rhetorics (sarcasm, negative assertion, "
       "etc.) used.",
       true},
      {"A3", "dependency", "Please focus on the speaker sentiment, not a third party.",
       true},
      {"A4", "aspect", "Please focus on the stock ticker/tag/topic, not other entities.",
       true},
      {"A5", "reference",
       "Please pay special attention to the time expressions, prices, and other unsaid "
       "facts.",
       true},
  };
}

std::string scheme_choices(LabelScheme scheme) {
  return scheme == LabelScheme::Ternary ? "positive/negative/neutral"
                                        : "positive/negative";
}

namespace {

const AgentSpec* find_agent(std::span<const AgentSpec> roster, const std::string& id) {
  for (const AgentSpec& agent : roster) {
    if (agent.id == id) return &agent;
  }
  return nullptr;
}

std::vector<const AgentOpinion*> sorted_by_agent_id(std::span<const AgentOpinion> opinions) {
  std::vector<const AgentOpinion*> sorted;
  sorted.reserve(opinions.size());
  for (const AgentOpinion& opinion : opinions) sorted.push_back(&opinion);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const AgentOpinion* a, const AgentOpinion* b) {
                     if (a->round != b->round) return a->round < b->round;
                     return a->agent_id < b->agent_id;
                   });
  return sorted;
}

}  // namespace

std::string render_opinion_block(std::span<const AgentOpinion> opinions,
                                 std::span<const AgentSpec> roster, bool anonymize) {
  std::string block;
  const auto sorted = sorted_by_agent_id(opinions);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const AgentOpinion& opinion = *sorted[i];
    if (i > 0) block += "\n";
    if (anonymize) {
      block += "Expert " + std::to_string(i + 1) + ": " + opinion.text;
      continue;
    }
    block += "Expert " + opinion.agent_id;
    if (const AgentSpec* agent = find_agent(roster, opinion.agent_id)) {
      block += " (" + agent->name + ")";
    }
    block += ": " + opinion.text;
  }
  return block;
}

PromptText render_agent_prompt(const AgentSpec& agent, const Message& message,
                               LabelScheme scheme,
                               std::span<const AgentOpinion> prior_opinions,
                               std::span<const AgentSpec> roster, bool anonymize) {
  if (!agent.enabled) {
    throw std::invalid_argument("agent " + agent.id + " is disabled");
  }
  std::string user = "What is the sentiment (" + scheme_choices(scheme) +
                     ") of this message: [" + message.text + "]? " + agent.instruction;
  if (!prior_opinions.empty()) {
    user += "\n\nOpinions from the previous discussion round:\n" +
            render_opinion_block(prior_opinions, roster, anonymize);
  }
  return {std::nullopt, std::move(user)};
}

PromptText render_naive_prompt(const Message& message, LabelScheme scheme) {
  const std::string choices = scheme == LabelScheme::Ternary
                                  ? "negative/neutral/positive"
                                  : "negative/positive";
  return {std::nullopt,
          message.text + " Question: what is the sentiment? Answer with " + choices};
}

PromptText render_summative_prompt(const Message& message,
                                   std::span<const AgentOpinion> opinions,
                                   LabelScheme scheme,
                                   std::span<const AgentSpec> roster, bool anonymize) {
  if (opinions.empty()) {
    throw std::invalid_argument("summative prompt needs at least one opinion");
  }
  std::string user = "Considering this message: [" + message.text +
                     "] and additional opinions from experts [" +
                     render_opinion_block(opinions, roster, anonymize) +
                     "], what is the sentiment, " + scheme_choices(scheme) + "?";
  return {std::nullopt, std::move(user)};
}

}  // namespace had
