#include "had/types.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace had {

bool is_admissible(SentimentLabel label, LabelScheme scheme) {
  if (scheme == LabelScheme::Binary) {
    return label == SentimentLabel::Positive || label == SentimentLabel::Negative;
  }
  return true;
}

std::string to_string(SentimentLabel label) {
  switch (label) {
    case SentimentLabel::Positive: return "positive";
    case SentimentLabel::Negative: return "negative";
    case SentimentLabel::Neutral: return "neutral";
  }
  return "unknown";
}

std::string to_string(LabelScheme scheme) {
  return scheme == LabelScheme::Binary ? "binary" : "ternary";
}

namespace {

std::string lowered(const std::string& s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::optional<SentimentLabel> label_from_string(const std::string& name) {
  const std::string n = lowered(name);
  if (n == "positive") return SentimentLabel::Positive;
  if (n == "negative") return SentimentLabel::Negative;
  if (n == "neutral") return SentimentLabel::Neutral;
  return std::nullopt;
}

std::optional<LabelScheme> scheme_from_string(const std::string& name) {
  const std::string n = lowered(name);
  if (n == "binary") return LabelScheme::Binary;
  if (n == "ternary") return LabelScheme::Ternary;
  return std::nullopt;
}

std::string trim(const std::string& s) {
  auto begin = std::find_if_not(s.begin(), s.end(),
                                [](unsigned char c) { return std::isspace(c); });
  auto end = std::find_if_not(s.rbegin(), s.rend(),
                              [](unsigned char c) { return std::isspace(c); })
                 .base();
  return begin < end ? std::string(begin, end) : std::string();
}

Message make_message(std::string id, std::string text,
                     std::optional<std::string> target) {
  if (trim(text).empty()) {
    throw std::invalid_argument("message text must be non-empty after trimming");
  }
  return Message{std::move(id), std::move(text), std::move(target)};
}

}  // namespace had
