#include "had/label_parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace had {
namespace {

constexpr std::array<std::string_view, 2> kVerdictCues = {"sentiment is", "overall"};

struct Family {
  SentimentLabel label;
  std::string_view keyword;
};

constexpr std::array<Family, 3> kFamilies = {{
    {SentimentLabel::Positive, "positive"},
    {SentimentLabel::Negative, "negative"},
    {SentimentLabel::Neutral, "neutral"},
}};

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

// Word-boundary occurrences of `word` in lowercase `text`.
std::vector<std::size_t> word_occurrences(const std::string& text, std::string_view word) {
  std::vector<std::size_t> hits;
  std::size_t pos = 0;
  while ((pos = text.find(word, pos)) != std::string::npos) {
    const bool left_ok = pos == 0 || !is_letter(text[pos - 1]);
    const std::size_t end = pos + word.size();
    const bool right_ok = end == text.size() || !is_letter(text[end]);
    if (left_ok && right_ok) hits.push_back(pos);
    pos += 1;
  }
  return hits;
}

bool family_active(const Family& family, LabelScheme scheme) {
  return scheme == LabelScheme::Ternary || family.label != SentimentLabel::Neutral;
}

std::string_view keyword_for(SentimentLabel label) {
  for (const Family& family : kFamilies) {
    if (family.label == label) return family.keyword;
  }
  return {};
}

struct SentenceScan {
  std::vector<SentimentLabel> families;                 // families present
  std::vector<std::pair<SentimentLabel, std::size_t>> hits;  // every occurrence
};

SentenceScan scan_sentence(const std::string& lower, LabelScheme scheme) {
  SentenceScan scan;
  for (const Family& family : kFamilies) {
    if (!family_active(family, scheme)) continue;
    auto occurrences = word_occurrences(lower, family.keyword);
    if (occurrences.empty()) continue;
    scan.families.push_back(family.label);
    for (std::size_t pos : occurrences) scan.hits.emplace_back(family.label, pos);
  }
  return scan;
}

bool has_cue(const std::string& lower) {
  return std::any_of(kVerdictCues.begin(), kVerdictCues.end(), [&](std::string_view cue) {
    return lower.find(cue) != std::string::npos;
  });
}

// End position of every cue occurrence in the sentence.
std::vector<std::size_t> cue_ends(const std::string& lower) {
  std::vector<std::size_t> ends;
  for (std::string_view cue : kVerdictCues) {
    std::size_t pos = 0;
    while ((pos = lower.find(cue, pos)) != std::string::npos) {
      ends.push_back(pos + cue.size());
      pos += 1;
    }
  }
  return ends;
}

std::size_t word_count(const std::string& sentence) {
  std::size_t count = 0;
  bool in_word = false;
  for (char c : sentence) {
    const bool word_char = std::isalnum(static_cast<unsigned char>(c)) != 0;
    if (word_char && !in_word) ++count;
    in_word = word_char;
  }
  return count;
}

// In a sentence naming several families, a family counts as cued when one of
// its keywords appears after a verdict cue. The sentence decides only when
// exactly one family is cued.
std::optional<SentimentLabel> cued_family(const SentenceScan& scan, const std::string& lower) {
  const auto ends = cue_ends(lower);
  if (ends.empty()) return std::nullopt;
  std::vector<SentimentLabel> cued;
  for (SentimentLabel label : scan.families) {
    const bool is_cued = std::any_of(scan.hits.begin(), scan.hits.end(), [&](const auto& hit) {
      if (hit.first != label) return false;
      return std::any_of(ends.begin(), ends.end(),
                         [&](std::size_t end) { return end <= hit.second; });
    });
    if (is_cued) cued.push_back(label);
  }
  if (cued.size() == 1) return cued.front();
  return std::nullopt;
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> sentences;
  std::string current;
  for (std::size_t i = 0; i < text.size(); ++i) {
    current.push_back(text[i]);
    const char c = text[i];
    if (c == '.' || c == '!' || c == '?') {
      const bool at_end = i + 1 == text.size();
      const bool before_space =
          !at_end && std::isspace(static_cast<unsigned char>(text[i + 1])) != 0;
      if (at_end || before_space) {
        std::string trimmed = trim(current);
        if (!trimmed.empty()) sentences.push_back(std::move(trimmed));
        current.clear();
      }
    }
  }
  std::string tail = trim(current);
  if (!tail.empty()) sentences.push_back(std::move(tail));
  return sentences;
}

ParsedLabel parse_label(std::string_view text, LabelScheme scheme) {
  const auto sentences = split_sentences(text);
  if (sentences.empty()) return {};

  std::vector<std::string> lower_sentences;
  lower_sentences.reserve(sentences.size());
  for (const auto& s : sentences) lower_sentences.push_back(to_lower(s));

  // Leading bare verdict ("Negative.", "The sentiment is neutral. ...").
  // Agents tend to state the verdict first and then explain, and the
  // explanation routinely name-drops the other polarities.
  {
    const SentenceScan scan = scan_sentence(lower_sentences.front(), scheme);
    if (scan.families.size() == 1 &&
        (has_cue(lower_sentences.front()) || word_count(sentences.front()) <= 2)) {
      return {scan.families.front(), sentences.front()};
    }
  }

  // Backward scan: summarizers state the verdict last.
  for (std::size_t i = sentences.size(); i-- > 0;) {
    const SentenceScan scan = scan_sentence(lower_sentences[i], scheme);
    if (scan.families.empty()) continue;
    if (scan.families.size() == 1) return {scan.families.front(), sentences[i]};
    if (auto label = cued_family(scan, lower_sentences[i])) return {*label, sentences[i]};
  }

  // Strict maximum of keyword occurrences over the whole text.
  {
    const std::string lower = to_lower(text);
    SentimentLabel best = SentimentLabel::Neutral;
    std::size_t best_count = 0;
    bool unique = false;
    for (const Family& family : kFamilies) {
      if (!family_active(family, scheme)) continue;
      const std::size_t count = word_occurrences(lower, family.keyword).size();
      if (count > best_count) {
        best = family.label;
        best_count = count;
        unique = true;
      } else if (count == best_count && count > 0) {
        unique = false;
      }
    }
    if (unique && best_count > 0) {
      for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (!word_occurrences(lower_sentences[i], keyword_for(best)).empty()) {
          return {best, sentences[i]};
        }
      }
      return {best, std::string(text)};
    }
  }

  return {};
}

}  // namespace had
