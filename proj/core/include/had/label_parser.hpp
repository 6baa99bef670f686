#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "had/types.hpp"

namespace had {

/// Splits text into sentences on '.', '!' or '?' followed by whitespace or
/// end of text. Good enough for short financial messages and model replies.
std::vector<std::string> split_sentences(std::string_view text);

/// Reads a sentiment verdict out of free-form model output. Total and
/// deterministic; never throws. Resolution order:
///   1. a leading verdict sentence: the first sentence names exactly one
///      polarity and is either a bare verdict ("Negative.") or carries a
///      verdict cue ("sentiment is", "overall");
///   2. scan from the last sentence backward for a sentence naming exactly
///      one polarity; a sentence naming several counts only when a verdict
///      cue singles one of them out, otherwise it is skipped;
///   3. strict maximum of keyword occurrences over the whole text.
/// Anything else is unparseable. Under Binary the neutral keyword is ignored
/// throughout, so the result is never Neutral.
ParsedLabel parse_label(std::string_view text, LabelScheme scheme);

}  // namespace had
