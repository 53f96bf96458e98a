#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace lexcascade {

/// How strings are canonicalized before they are stored in, or looked up
/// against, a lexicon. Values are persisted in lexicon files; do not renumber.
enum class NormalizationMode : std::uint8_t {
  kNone = 0,
  kLowercase = 1,
  kLowercaseStripAccents = 2,
};

/// Canonical form of `word` under `mode`.
///
/// kLowercase applies Unicode simple case folding per scalar value.
/// kLowercaseStripAccents additionally decomposes (NFD), removes nonspacing
/// combining marks and recomposes (NFC). kNone returns the bytes unchanged.
/// Invalid UTF-8 in the folding modes is replaced by U+FFFD.
std::string normalize(std::string_view word, NormalizationMode mode);

/// Spelling used on the command line: "none", "lower", "lower-noaccents".
std::string_view to_string(NormalizationMode mode);
std::optional<NormalizationMode> parse_normalization(std::string_view name);

/// Decodes UTF-8 into scalar values. Invalid sequences decode to U+FFFD.
std::u32string utf8_to_u32(std::string_view text);
std::string u32_to_utf8(std::u32string_view text);

/// Number of Unicode scalar values in `text`.
std::size_t utf8_length(std::string_view text);

}  // namespace lexcascade
