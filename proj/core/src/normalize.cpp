#include "lexcascade/normalize.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <stdexcept>

namespace lexcascade {
namespace {

constexpr char32_t kReplacement = 0xFFFD;

bool is_ascii(std::string_view s) {
  for (unsigned char c : s) {
    if (c >= 0x80) return false;
  }
  return true;
}

void append_utf8(std::string& out, char32_t cp) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool error = false;
  U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, U8_MAX_LENGTH, static_cast<UChar32>(cp), error);
  if (error) {
    len = 0;
    U8_APPEND_UNSAFE(reinterpret_cast<uint8_t*>(buf), len, kReplacement);
  }
  out.append(buf, static_cast<std::size_t>(len));
}

std::string fold_case(std::string_view word) {
  std::string out;
  out.reserve(word.size());
  if (is_ascii(word)) {
    for (char c : word) out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c);
    return out;
  }
  for (char32_t cp : utf8_to_u32(word)) {
    append_utf8(out, static_cast<char32_t>(u_foldCase(static_cast<UChar32>(cp), U_FOLD_CASE_DEFAULT)));
  }
  return out;
}

std::string strip_accents(const std::string& folded) {
  if (is_ascii(folded)) return folded;
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfd = icu::Normalizer2::getNFDInstance(status);
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU normalizer unavailable");

  icu::UnicodeString decomposed = nfd->normalize(icu::UnicodeString::fromUTF8(folded), status);
  icu::UnicodeString kept;
  for (int32_t i = 0; i < decomposed.length();) {
    UChar32 cp = decomposed.char32At(i);
    if (u_charType(cp) != U_NON_SPACING_MARK) kept.append(cp);
    i += U16_LENGTH(cp);
  }
  icu::UnicodeString composed = nfc->normalize(kept, status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU normalization failed");
  std::string out;
  composed.toUTF8String(out);
  return out;
}

}  // namespace

std::u32string utf8_to_u32(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  for (int32_t i = 0; i < length;) {
    UChar32 cp = 0;
    U8_NEXT(s, i, length, cp);
    out.push_back(cp < 0 ? kReplacement : static_cast<char32_t>(cp));
  }
  return out;
}

std::string u32_to_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) append_utf8(out, cp);
  return out;
}

std::size_t utf8_length(std::string_view text) {
  if (is_ascii(text)) return text.size();
  return utf8_to_u32(text).size();
}

std::string normalize(std::string_view word, NormalizationMode mode) {
  switch (mode) {
    case NormalizationMode::kNone:
      return std::string(word);
    case NormalizationMode::kLowercase:
      return fold_case(word);
    case NormalizationMode::kLowercaseStripAccents:
      // stripping can expose new capitals (U+0130 keeps its case when folded)
      return fold_case(strip_accents(fold_case(word)));
  }
  return std::string(word);
}

std::string_view to_string(NormalizationMode mode) {
  switch (mode) {
    case NormalizationMode::kNone:
      return "none";
    case NormalizationMode::kLowercase:
      return "lower";
    case NormalizationMode::kLowercaseStripAccents:
      return "lower-noaccents";
  }
  return "none";
}

std::optional<NormalizationMode> parse_normalization(std::string_view name) {
  if (name == "none") return NormalizationMode::kNone;
  if (name == "lower") return NormalizationMode::kLowercase;
  if (name == "lower-noaccents") return NormalizationMode::kLowercaseStripAccents;
  return std::nullopt;
}

}  // namespace lexcascade
