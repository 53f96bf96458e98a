#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lexcascade {

enum class DecisionStatus : std::uint8_t {
  kAccepted,
  kRejected,
  kFallbackDecoded,
};

std::string_view to_string(DecisionStatus status);
std::optional<DecisionStatus> parse_status(std::string_view name);

/// One classifier's contribution to a word's pass through the cascade.
struct StageRecord {
  std::size_t classifier = 0;
  std::string text;
  bool in_lexicon = false;
  /// Occurrences of this hypothesis (after normalization) among the stages
  /// evaluated so far for the word, this one included.
  std::uint32_t agreement = 0;

  friend bool operator==(const StageRecord&, const StageRecord&) = default;
};

/// Everything the cascade decided about one word.
struct DecisionOutcome {
  std::string word_id;
  std::string reference;
  DecisionStatus status = DecisionStatus::kRejected;
  /// Accepted or fallback-decoded text; empty when rejected.
  std::string text;
  /// 1-based stage at which the word was accepted.
  std::optional<std::size_t> stage_accepted;
  std::uint32_t agreement = 0;
  std::vector<StageRecord> trace;
  /// Classifiers whose posteriors were averaged for the fallback decoder.
  std::vector<std::size_t> fallback_classifiers;
  std::optional<double> wall_ms;

  friend bool operator==(const DecisionOutcome&, const DecisionOutcome&) = default;
};

}  // namespace lexcascade
