#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "lexcascade/cascade.hpp"
#include "lexcascade/metrics.hpp"

namespace lexcascade {

enum class RemovalReason : std::uint8_t { kNoNewAcceptances, kExcessFalseAcceptances };

std::string_view to_string(RemovalReason reason);
std::optional<RemovalReason> parse_removal_reason(std::string_view name);

struct Removal {
  std::size_t classifier = 0;
  RemovalReason reason = RemovalReason::kNoNewAcceptances;

  friend bool operator==(const Removal&, const Removal&) = default;
};

struct PruneOptions {
  /// A classifier whose wrong in-lexicon hypotheses exceed this count is
  /// removed.
  std::size_t fa_threshold = 0;
  /// Re-run the cascade after each tentative removal instead of using
  /// decode coverage.
  bool iterative = false;
};

struct PruneReport {
  /// Classifier indices in cascade order.
  std::vector<std::size_t> kept;
  /// In the order they were removed (backward over the cascade).
  std::vector<Removal> removed;
  RunMetrics before;
  RunMetrics after;
  std::size_t fa_threshold = 0;
  bool iterative = false;
};

/// 0.5% of the validation words, rounded down.
std::size_t default_fa_threshold(std::size_t validation_words);

/// Backward pass over the table's columns (cascade order). A classifier is
/// removed for excess false acceptances when its wrong in-lexicon
/// hypotheses exceed the threshold; otherwise for no new acceptances when
/// every word it decodes correctly is also decoded correctly by an earlier
/// classifier (iterative mode: when dropping it does not lower the number of
/// correct acceptances of the re-run cascade). Metrics come from replaying
/// the cascade on the recorded hypotheses. Throws EmptyResult.
PruneReport prune(const HypothesisTable& table, const CascadeConfig& config, NormalizationMode mode,
                  const PruneOptions& options);

}  // namespace lexcascade
