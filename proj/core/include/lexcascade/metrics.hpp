#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lexcascade/normalize.hpp"
#include "lexcascade/outcome.hpp"

namespace lexcascade {

/// Counts of a minimal unit-cost edit script turning a reference into a
/// hypothesis. Deletions are reference symbols the hypothesis omits.
struct EditAlignment {
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;

  std::size_t distance() const { return substitutions + insertions + deletions; }
  friend bool operator==(const EditAlignment&, const EditAlignment&) = default;
};

/// Among minimal scripts, the backtrace from the end prefers a diagonal step
/// (match or substitution), then a deletion, then an insertion.
EditAlignment levenshtein_align(std::u32string_view reference, std::u32string_view hypothesis);
/// Same, tokenized by Unicode scalar value.
EditAlignment levenshtein_align_utf8(std::string_view reference, std::string_view hypothesis);

/// Word-level rates are percentages of all words and sum to 100. A word is
/// correct when its normalized decided text equals its normalized reference.
struct RunMetrics {
  std::size_t words = 0;
  std::size_t accepted = 0;
  std::size_t fallback_decoded = 0;
  std::size_t rejected = 0;
  std::size_t correct = 0;
  std::size_t wrong = 0;
  std::size_t false_acceptances = 0;
  double wrr = 0.0;
  double wer = 0.0;
  double wjr = 0.0;
  /// Character errors over decided words only, in percent of their
  /// reference characters.
  double cer = 0.0;
  std::size_t char_errors = 0;
  std::size_t reference_chars = 0;
  /// CER over all words; rejected words are scored with their first-stage
  /// hypothesis.
  double cer_all_words = 0.0;
  std::size_t char_errors_all = 0;
  std::size_t reference_chars_all = 0;
};

/// Throws MissingReference when an outcome's word id is absent from
/// `references`.
RunMetrics run_metrics(std::span<const DecisionOutcome> outcomes,
                       const std::unordered_map<std::string, std::string>& references,
                       NormalizationMode mode);

/// References carried by the outcomes themselves.
std::unordered_map<std::string, std::string> reference_map(std::span<const DecisionOutcome> outcomes);

/// Length bins for false-acceptance estimates, given by ascending lower
/// bounds; the last bin is open-ended.
struct LengthBins {
  std::vector<std::size_t> lower_bounds;

  /// {1}, {2}, ..., {10}, {11+}
  static LengthBins standard();
  std::size_t bin_of(std::size_t length) const;
};

struct PfaBin {
  std::size_t min_length = 0;
  std::optional<std::size_t> max_length;
  std::size_t trials = 0;
  std::size_t false_acceptances = 0;
  double estimate = 0.0;
};

struct PfaTable {
  std::uint32_t required_agreement = 1;
  std::vector<PfaBin> bins;
  PfaBin overall;
};

/// Probability that a hypothesis is wrong yet a lexicon member, binned by
/// reference length (scalar values, normalized). Every stage record is one
/// trial; it is a false acceptance when it is wrong, in the lexicon and has
/// reached `required_agreement`.
PfaTable estimate_pfa(std::span<const DecisionOutcome> outcomes, NormalizationMode mode,
                      const LengthBins& bins = LengthBins::standard(), std::uint32_t required_agreement = 1);

/// Pools the bins whose lengths fall in [min_length, max_length].
PfaBin pool_bins(const PfaTable& table, std::size_t min_length, std::size_t max_length);

/// Word id -> decoded text for one classifier.
using ClassifierOutputs = std::map<std::string, std::string>;

/// Percentage of words with identical outputs. Throws WordSetMismatch when
/// the two output sets cover different words.
double wcso(const ClassifierOutputs& a, const ClassifierOutputs& b);

struct WcsoPair {
  std::size_t a = 0;
  std::size_t b = 0;
  double value = 0.0;
};

struct WcsoSeries {
  std::vector<WcsoPair> pairwise;
  /// WCSO of classifiers (i, i+1), indexed from 1.
  std::vector<double> consecutive;
  double mean = 0.0;
  /// Population standard deviation, same unit (percent) as the mean.
  double stddev = 0.0;
  /// Least-squares slope of `consecutive` against its 1-based index.
  double slope = 0.0;
};

/// Requires at least two classifiers (throws InvariantViolation otherwise).
WcsoSeries wcso_series(std::span<const ClassifierOutputs> cohort);

/// Ordinary least-squares slope; 0 when x has no spread.
double ols_slope(std::span<const double> x, std::span<const double> y);

/// Deleted reference characters over total reference characters.
double deletion_rate(std::span<const std::string> hypotheses, std::span<const std::string> references,
                     NormalizationMode mode);

}  // namespace lexcascade
