#pragma once

#include <atomic>
#include <functional>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lexcascade/ctc_decode.hpp"
#include "lexcascade/lexicon.hpp"
#include "lexcascade/manifest.hpp"
#include "lexcascade/outcome.hpp"
#include "lexcascade/postgram.hpp"

namespace lexcascade {

enum class FallbackMode : std::uint8_t { kNone, kViterbi };

std::string_view to_string(FallbackMode mode);

struct CascadeConfig {
  /// Minimum number of decision agreements for words of length >=
  /// short_len_threshold, and for shorter words.
  std::uint32_t mnda_long = 3;
  std::uint32_t mnda_short = 10;
  std::uint32_t short_len_threshold = 4;
  FallbackMode fallback = FallbackMode::kNone;
  /// Number of randomly chosen classifiers averaged for the fallback.
  std::uint32_t fallback_k = 10;
  /// Classifier permutation; empty means identity.
  std::vector<std::size_t> order;
  /// When false, every stage is decoded for every word (the decision is
  /// unchanged; traces become complete, as pruning requires).
  bool early_exit = true;
  std::uint64_t seed = 0;
  bool share_prefixes = false;
  bool record_wall_time = false;

  /// Throws ConfigInvalid.
  void validate(std::size_t classifiers) const;
  std::uint32_t required_agreement(std::size_t length) const {
    return length < short_len_threshold ? mnda_short : mnda_long;
  }
  std::vector<std::size_t> resolved_order(std::size_t classifiers) const;
};

struct Decision {
  bool accept = false;
  std::string text;
  std::uint32_t agreement = 0;
};

/// Per-word vote state. Hypotheses are grouped by their normalized form; the
/// leader is the lexicon member with most votes, earliest first occurrence
/// on ties.
class AgreementTally {
 public:
  /// Returns the running count of `key`, this vote included.
  std::uint32_t add(const std::string& key, bool in_lexicon);

  std::optional<std::string_view> leader() const;
  std::uint32_t leader_count() const;

 private:
  struct Entry {
    std::uint32_t count = 0;
    std::size_t first = 0;
  };
  std::unordered_map<std::string, Entry> entries_;
  std::size_t votes_ = 0;
  const std::string* leader_ = nullptr;
  Entry leader_entry_;
};

/// The verification + agreement rule applied to the hypotheses of stages
/// 1..k. Accepts the leading lexicon member iff its count reaches the
/// threshold for its length.
Decision decide(std::span<const std::string> hypotheses, const Lexicon& lexicon, const CascadeConfig& config);

/// Drives one word through successive stages and fills its outcome.
class StageDecider {
 public:
  StageDecider(const CascadeConfig& config, NormalizationMode mode, std::string word_id, std::string reference);

  /// Feeds the next stage's hypothesis. Returns true if this stage accepted
  /// the word.
  bool push(std::size_t classifier, std::string text, bool in_lexicon);
  /// Same, with membership computed against `lexicon`.
  bool push(std::size_t classifier, std::string text, const Lexicon& lexicon);

  bool accepted() const { return outcome_.status == DecisionStatus::kAccepted; }
  DecisionOutcome& outcome() { return outcome_; }

 private:
  const CascadeConfig& config_;
  NormalizationMode mode_;
  AgreementTally tally_;
  DecisionOutcome outcome_;
};

/// Where stage posteriorgrams come from.
class PosteriorSource {
 public:
  virtual ~PosteriorSource() = default;
  virtual std::size_t classifiers() const = 0;
  /// Throws MissingPosteriorgram when the classifier has no output for the
  /// word.
  virtual Posteriorgram load(std::size_t classifier, const WordSample& word, std::size_t word_index) const = 0;
};

/// POSTGRAM v1 files laid out as "<classifier dir>/<word id>.pgm1".
class DirectorySource : public PosteriorSource {
 public:
  explicit DirectorySource(std::vector<std::filesystem::path> directories);

  std::size_t classifiers() const override { return directories_.size(); }
  Posteriorgram load(std::size_t classifier, const WordSample& word, std::size_t word_index) const override;

  /// Throws MissingPosteriorgram naming the first absent file.
  void check_complete(std::span<const WordSample> words) const;

 private:
  std::vector<std::filesystem::path> directories_;
};

/// Load/decode counters, readable while a run is in flight.
struct CascadeCounters {
  std::atomic<std::uint64_t> stage_decodes{0};
  std::atomic<std::uint64_t> fallback_loads{0};
  std::atomic<std::uint64_t> fallback_decodes{0};
};

/// The verification cascade: each word runs through the ordered classifiers
/// until the decision rule accepts; terminal rejects optionally go to the
/// averaged-posterior Viterbi fallback.
class Cascade {
 public:
  /// Throws ConfigInvalid.
  Cascade(const PosteriorSource& source, const Lexicon& lexicon, CascadeConfig config);

  DecisionOutcome run_word(const WordSample& word, std::size_t word_index) const;

  /// Words are evaluated independently on `workers` threads; outcomes are
  /// returned in input order, so the result does not depend on scheduling.
  std::vector<DecisionOutcome> run(std::span<const WordSample> words, unsigned workers = 1) const;

  const CascadeConfig& config() const { return config_; }
  const CascadeCounters& counters() const { return counters_; }
  /// Lexicon entries the fallback could not spell with the alphabet (0 until
  /// the fallback first runs).
  std::size_t unscoreable_entries() const;

 private:
  void fallback(const WordSample& word, std::size_t word_index, DecisionOutcome& outcome) const;
  const LexiconScorer& scorer(const std::shared_ptr<const Alphabet>& alphabet) const;

  const PosteriorSource& source_;
  const Lexicon& lexicon_;
  CascadeConfig config_;
  std::vector<std::size_t> order_;
  mutable CascadeCounters counters_;
  mutable std::once_flag scorer_once_;
  mutable std::unique_ptr<LexiconScorer> scorer_;
};

/// Classifiers picked for the fallback of `word_id`: `k` distinct indices in
/// [0, classifiers), ascending, a pure function of (seed, word id).
std::vector<std::size_t> fallback_pick(std::uint64_t seed, std::string_view word_id, std::size_t k,
                                       std::size_t classifiers);

/// Best-path hypotheses of every (word, classifier) pair, in a fixed column
/// order, with lexicon membership.
struct HypothesisTable {
  std::vector<std::string> word_ids;
  std::vector<std::string> references;
  /// Column -> classifier index.
  std::vector<std::size_t> classifiers;
  /// texts[word][column]
  std::vector<std::vector<std::string>> texts;
  std::vector<std::vector<bool>> in_lexicon;

  std::size_t words() const { return word_ids.size(); }
  std::size_t columns() const { return classifiers.size(); }

  /// Decodes everything, with columns in `order`.
  static HypothesisTable decode_all(const PosteriorSource& source, std::span<const WordSample> words,
                                    const Lexicon& lexicon, std::span<const std::size_t> order, unsigned workers = 1);
  /// From outcomes of a run without early exit; every trace must list the
  /// same classifiers. Throws InvariantViolation otherwise.
  static HypothesisTable from_outcomes(std::span<const DecisionOutcome> outcomes);
};

/// Cascade decisions over recorded hypotheses, using only `columns` (in the
/// given order). No fallback; traces stop at acceptance when
/// config.early_exit is set.
std::vector<DecisionOutcome> replay_cascade(const HypothesisTable& table, std::span<const std::size_t> columns,
                                            const CascadeConfig& config, NormalizationMode mode);

/// Percentage of words with at least one correct hypothesis among the first
/// k columns, for k = 1..columns.
std::vector<double> oracle_recognition(const HypothesisTable& table, NormalizationMode mode);

struct VoteBaselines {
  double plain_vote_wrr = 0.0;
  double verified_vote_wrr = 0.0;
};

/// Majority vote over all columns, and majority vote restricted to lexicon
/// members; ties go to the earliest column.
VoteBaselines majority_vote_baselines(const HypothesisTable& table, NormalizationMode mode);

/// Per-classifier deletion rate of best-path decodes against references.
std::vector<double> deletion_rates(const PosteriorSource& source, std::span<const WordSample> words,
                                   NormalizationMode mode, unsigned workers = 1);

/// Classifier indices sorted by ascending rate, ties by index.
std::vector<std::size_t> order_by_rates(std::span<const double> rates);

/// deletion_rates followed by order_by_rates.
std::vector<std::size_t> order_by_deletion(const PosteriorSource& source, std::span<const WordSample> validation,
                                           NormalizationMode mode, unsigned workers = 1);

/// Runs `task(i)` for i in [0, count) on `workers` threads; rethrows the
/// first exception after all threads finish.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& task);

}  // namespace lexcascade
