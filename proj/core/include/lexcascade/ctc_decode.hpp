#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lexcascade/lexicon.hpp"
#include "lexcascade/postgram.hpp"

namespace lexcascade {

/// A decoded character string with the natural-log probability of the path
/// that produced it.
struct Hypothesis {
  std::string text;
  double score = 0.0;
  /// Classifier that produced the hypothesis; nullopt for the averaged
  /// fallback decoder.
  std::optional<std::size_t> classifier;
};

/// Probabilities are clamped to this floor before taking logs.
inline constexpr double kProbabilityFloor = 1e-30;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double clamped_log(double p);

/// Most probable class per frame; the lowest class index wins ties.
std::vector<ClassIndex> frame_argmax(const Posteriorgram& p);

/// CTC collapse: drop consecutive duplicates (blank included), then blanks.
std::vector<ClassIndex> collapse_path(std::span<const ClassIndex> path);

/// Greedy lexicon-free decode: per-frame argmax, collapse, spell.
Hypothesis best_path_decode(const Posteriorgram& p, std::optional<std::size_t> classifier = std::nullopt);

/// Fewest frames any CTC path emitting `labels` needs: one per label plus a
/// separating blank between equal neighbours.
std::size_t min_ctc_frames(std::span<const ClassIndex> labels);

/// Log score of the single best CTC alignment of `labels` to `p`; kNegInf if
/// no alignment fits in p.frames().
double ctc_max_path_score(const Posteriorgram& p, std::span<const ClassIndex> labels);

struct ScorerOptions {
  /// Share DP work between entries with a common prefix (trie traversal).
  bool share_prefixes = false;
};

/// A lexicon prepared for constrained decoding against one alphabet.
/// Entries that cannot be spelled with the alphabet are unscoreable and
/// skipped. Immutable and thread-safe after construction.
class LexiconScorer {
 public:
  LexiconScorer(const Lexicon& lexicon, std::shared_ptr<const Alphabet> alphabet, ScorerOptions options = {});

  std::size_t scoreable() const { return entries_.size(); }
  std::size_t unscoreable() const { return unscoreable_; }
  const Alphabet& alphabet() const { return *alphabet_; }

  /// Entry with the best max-path score; lexicographically smallest text on
  /// equal scores. Throws NoFeasibleWord if no entry fits in the frame count,
  /// ShapeMismatch if `p` uses a different alphabet.
  Hypothesis decode(const Posteriorgram& p) const;

 private:
  struct Entry {
    std::string text;
    std::vector<ClassIndex> labels;
  };
  struct TrieNode {
    ClassIndex label = kBlank;
    std::vector<std::uint32_t> children;
    std::int64_t entry = -1;
  };

  Hypothesis decode_naive(const Posteriorgram& p, std::span<const double> log_probs) const;
  Hypothesis decode_trie(const Posteriorgram& p, std::span<const double> log_probs) const;

  std::shared_ptr<const Alphabet> alphabet_;
  ScorerOptions options_;
  std::vector<Entry> entries_;
  std::size_t unscoreable_ = 0;
  std::vector<TrieNode> trie_;
  std::size_t max_depth_ = 0;
};

/// One-shot convenience around LexiconScorer.
Hypothesis viterbi_lexicon_decode(const Posteriorgram& p, const Lexicon& lexicon, ScorerOptions options = {});

}  // namespace lexcascade
