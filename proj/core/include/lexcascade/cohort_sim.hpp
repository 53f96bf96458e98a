#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lexcascade/cascade.hpp"
#include "lexcascade/manifest.hpp"
#include "lexcascade/postgram.hpp"

namespace lexcascade {

/// Parameters of a synthetic cohort of complementary classifiers.
///
/// Every word gets one peak frame per character inside a window of
/// `frames_per_char` blank-dominated frames. Each character of each
/// classifier's output is corrupted with probability `eps` (half
/// substitutions, half deletions). With probability `rho` a classifier takes
/// the word's shared corruption draw for that character instead of its own,
/// so rho = 0 gives independent errors and rho = 1 identical classifiers.
struct CohortSpec {
  std::uint64_t seed = 0;
  std::size_t n_classifiers = 100;
  /// Mass on the dominant class of every frame, in (0, 1].
  double gamma = 0.9;
  std::size_t frames_per_char = 4;
  double eps = 0.0;
  double rho = 0.0;
  /// Labels a substitution may produce; empty means any other label.
  std::vector<std::string> substitution_labels;

  /// Throws ConfigInvalid.
  void validate() const;
};

/// Posteriorgram of `classifier` for `word`; a pure function of the spec,
/// the word id and transcript, and the classifier index. Throws
/// UnknownCharacter when the transcript cannot be spelled with `alphabet`.
Posteriorgram synth_posteriorgram(const CohortSpec& spec, const std::shared_ptr<const Alphabet>& alphabet,
                                  const WordSample& word, std::size_t classifier);

/// Generates posteriorgrams on demand instead of reading files.
class SimulatedSource : public PosteriorSource {
 public:
  SimulatedSource(CohortSpec spec, std::shared_ptr<const Alphabet> alphabet);

  std::size_t classifiers() const override { return spec_.n_classifiers; }
  Posteriorgram load(std::size_t classifier, const WordSample& word, std::size_t word_index) const override;

  const CohortSpec& spec() const { return spec_; }
  const std::shared_ptr<const Alphabet>& alphabet() const { return alphabet_; }

 private:
  CohortSpec spec_;
  std::shared_ptr<const Alphabet> alphabet_;
};

/// Mean word error rate (percent) of best-path decoding for the first
/// `probe_classifiers` classifiers.
double measure_raw_wer(const CohortSpec& spec, const std::shared_ptr<const Alphabet>& alphabet,
                       std::span<const WordSample> words, std::size_t probe_classifiers);

/// Mean pairwise WCSO (percent) among the first `probe_classifiers`.
double measure_mean_wcso(const CohortSpec& spec, const std::shared_ptr<const Alphabet>& alphabet,
                         std::span<const WordSample> words, std::size_t probe_classifiers);

struct CalibrationTargets {
  std::optional<double> raw_wer;
  std::optional<double> mean_wcso;
};

struct CalibrationOptions {
  std::size_t probe_classifiers = 10;
  int max_iterations = 40;
  double wer_tolerance = 0.5;
  double wcso_tolerance = 0.5;
};

/// Bisects eps against the raw WER target, then rho against the WCSO target
/// (single-classifier WER does not depend on rho). Throws TargetUnreachable.
CohortSpec calibrate(CohortSpec spec, const std::shared_ptr<const Alphabet>& alphabet,
                     std::span<const WordSample> words, const CalibrationTargets& targets,
                     const CalibrationOptions& options = {});

/// Distinct pseudo-words over a-z with French-like letter frequencies and
/// word lengths, in generation order.
std::vector<std::string> synthetic_vocabulary(std::uint64_t seed, std::size_t size);

/// `count` samples from `vocabulary` with ids "w000000", ...; a fraction
/// `short_fraction` is drawn from words shorter than `short_threshold`.
std::vector<WordSample> sample_words(std::span<const std::string> vocabulary, std::size_t count, std::uint64_t seed,
                                     double short_fraction = 0.0, std::size_t short_threshold = 4);

/// Writes <out>/manifest.jsonl, <out>/classifiers.txt and one POSTGRAM v1
/// directory <out>/clf_NNN per classifier.
void write_cohort(const CohortSpec& spec, const std::shared_ptr<const Alphabet>& alphabet,
                  std::span<const WordSample> words, const std::filesystem::path& out_dir);

}  // namespace lexcascade
