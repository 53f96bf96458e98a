#include "lexcascade/cohort_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "lexcascade/binary_io.hpp"
#include "lexcascade/ctc_decode.hpp"
#include "lexcascade/error.hpp"
#include "lexcascade/lexicon.hpp"
#include "lexcascade/metrics.hpp"
#include "lexcascade/rng.hpp"

namespace lexcascade {
namespace {

enum class Corruption { kNone, kSubstitution, kDeletion };

struct Event {
  Corruption kind = Corruption::kNone;
  ClassIndex target = kBlank;
};

struct Draw {
  double corrupt = 1.0;
  double kind = 0.0;
  double target = 0.0;

  static Draw from(RandomStream& rng) {
    Draw d;
    d.corrupt = rng.uniform();
    d.kind = rng.uniform();
    d.target = rng.uniform();
    return d;
  }
};

Event resolve(const Draw& d, double eps, ClassIndex truth, const std::vector<ClassIndex>& pool) {
  if (!(d.corrupt < eps)) return {Corruption::kNone, truth};
  std::vector<ClassIndex> others;
  others.reserve(pool.size());
  for (ClassIndex c : pool) {
    if (c != truth) others.push_back(c);
  }
  if (d.kind < 0.5 && !others.empty()) {
    const auto i = std::min(others.size() - 1, static_cast<std::size_t>(d.target * static_cast<double>(others.size())));
    return {Corruption::kSubstitution, others[i]};
  }
  return {Corruption::kDeletion, kBlank};
}

std::vector<ClassIndex> substitution_pool(const CohortSpec& spec, const Alphabet& alphabet) {
  std::vector<ClassIndex> pool;
  if (spec.substitution_labels.empty()) {
    for (ClassIndex c = 1; c < alphabet.size(); ++c) pool.push_back(c);
    return pool;
  }
  for (const auto& label : spec.substitution_labels) {
    auto c = alphabet.find(label);
    if (!c) throw UnknownCharacter("substitution label '" + label + "' is not in the alphabet");
    pool.push_back(*c);
  }
  return pool;
}

// French-like letter frequencies (a..z) and word-length weights (1..16).
constexpr std::array<double, 26> kLetterWeights = {7.6, 0.9, 3.3, 3.7, 14.7, 1.1, 0.9, 0.7, 7.5, 0.5, 0.05, 5.5, 3.0,
                                                   7.1, 5.8, 3.0, 1.4, 6.6, 7.9, 7.2, 6.3, 1.6, 0.05, 0.4, 0.3, 0.1};
constexpr std::array<double, 16> kLengthWeights = {0.1, 0.9, 3, 6, 9, 12, 13, 13, 12, 10, 8, 6, 4, 2, 1, 0.5};

template <std::size_t N>
std::size_t pick_weighted(RandomStream& rng, const std::array<double, N>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < N; ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return N - 1;
}

std::vector<std::string> decode_classifier(const CohortSpec& spec, const std::shared_ptr<const Alphabet>& alphabet,
                                           std::span<const WordSample> words, std::size_t classifier) {
  std::vector<std::string> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(best_path_decode(synth_posteriorgram(spec, alphabet, w, classifier)).text);
  return out;
}

template <typename Measure>
double bisect(double lo, double hi, double target, double tolerance, int iterations, Measure measure,
              const char* what) {
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double m = measure(mid);
    if (std::abs(m - target) <= tolerance) return mid;
    if (m < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw TargetUnreachable(std::string("calibration of ") + what + " did not converge");
}

}  // namespace

void CohortSpec::validate() const {
  if (n_classifiers == 0) throw ConfigInvalid("cohort needs at least one classifier");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigInvalid("gamma must be in (0, 1]");
  if (frames_per_char < 2) throw ConfigInvalid("frames per character must be >= 2");
  if (!(eps >= 0.0 && eps < 1.0)) throw ConfigInvalid("eps must be in [0, 1)");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigInvalid("rho must be in [0, 1]");
}

Posteriorgram synth_posteriorgram(const CohortSpec& spec, const std::shared_ptr<const Alphabet>& alphabet,
                                  const WordSample& word, std::size_t classifier) {
  auto truth = alphabet->tokenize(word.transcript);
  if (!truth) throw UnknownCharacter("'" + word.transcript + "' uses characters outside the alphabet");
  if (truth->empty()) throw InvariantViolation("cannot synthesize an empty word");
  const auto pool = substitution_pool(spec, *alphabet);

  const std::uint64_t word_seed = mix_seed(spec.seed, fnv1a64(word.id));
  RandomStream shared(mix_seed(word_seed, 0));
  RandomStream own(mix_seed(word_seed, static_cast<std::uint64_t>(classifier) + 1));

  const std::size_t f = spec.frames_per_char;
  const std::size_t frames = f * truth->size();
  const std::size_t classes = alphabet->size();
  // Dominant class per frame: blank except at each character's peak.
  std::vector<ClassIndex> dominant(frames, kBlank);
  for (std::size_t j = 0; j < truth->size(); ++j) {
    const Draw shared_draw = Draw::from(shared);
    const double use_shared = own.uniform();
    const Draw own_draw = Draw::from(own);
    const Draw& d = use_shared < spec.rho ? shared_draw : own_draw;
    const Event e = resolve(d, spec.eps, (*truth)[j], pool);
    dominant[j * f + f / 2] = e.kind == Corruption::kDeletion ? kBlank : e.target;
  }

  // Off-dominant mass is spread by weights from the shared stream, so
  // classifiers that agree on the dominant classes emit identical rows.
  std::vector<double> probs(frames * classes, 0.0);
  std::vector<double> weights(classes);
  for (std::size_t t = 0; t < frames; ++t) {
    double total = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      weights[c] = 1.0 - shared.uniform();  // (0, 1]
      if (c != dominant[t]) total += weights[c];
    }
    double* row = probs.data() + t * classes;
    for (std::size_t c = 0; c < classes; ++c) {
      row[c] = c == dominant[t] ? spec.gamma : (1.0 - spec.gamma) * weights[c] / total;
    }
  }
  return Posteriorgram(alphabet, frames, std::move(probs));
}

SimulatedSource::SimulatedSource(CohortSpec spec, std::shared_ptr<const Alphabet> alphabet)
    : spec_(std::move(spec)), alphabet_(std::move(alphabet)) {
  spec_.validate();
}

Posteriorgram SimulatedSource::load(std::size_t classifier, const WordSample& word, std::size_t) const {
  if (classifier >= spec_.n_classifiers) throw MissingPosteriorgram("no simulated classifier " + std::to_string(classifier));
  return synth_posteriorgram(spec_, alphabet_, word, classifier);
}

double measure_raw_wer(const CohortSpec& spec, const std::shared_ptr<const Alphabet>& alphabet,
                       std::span<const WordSample> words, std::size_t probe_classifiers) {
  if (words.empty() || probe_classifiers == 0) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t c = 0; c < probe_classifiers; ++c) {
    const auto texts = decode_classifier(spec, alphabet, words, c);
    for (std::size_t w = 0; w < words.size(); ++w) {
      if (texts[w] != words[w].transcript) ++wrong;
    }
  }
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(words.size() * probe_classifiers);
}

double measure_mean_wcso(const CohortSpec& spec, const std::shared_ptr<const Alphabet>& alphabet,
                         std::span<const WordSample> words, std::size_t probe_classifiers) {
  std::vector<ClassifierOutputs> cohort(std::max<std::size_t>(probe_classifiers, 2));
  for (std::size_t c = 0; c < cohort.size(); ++c) {
    const auto texts = decode_classifier(spec, alphabet, words, c);
    for (std::size_t w = 0; w < words.size(); ++w) cohort[c].emplace(words[w].id, texts[w]);
  }
  return wcso_series(cohort).mean;
}

CohortSpec calibrate(CohortSpec spec, const std::shared_ptr<const Alphabet>& alphabet,
                     std::span<const WordSample> words, const CalibrationTargets& targets,
                     const CalibrationOptions& options) {
  spec.validate();
  const std::size_t probes = std::max<std::size_t>(options.probe_classifiers, 2);
  if (targets.raw_wer) {
    const double target = *targets.raw_wer;
    auto wer_at = [&](double eps) {
      CohortSpec s = spec;
      s.eps = eps;
      return measure_raw_wer(s, alphabet, words, probes);
    };
    constexpr double kMaxEps = 0.95;
    if (target <= 0.0) {
      spec.eps = 0.0;
    } else if (wer_at(kMaxEps) < target - options.wer_tolerance) {
      throw TargetUnreachable("raw WER target above what eps < 1 can produce");
    } else {
      spec.eps = bisect(0.0, kMaxEps, target, options.wer_tolerance, options.max_iterations, wer_at, "eps");
    }
  }
  if (targets.mean_wcso) {
    const double target = *targets.mean_wcso;
    auto wcso_at = [&](double rho) {
      CohortSpec s = spec;
      s.rho = rho;
      return measure_mean_wcso(s, alphabet, words, probes);
    };
    if (target >= 100.0) {
      spec.rho = 1.0;
    } else if (wcso_at(0.0) > target + options.wcso_tolerance) {
      throw TargetUnreachable("WCSO target below the independent-classifier similarity");
    } else {
      spec.rho = bisect(0.0, 1.0, target, options.wcso_tolerance, options.max_iterations, wcso_at, "rho");
    }
  }
  return spec;
}

std::vector<std::string> synthetic_vocabulary(std::uint64_t seed, std::size_t size) {
  RandomStream rng(mix_seed(seed, fnv1a64("vocabulary")));
  LexiconBuilder unique(NormalizationMode::kNone, size);
  std::vector<std::string> words;
  words.reserve(size);
  std::string w;
  while (words.size() < size) {
    const std::size_t length = pick_weighted(rng, kLengthWeights) + 1;
    w.clear();
    for (std::size_t i = 0; i < length; ++i) w.push_back(static_cast<char>('a' + pick_weighted(rng, kLetterWeights)));
    if (unique.add(w)) words.push_back(w);
  }
  return words;
}

std::vector<WordSample> sample_words(std::span<const std::string> vocabulary, std::size_t count, std::uint64_t seed,
                                     double short_fraction, std::size_t short_threshold) {
  std::vector<std::size_t> short_words;
  std::vector<std::size_t> long_words;
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    (utf8_length(vocabulary[i]) < short_threshold ? short_words : long_words).push_back(i);
  }
  if (vocabulary.empty()) throw InvariantViolation("cannot sample from an empty vocabulary");
  RandomStream rng(mix_seed(seed, fnv1a64("samples")));
  std::vector<WordSample> out;
  out.reserve(count);
  char id[32];
  for (std::size_t i = 0; i < count; ++i) {
    const bool want_short = rng.uniform() < short_fraction;
    const auto& bucket = (want_short && !short_words.empty()) || long_words.empty() ? short_words : long_words;
    std::snprintf(id, sizeof id, "w%06zu", i);
    out.push_back(WordSample{id, vocabulary[bucket[rng.index(bucket.size())]]});
  }
  return out;
}

void write_cohort(const CohortSpec& spec, const std::shared_ptr<const Alphabet>& alphabet,
                  std::span<const WordSample> words, const std::filesystem::path& out_dir) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  std::string list;
  char name[32];
  for (std::size_t c = 0; c < spec.n_classifiers; ++c) {
    std::snprintf(name, sizeof name, "clf_%03zu", c);
    const auto dir = out_dir / name;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    for (const auto& w : words) save_posteriorgram(synth_posteriorgram(spec, alphabet, w, c), posteriorgram_path(dir, w.id));
    list += name;
    list += '\n';
  }
  write_file_atomic(out_dir / "classifiers.txt", list);
  write_file_atomic(out_dir / "manifest.jsonl", encode_manifest(std::vector<WordSample>(words.begin(), words.end())));
}

}  // namespace lexcascade
