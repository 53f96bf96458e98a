#include <benchmark/benchmark.h>

#include <map>
#include <memory>

#include "lexcascade/cohort_sim.hpp"
#include "lexcascade/ctc_decode.hpp"
#include "lexcascade/lexicon.hpp"
#include "lexcascade/rng.hpp"

namespace lc = lexcascade;

namespace {

struct Fixture {
  std::vector<std::string> vocab;
  lc::Lexicon lexicon;
  std::shared_ptr<const lc::Alphabet> alphabet;
  std::vector<lc::Posteriorgram> grams;

  explicit Fixture(std::size_t size) {
    vocab = lc::synthetic_vocabulary(1, size);
    lexicon = lc::build_lexicon(vocab, lc::NormalizationMode::kNone);
    alphabet = std::make_shared<const lc::Alphabet>(lc::Alphabet::from_words(vocab));
    lc::CohortSpec spec;
    spec.n_classifiers = 1;
    spec.eps = 0.1;
    for (const auto& w : lc::sample_words(vocab, 64, 2)) grams.push_back(lc::synth_posteriorgram(spec, alphabet, w, 0));
  }
};

const Fixture& fixture(std::size_t size) {
  static std::map<std::size_t, std::unique_ptr<Fixture>> cache;
  auto& f = cache[size];
  if (!f) f = std::make_unique<Fixture>(size);
  return *f;
}

void BM_LexiconContains(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  lc::RandomStream rng(3);
  std::vector<std::string> queries;
  for (int i = 0; i < 4096; ++i) {
    queries.push_back(i % 2 ? f.vocab[rng.index(f.vocab.size())] : f.vocab[rng.index(f.vocab.size())] + "q");
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.lexicon.contains(queries[i++ & 4095]));
  }
}
BENCHMARK(BM_LexiconContains)->Arg(10'000)->Arg(1'000'000);

void BM_BestPath(benchmark::State& state) {
  const auto& f = fixture(5000);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lc::best_path_decode(f.grams[i++ % f.grams.size()]));
  }
}
BENCHMARK(BM_BestPath);

void BM_Viterbi(benchmark::State& state) {
  const auto& f = fixture(5000);
  const lc::LexiconScorer scorer(f.lexicon, f.alphabet, {.share_prefixes = state.range(0) != 0});
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(scorer.decode(f.grams[i++ % f.grams.size()]));
  }
  state.SetLabel(state.range(0) ? "trie" : "naive");
}
BENCHMARK(BM_Viterbi)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
