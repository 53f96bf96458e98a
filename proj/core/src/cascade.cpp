#include "lexcascade/cascade.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <numeric>
#include <thread>

#include "lexcascade/error.hpp"
#include "lexcascade/normalize.hpp"
#include "lexcascade/rng.hpp"

namespace lexcascade {

std::string_view to_string(FallbackMode mode) { return mode == FallbackMode::kViterbi ? "viterbi" : "none"; }

void CascadeConfig::validate(std::size_t classifiers) const {
  if (classifiers == 0) throw ConfigInvalid("cascade needs at least one classifier");
  if (mnda_long < 1) throw ConfigInvalid("mnda_long must be >= 1");
  if (mnda_short < mnda_long) throw ConfigInvalid("mnda_short must be >= mnda_long");
  if (short_len_threshold < 1) throw ConfigInvalid("short_len_threshold must be >= 1");
  if (fallback == FallbackMode::kViterbi) {
    if (fallback_k < 1) throw ConfigInvalid("fallback k must be >= 1");
    if (fallback_k > classifiers) throw ConfigInvalid("fallback k exceeds the number of classifiers");
  }
  if (!order.empty()) {
    if (order.size() != classifiers) throw ConfigInvalid("order must list every classifier exactly once");
    std::vector<bool> seen(classifiers, false);
    for (std::size_t c : order) {
      if (c >= classifiers || seen[c]) throw ConfigInvalid("order is not a permutation of the classifiers");
      seen[c] = true;
    }
  }
}

std::vector<std::size_t> CascadeConfig::resolved_order(std::size_t classifiers) const {
  if (!order.empty()) return order;
  std::vector<std::size_t> identity(classifiers);
  std::iota(identity.begin(), identity.end(), std::size_t{0});
  return identity;
}

std::uint32_t AgreementTally::add(const std::string& key, bool in_lexicon) {
  auto [it, inserted] = entries_.try_emplace(key);
  Entry& e = it->second;
  if (inserted) e.first = votes_;
  ++votes_;
  ++e.count;
  if (in_lexicon) {
    const bool leads = leader_ == nullptr || e.count > leader_entry_.count ||
                       (e.count == leader_entry_.count && e.first < leader_entry_.first);
    if (leads || leader_ == &it->first) {
      leader_ = &it->first;
      leader_entry_ = e;
    }
  }
  return e.count;
}

std::optional<std::string_view> AgreementTally::leader() const {
  if (leader_ == nullptr) return std::nullopt;
  return std::string_view(*leader_);
}

std::uint32_t AgreementTally::leader_count() const { return leader_ == nullptr ? 0 : leader_entry_.count; }

Decision decide(std::span<const std::string> hypotheses, const Lexicon& lexicon, const CascadeConfig& config) {
  AgreementTally tally;
  for (const auto& h : hypotheses) {
    const std::string key = normalize(h, lexicon.mode());
    tally.add(key, lexicon.contains_normalized(key));
  }
  Decision d;
  if (auto leader = tally.leader()) {
    d.agreement = tally.leader_count();
    if (d.agreement >= config.required_agreement(utf8_length(*leader))) {
      d.accept = true;
      d.text = std::string(*leader);
    }
  }
  return d;
}

StageDecider::StageDecider(const CascadeConfig& config, NormalizationMode mode, std::string word_id,
                           std::string reference)
    : config_(config), mode_(mode) {
  outcome_.word_id = std::move(word_id);
  outcome_.reference = std::move(reference);
}

bool StageDecider::push(std::size_t classifier, std::string text, bool in_lexicon) {
  const std::string key = normalize(text, mode_);
  const std::uint32_t agreement = tally_.add(key, in_lexicon);
  outcome_.trace.push_back(StageRecord{classifier, std::move(text), in_lexicon, agreement});
  if (accepted()) return false;
  const auto leader = tally_.leader();
  if (!leader || tally_.leader_count() < config_.required_agreement(utf8_length(*leader))) return false;
  outcome_.status = DecisionStatus::kAccepted;
  outcome_.text = std::string(*leader);
  outcome_.stage_accepted = outcome_.trace.size();
  outcome_.agreement = tally_.leader_count();
  return true;
}

bool StageDecider::push(std::size_t classifier, std::string text, const Lexicon& lexicon) {
  const bool member = lexicon.contains(text);
  return push(classifier, std::move(text), member);
}

DirectorySource::DirectorySource(std::vector<std::filesystem::path> directories)
    : directories_(std::move(directories)) {}

Posteriorgram DirectorySource::load(std::size_t classifier, const WordSample& word, std::size_t) const {
  const auto path = posteriorgram_path(directories_.at(classifier), word.id);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw MissingPosteriorgram("missing posteriorgram " + path.string());
  }
  return load_posteriorgram(path);
}

void DirectorySource::check_complete(std::span<const WordSample> words) const {
  for (const auto& dir : directories_) {
    for (const auto& w : words) {
      const auto path = posteriorgram_path(dir, w.id);
      std::error_code ec;
      if (!std::filesystem::is_regular_file(path, ec)) {
        throw MissingPosteriorgram("missing posteriorgram " + path.string());
      }
    }
  }
}

std::vector<std::size_t> fallback_pick(std::uint64_t seed, std::string_view word_id, std::size_t k,
                                       std::size_t classifiers) {
  k = std::min(k, classifiers);
  std::vector<std::size_t> pool(classifiers);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  RandomStream rng(mix_seed(seed, fnv1a64(word_id)));
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.index(classifiers - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

Cascade::Cascade(const PosteriorSource& source, const Lexicon& lexicon, CascadeConfig config)
    : source_(source), lexicon_(lexicon), config_(std::move(config)) {
  config_.validate(source_.classifiers());
  order_ = config_.resolved_order(source_.classifiers());
}

DecisionOutcome Cascade::run_word(const WordSample& word, std::size_t word_index) const {
  const auto start = std::chrono::steady_clock::now();
  StageDecider decider(config_, lexicon_.mode(), word.id, word.transcript);
  for (std::size_t stage = 0; stage < order_.size(); ++stage) {
    const std::size_t classifier = order_[stage];
    const Posteriorgram p = source_.load(classifier, word, word_index);
    Hypothesis h = best_path_decode(p, classifier);
    counters_.stage_decodes.fetch_add(1, std::memory_order_relaxed);
    decider.push(classifier, std::move(h.text), lexicon_);
    if (decider.accepted() && config_.early_exit) break;
  }
  DecisionOutcome outcome = std::move(decider.outcome());
  if (outcome.status == DecisionStatus::kRejected && config_.fallback == FallbackMode::kViterbi) {
    fallback(word, word_index, outcome);
  }
  if (config_.record_wall_time) {
    outcome.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return outcome;
}

const LexiconScorer& Cascade::scorer(const std::shared_ptr<const Alphabet>& alphabet) const {
  std::call_once(scorer_once_, [&] {
    scorer_ = std::make_unique<LexiconScorer>(lexicon_, alphabet, ScorerOptions{config_.share_prefixes});
  });
  return *scorer_;
}

std::size_t Cascade::unscoreable_entries() const { return scorer_ ? scorer_->unscoreable() : 0; }

void Cascade::fallback(const WordSample& word, std::size_t word_index, DecisionOutcome& outcome) const {
  outcome.fallback_classifiers = fallback_pick(config_.seed, word.id, config_.fallback_k, source_.classifiers());
  std::vector<Posteriorgram> picked;
  picked.reserve(outcome.fallback_classifiers.size());
  for (std::size_t c : outcome.fallback_classifiers) {
    picked.push_back(source_.load(c, word, word_index));
    counters_.fallback_loads.fetch_add(1, std::memory_order_relaxed);
  }
  const Posteriorgram averaged = average_posteriors(picked);
  try {
    Hypothesis h = scorer(averaged.shared_alphabet()).decode(averaged);
    counters_.fallback_decodes.fetch_add(1, std::memory_order_relaxed);
    outcome.status = DecisionStatus::kFallbackDecoded;
    outcome.text = std::move(h.text);
  } catch (const NoFeasibleWord&) {
    // Nothing in the lexicon fits this many frames; the word stays rejected.
  }
}

std::vector<DecisionOutcome> Cascade::run(std::span<const WordSample> words, unsigned workers) const {
  std::vector<DecisionOutcome> outcomes(words.size());
  parallel_for(words.size(), workers, [&](std::size_t i) { outcomes[i] = run_word(words[i], i); });
  return outcomes;
}

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& task) {
  workers = std::max(1u, workers);
  if (workers == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  const unsigned n = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  threads.reserve(n);
  for (unsigned w = 0; w < n; ++w) {
    threads.emplace_back([&] {
      while (!failed.load(std::memory_order_relaxed)) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) break;
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace lexcascade
