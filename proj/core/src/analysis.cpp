#include "lexcascade/cascade.hpp"

#include <algorithm>
#include <numeric>

#include "lexcascade/error.hpp"
#include "lexcascade/metrics.hpp"
#include "lexcascade/normalize.hpp"

namespace lexcascade {
namespace {

// Most frequent key of a row, optionally restricted to lexicon members;
// earliest first occurrence on ties.
std::optional<std::string> vote(const std::vector<std::string>& keys, const std::vector<bool>& members,
                                bool members_only) {
  std::optional<std::string> best;
  std::uint32_t best_count = 0;
  std::unordered_map<std::string, std::uint32_t> counts;
  std::vector<const std::string*> first_seen;
  for (std::size_t c = 0; c < keys.size(); ++c) {
    if (members_only && !members[c]) continue;
    if (counts[keys[c]]++ == 0) first_seen.push_back(&keys[c]);
  }
  for (const std::string* k : first_seen) {
    const std::uint32_t n = counts[*k];
    if (n > best_count) {
      best_count = n;
      best = *k;
    }
  }
  return best;
}

}  // namespace

HypothesisTable HypothesisTable::decode_all(const PosteriorSource& source, std::span<const WordSample> words,
                                            const Lexicon& lexicon, std::span<const std::size_t> order,
                                            unsigned workers) {
  HypothesisTable table;
  table.classifiers.assign(order.begin(), order.end());
  table.word_ids.resize(words.size());
  table.references.resize(words.size());
  table.texts.assign(words.size(), std::vector<std::string>(order.size()));
  table.in_lexicon.assign(words.size(), std::vector<bool>(order.size()));
  parallel_for(words.size(), workers, [&](std::size_t w) {
    table.word_ids[w] = words[w].id;
    table.references[w] = words[w].transcript;
    std::vector<bool> members(order.size());
    for (std::size_t c = 0; c < order.size(); ++c) {
      std::string text = best_path_decode(source.load(order[c], words[w], w)).text;
      members[c] = lexicon.contains(text);
      table.texts[w][c] = std::move(text);
    }
    table.in_lexicon[w] = std::move(members);
  });
  return table;
}

HypothesisTable HypothesisTable::from_outcomes(std::span<const DecisionOutcome> outcomes) {
  HypothesisTable table;
  if (outcomes.empty()) return table;
  for (const auto& r : outcomes.front().trace) table.classifiers.push_back(r.classifier);
  for (const auto& o : outcomes) {
    if (o.trace.size() != table.classifiers.size()) {
      throw InvariantViolation("word '" + o.word_id + "' has an incomplete trace; rerun without early exit");
    }
    std::vector<std::string> texts;
    std::vector<bool> members;
    for (std::size_t c = 0; c < o.trace.size(); ++c) {
      if (o.trace[c].classifier != table.classifiers[c]) {
        throw InvariantViolation("word '" + o.word_id + "' was evaluated in a different classifier order");
      }
      texts.push_back(o.trace[c].text);
      members.push_back(o.trace[c].in_lexicon);
    }
    table.word_ids.push_back(o.word_id);
    table.references.push_back(o.reference);
    table.texts.push_back(std::move(texts));
    table.in_lexicon.push_back(std::move(members));
  }
  return table;
}

std::vector<DecisionOutcome> replay_cascade(const HypothesisTable& table, std::span<const std::size_t> columns,
                                            const CascadeConfig& config, NormalizationMode mode) {
  std::vector<DecisionOutcome> outcomes;
  outcomes.reserve(table.words());
  for (std::size_t w = 0; w < table.words(); ++w) {
    StageDecider decider(config, mode, table.word_ids[w], table.references[w]);
    for (std::size_t col : columns) {
      decider.push(table.classifiers.at(col), table.texts[w][col], static_cast<bool>(table.in_lexicon[w][col]));
      if (decider.accepted() && config.early_exit) break;
    }
    outcomes.push_back(std::move(decider.outcome()));
  }
  return outcomes;
}

std::vector<double> oracle_recognition(const HypothesisTable& table, NormalizationMode mode) {
  // hits[c]: words whose first correct hypothesis is in column c
  std::vector<std::size_t> hits(table.columns() + 1, 0);
  for (std::size_t w = 0; w < table.words(); ++w) {
    const std::string ref = normalize(table.references[w], mode);
    for (std::size_t c = 0; c < table.columns(); ++c) {
      if (normalize(table.texts[w][c], mode) == ref) {
        ++hits[c];
        break;
      }
    }
  }
  std::vector<double> curve(table.columns());
  std::size_t covered = 0;
  for (std::size_t k = 0; k < table.columns(); ++k) {
    covered += hits[k];
    curve[k] = table.words() == 0 ? 0.0 : 100.0 * static_cast<double>(covered) / static_cast<double>(table.words());
  }
  return curve;
}

VoteBaselines majority_vote_baselines(const HypothesisTable& table, NormalizationMode mode) {
  std::size_t plain = 0;
  std::size_t verified = 0;
  for (std::size_t w = 0; w < table.words(); ++w) {
    const std::string ref = normalize(table.references[w], mode);
    std::vector<std::string> keys;
    keys.reserve(table.columns());
    for (const auto& t : table.texts[w]) keys.push_back(normalize(t, mode));
    if (auto p = vote(keys, table.in_lexicon[w], false); p && *p == ref) ++plain;
    if (auto v = vote(keys, table.in_lexicon[w], true); v && *v == ref) ++verified;
  }
  const double n = static_cast<double>(std::max<std::size_t>(table.words(), 1));
  return VoteBaselines{100.0 * static_cast<double>(plain) / n, 100.0 * static_cast<double>(verified) / n};
}

std::vector<double> deletion_rates(const PosteriorSource& source, std::span<const WordSample> words,
                                   NormalizationMode mode, unsigned workers) {
  const std::size_t n = source.classifiers();
  std::vector<std::vector<std::string>> decoded(n, std::vector<std::string>(words.size()));
  parallel_for(words.size(), workers, [&](std::size_t w) {
    for (std::size_t c = 0; c < n; ++c) decoded[c][w] = best_path_decode(source.load(c, words[w], w)).text;
  });
  std::vector<std::string> references;
  references.reserve(words.size());
  for (const auto& w : words) references.push_back(w.transcript);
  std::vector<double> rates(n);
  for (std::size_t c = 0; c < n; ++c) rates[c] = deletion_rate(decoded[c], references, mode);
  return rates;
}

std::vector<std::size_t> order_by_rates(std::span<const double> rates) {
  std::vector<std::size_t> order(rates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rates[a] < rates[b]; });
  return order;
}

std::vector<std::size_t> order_by_deletion(const PosteriorSource& source, std::span<const WordSample> validation,
                                           NormalizationMode mode, unsigned workers) {
  return order_by_rates(deletion_rates(source, validation, mode, workers));
}

}  // namespace lexcascade
