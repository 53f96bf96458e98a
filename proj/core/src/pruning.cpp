#include "lexcascade/pruning.hpp"

#include <numeric>

#include "lexcascade/error.hpp"

namespace lexcascade {
namespace {

RunMetrics replay_metrics(const HypothesisTable& table, std::span<const std::size_t> columns,
                          const CascadeConfig& config, NormalizationMode mode) {
  const auto outcomes = replay_cascade(table, columns, config, mode);
  return run_metrics(outcomes, reference_map(outcomes), mode);
}

}  // namespace

std::string_view to_string(RemovalReason reason) {
  switch (reason) {
    case RemovalReason::kNoNewAcceptances:
      return "no_new_acceptances";
    case RemovalReason::kExcessFalseAcceptances:
      return "excess_false_acceptances";
  }
  return "unknown";
}

std::optional<RemovalReason> parse_removal_reason(std::string_view name) {
  if (name == "no_new_acceptances") return RemovalReason::kNoNewAcceptances;
  if (name == "excess_false_acceptances") return RemovalReason::kExcessFalseAcceptances;
  return std::nullopt;
}

std::size_t default_fa_threshold(std::size_t validation_words) { return validation_words * 5 / 1000; }

PruneReport prune(const HypothesisTable& table, const CascadeConfig& config, NormalizationMode mode,
                  const PruneOptions& options) {
  const std::size_t n = table.columns();
  const std::size_t words = table.words();
  CascadeConfig replay = config;
  replay.early_exit = true;

  std::vector<std::string> refs(words);
  for (std::size_t w = 0; w < words; ++w) refs[w] = normalize(table.references[w], mode);
  // correct[w][c]: column c's hypothesis equals the reference.
  std::vector<std::vector<bool>> correct(words, std::vector<bool>(n));
  for (std::size_t w = 0; w < words; ++w) {
    for (std::size_t c = 0; c < n; ++c) correct[w][c] = normalize(table.texts[w][c], mode) == refs[w];
  }

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  PruneReport report;
  report.fa_threshold = options.fa_threshold;
  report.iterative = options.iterative;
  report.before = replay_metrics(table, all, replay, mode);

  std::vector<bool> keep(n, true);
  auto kept_columns = [&] {
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < n; ++c) {
      if (keep[c]) cols.push_back(c);
    }
    return cols;
  };
  std::size_t kept_correct = report.before.correct;

  for (std::size_t j = n; j-- > 0;) {
    std::size_t false_acceptances = 0;
    for (std::size_t w = 0; w < words; ++w) {
      if (table.in_lexicon[w][j] && !correct[w][j]) ++false_acceptances;
    }
    if (false_acceptances > options.fa_threshold) {
      keep[j] = false;
      report.removed.push_back({table.classifiers[j], RemovalReason::kExcessFalseAcceptances});
      if (options.iterative) kept_correct = replay_metrics(table, kept_columns(), replay, mode).correct;
      continue;
    }

    bool redundant = true;
    if (options.iterative) {
      keep[j] = false;
      const auto cols = kept_columns();
      const std::size_t without = cols.empty() ? 0 : replay_metrics(table, cols, replay, mode).correct;
      redundant = !cols.empty() && without >= kept_correct;
      keep[j] = true;
      if (redundant) kept_correct = without;
    } else {
      for (std::size_t w = 0; w < words && redundant; ++w) {
        if (!correct[w][j]) continue;
        bool earlier = false;
        for (std::size_t i = 0; i < j && !earlier; ++i) earlier = correct[w][i];
        redundant = earlier;
      }
    }
    if (redundant) {
      keep[j] = false;
      report.removed.push_back({table.classifiers[j], RemovalReason::kNoNewAcceptances});
    }
  }

  const auto cols = kept_columns();
  if (cols.empty()) throw EmptyResult("pruning removed every classifier; the false-acceptance threshold is too strict");
  for (std::size_t c : cols) report.kept.push_back(table.classifiers[c]);
  report.after = replay_metrics(table, cols, replay, mode);
  return report;
}

}  // namespace lexcascade
