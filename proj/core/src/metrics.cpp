#include "lexcascade/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "lexcascade/error.hpp"

namespace lexcascade {
namespace {

double percent(std::size_t part, std::size_t whole) {
  return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

double ratio(std::size_t part, std::size_t whole) {
  return whole == 0 ? 0.0 : static_cast<double>(part) / static_cast<double>(whole);
}

}  // namespace

std::string_view to_string(DecisionStatus status) {
  switch (status) {
    case DecisionStatus::kAccepted:
      return "accepted";
    case DecisionStatus::kRejected:
      return "rejected";
    case DecisionStatus::kFallbackDecoded:
      return "fallback_decoded";
  }
  return "rejected";
}

std::optional<DecisionStatus> parse_status(std::string_view name) {
  if (name == "accepted") return DecisionStatus::kAccepted;
  if (name == "rejected") return DecisionStatus::kRejected;
  if (name == "fallback_decoded") return DecisionStatus::kFallbackDecoded;
  return std::nullopt;
}

EditAlignment levenshtein_align(std::u32string_view reference, std::u32string_view hypothesis) {
  const std::size_t n = reference.size();
  const std::size_t m = hypothesis.size();
  const std::size_t width = m + 1;
  std::vector<std::uint32_t> d((n + 1) * width);
  for (std::size_t i = 0; i <= n; ++i) d[i * width] = static_cast<std::uint32_t>(i);
  for (std::size_t j = 0; j <= m; ++j) d[j] = static_cast<std::uint32_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::uint32_t sub = d[(i - 1) * width + j - 1] + (reference[i - 1] != hypothesis[j - 1] ? 1 : 0);
      const std::uint32_t del = d[(i - 1) * width + j] + 1;
      const std::uint32_t ins = d[i * width + j - 1] + 1;
      d[i * width + j] = std::min({sub, del, ins});
    }
  }

  EditAlignment out;
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    const std::uint32_t here = d[i * width + j];
    if (i > 0 && j > 0) {
      const bool differ = reference[i - 1] != hypothesis[j - 1];
      if (here == d[(i - 1) * width + j - 1] + (differ ? 1 : 0)) {
        if (differ) ++out.substitutions;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && here == d[(i - 1) * width + j] + 1) {
      ++out.deletions;
      --i;
    } else {
      ++out.insertions;
      --j;
    }
  }
  return out;
}

EditAlignment levenshtein_align_utf8(std::string_view reference, std::string_view hypothesis) {
  return levenshtein_align(utf8_to_u32(reference), utf8_to_u32(hypothesis));
}

std::unordered_map<std::string, std::string> reference_map(std::span<const DecisionOutcome> outcomes) {
  std::unordered_map<std::string, std::string> out;
  for (const auto& o : outcomes) out.emplace(o.word_id, o.reference);
  return out;
}

RunMetrics run_metrics(std::span<const DecisionOutcome> outcomes,
                       const std::unordered_map<std::string, std::string>& references,
                       NormalizationMode mode) {
  RunMetrics m;
  m.words = outcomes.size();
  for (const auto& o : outcomes) {
    auto ref_it = references.find(o.word_id);
    if (ref_it == references.end()) throw MissingReference("no reference for word '" + o.word_id + "'");
    const std::u32string reference = utf8_to_u32(normalize(ref_it->second, mode));

    if (o.status == DecisionStatus::kRejected) {
      ++m.rejected;
      const std::string first = o.trace.empty() ? std::string() : o.trace.front().text;
      m.char_errors_all += levenshtein_align(reference, utf8_to_u32(normalize(first, mode))).distance();
      m.reference_chars_all += reference.size();
      continue;
    }
    if (o.status == DecisionStatus::kAccepted) {
      ++m.accepted;
    } else {
      ++m.fallback_decoded;
    }
    const std::u32string decided = utf8_to_u32(normalize(o.text, mode));
    const std::size_t errors = levenshtein_align(reference, decided).distance();
    if (decided == reference) {
      ++m.correct;
    } else {
      ++m.wrong;
      if (o.status == DecisionStatus::kAccepted) ++m.false_acceptances;
    }
    m.char_errors += errors;
    m.reference_chars += reference.size();
    m.char_errors_all += errors;
    m.reference_chars_all += reference.size();
  }
  m.wrr = percent(m.correct, m.words);
  m.wer = percent(m.wrong, m.words);
  m.wjr = percent(m.rejected, m.words);
  m.cer = percent(m.char_errors, m.reference_chars);
  m.cer_all_words = percent(m.char_errors_all, m.reference_chars_all);
  return m;
}

LengthBins LengthBins::standard() { return LengthBins{{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}}; }

std::size_t LengthBins::bin_of(std::size_t length) const {
  auto it = std::upper_bound(lower_bounds.begin(), lower_bounds.end(), length);
  return it == lower_bounds.begin() ? 0 : static_cast<std::size_t>(it - lower_bounds.begin()) - 1;
}

PfaTable estimate_pfa(std::span<const DecisionOutcome> outcomes, NormalizationMode mode, const LengthBins& bins,
                      std::uint32_t required_agreement) {
  if (bins.lower_bounds.empty()) throw InvariantViolation("no length bins");
  PfaTable table;
  table.required_agreement = required_agreement;
  for (std::size_t b = 0; b < bins.lower_bounds.size(); ++b) {
    PfaBin bin;
    bin.min_length = bins.lower_bounds[b];
    if (b + 1 < bins.lower_bounds.size()) bin.max_length = bins.lower_bounds[b + 1] - 1;
    table.bins.push_back(bin);
  }
  table.overall.min_length = bins.lower_bounds.front();

  for (const auto& o : outcomes) {
    const std::string reference = normalize(o.reference, mode);
    PfaBin& bin = table.bins[bins.bin_of(utf8_length(reference))];
    for (const auto& record : o.trace) {
      ++bin.trials;
      if (record.in_lexicon && record.agreement >= required_agreement && normalize(record.text, mode) != reference) {
        ++bin.false_acceptances;
      }
    }
  }
  for (auto& bin : table.bins) {
    bin.estimate = ratio(bin.false_acceptances, bin.trials);
    table.overall.trials += bin.trials;
    table.overall.false_acceptances += bin.false_acceptances;
  }
  table.overall.estimate = ratio(table.overall.false_acceptances, table.overall.trials);
  return table;
}

PfaBin pool_bins(const PfaTable& table, std::size_t min_length, std::size_t max_length) {
  PfaBin pooled;
  pooled.min_length = min_length;
  pooled.max_length = max_length;
  for (const auto& bin : table.bins) {
    const std::size_t hi = bin.max_length.value_or(SIZE_MAX);
    if (bin.min_length >= min_length && hi <= max_length) {
      pooled.trials += bin.trials;
      pooled.false_acceptances += bin.false_acceptances;
    }
  }
  pooled.estimate = ratio(pooled.false_acceptances, pooled.trials);
  return pooled;
}

double wcso(const ClassifierOutputs& a, const ClassifierOutputs& b) {
  if (a.size() != b.size()) throw WordSetMismatch("classifier outputs cover different word counts");
  std::size_t same = 0;
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first) throw WordSetMismatch("classifier outputs cover different words");
    if (ia->second == ib->second) ++same;
  }
  return percent(same, a.size());
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return 0.0;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx == 0.0 ? 0.0 : sxy / sxx;
}

WcsoSeries wcso_series(std::span<const ClassifierOutputs> cohort) {
  if (cohort.size() < 2) throw InvariantViolation("WCSO needs at least two classifiers");
  WcsoSeries series;
  double sum = 0.0;
  for (std::size_t a = 0; a < cohort.size(); ++a) {
    for (std::size_t b = a + 1; b < cohort.size(); ++b) {
      const double v = wcso(cohort[a], cohort[b]);
      series.pairwise.push_back({a, b, v});
      sum += v;
      if (b == a + 1) series.consecutive.push_back(v);
    }
  }
  series.mean = sum / static_cast<double>(series.pairwise.size());
  double sq = 0.0;
  for (const auto& p : series.pairwise) sq += (p.value - series.mean) * (p.value - series.mean);
  series.stddev = std::sqrt(sq / static_cast<double>(series.pairwise.size()));

  std::vector<double> index(series.consecutive.size());
  for (std::size_t i = 0; i < index.size(); ++i) index[i] = static_cast<double>(i + 1);
  series.slope = ols_slope(index, series.consecutive);
  return series;
}

double deletion_rate(std::span<const std::string> hypotheses, std::span<const std::string> references,
                     NormalizationMode mode) {
  if (hypotheses.size() != references.size()) throw WordSetMismatch("hypothesis/reference count mismatch");
  std::size_t deleted = 0;
  std::size_t chars = 0;
  for (std::size_t i = 0; i < references.size(); ++i) {
    const auto ref = utf8_to_u32(normalize(references[i], mode));
    deleted += levenshtein_align(ref, utf8_to_u32(normalize(hypotheses[i], mode))).deletions;
    chars += ref.size();
  }
  return ratio(deleted, chars);
}

}  // namespace lexcascade
