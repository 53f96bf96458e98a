#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexcascade/cascade.hpp"
#include "lexcascade/metrics.hpp"
#include "lexcascade/pruning.hpp"

namespace lexcascade {

inline constexpr std::string_view kToolName = "lexcascade";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Nearest-rank percentiles of a per-word quantity.
struct Percentiles {
  double mean = 0.0;
  double p50 = 0.0;
  double p80 = 0.0;
  double p90 = 0.0;

  friend bool operator==(const Percentiles&, const Percentiles&) = default;
};

/// Smallest value with at least p% of the sample at or below it; 0 for an
/// empty sample.
double nearest_rank(std::vector<double> values, double p);
Percentiles summarize(std::vector<double> values);

struct RunReport {
  std::string tool{kToolName};
  std::string version{kToolVersion};
  std::uint64_t seed = 0;

  // Config echo.
  std::uint32_t mnda_long = 3;
  std::uint32_t mnda_short = 10;
  std::uint32_t short_len_threshold = 4;
  FallbackMode fallback = FallbackMode::kNone;
  std::uint32_t fallback_k = 10;
  bool early_exit = true;
  std::string order_source;
  std::vector<std::size_t> order;
  std::vector<std::string> classifiers;
  NormalizationMode normalization = NormalizationMode::kNone;
  std::size_t lexicon_size = 0;
  std::size_t unscoreable_entries = 0;

  // Aggregates, all recomputable from `outcomes`.
  RunMetrics metrics;
  PfaTable pfa;
  /// Acceptances per 1-based stage (index 0 is stage 1).
  std::vector<std::size_t> stage_histogram;
  /// Stages decoded per word.
  Percentiles stages_evaluated;
  std::optional<Percentiles> wall_ms;

  /// In manifest order.
  std::vector<DecisionOutcome> outcomes;

  /// Copies the decision-rule fields into a config (seed included).
  CascadeConfig cascade_config() const;
  /// Fills the aggregates from the outcomes.
  void compute_aggregates();
};

RunReport make_report(const CascadeConfig& config, std::string order_source, std::vector<std::string> classifiers,
                      NormalizationMode normalization, std::size_t lexicon_size, std::size_t unscoreable_entries,
                      std::vector<DecisionOutcome> outcomes);

nlohmann::json to_json(const RunReport& report);
/// Throws MalformedFile.
RunReport report_from_json(const nlohmann::json& doc);

/// Pretty-printed with sorted keys and a trailing newline.
std::string encode_report(const RunReport& report);
RunReport decode_report(std::string_view text);
RunReport load_report(const std::filesystem::path& path);
void save_report(const RunReport& report, const std::filesystem::path& path);

/// Recomputes every aggregate and checks the run invariants. Returns one
/// line per discrepancy; empty means the report is self-consistent.
std::vector<std::string> audit(const RunReport& report);

nlohmann::json to_json(const RunMetrics& metrics);
nlohmann::json to_json(const PfaTable& table);
nlohmann::json to_json(const PruneReport& report, const std::vector<std::string>& classifier_names);

}  // namespace lexcascade
