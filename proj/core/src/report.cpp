#include "lexcascade/report.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lexcascade/binary_io.hpp"
#include "lexcascade/error.hpp"

namespace lexcascade {

using nlohmann::json;

namespace {

json to_json(const PfaBin& bin) {
  return json{{"estimate", bin.estimate},
              {"false_acceptances", bin.false_acceptances},
              {"max_length", bin.max_length ? json(*bin.max_length) : json(nullptr)},
              {"min_length", bin.min_length},
              {"trials", bin.trials}};
}

json to_json(const Percentiles& p) { return json{{"mean", p.mean}, {"p50", p.p50}, {"p80", p.p80}, {"p90", p.p90}}; }

json to_json(const DecisionOutcome& o) {
  json trace = json::array();
  for (const auto& s : o.trace) {
    trace.push_back(
        json{{"agreement", s.agreement}, {"classifier", s.classifier}, {"in_lexicon", s.in_lexicon}, {"text", s.text}});
  }
  json j{{"agreement", o.agreement},
         {"fallback_classifiers", o.fallback_classifiers},
         {"id", o.word_id},
         {"reference", o.reference},
         {"stage_accepted", o.stage_accepted ? json(*o.stage_accepted) : json(nullptr)},
         {"status", to_string(o.status)},
         {"text", o.text},
         {"trace", std::move(trace)}};
  if (o.wall_ms) j["wall_ms"] = *o.wall_ms;
  return j;
}

RunMetrics metrics_from_json(const json& j) {
  RunMetrics m;
  m.words = j.at("words").get<std::size_t>();
  m.accepted = j.at("accepted").get<std::size_t>();
  m.fallback_decoded = j.at("fallback_decoded").get<std::size_t>();
  m.rejected = j.at("rejected").get<std::size_t>();
  m.correct = j.at("correct").get<std::size_t>();
  m.wrong = j.at("wrong").get<std::size_t>();
  m.false_acceptances = j.at("false_acceptances").get<std::size_t>();
  m.wrr = j.at("wrr").get<double>();
  m.wer = j.at("wer").get<double>();
  m.wjr = j.at("wjr").get<double>();
  m.cer = j.at("cer").get<double>();
  m.char_errors = j.at("char_errors").get<std::size_t>();
  m.reference_chars = j.at("reference_chars").get<std::size_t>();
  m.cer_all_words = j.at("cer_all_words").get<double>();
  m.char_errors_all = j.at("char_errors_all").get<std::size_t>();
  m.reference_chars_all = j.at("reference_chars_all").get<std::size_t>();
  return m;
}

PfaBin bin_from_json(const json& j) {
  PfaBin b;
  b.estimate = j.at("estimate").get<double>();
  b.false_acceptances = j.at("false_acceptances").get<std::size_t>();
  if (!j.at("max_length").is_null()) b.max_length = j.at("max_length").get<std::size_t>();
  b.min_length = j.at("min_length").get<std::size_t>();
  b.trials = j.at("trials").get<std::size_t>();
  return b;
}

Percentiles percentiles_from_json(const json& j) {
  return {j.at("mean").get<double>(), j.at("p50").get<double>(), j.at("p80").get<double>(), j.at("p90").get<double>()};
}

DecisionOutcome outcome_from_json(const json& j) {
  DecisionOutcome o;
  o.word_id = j.at("id").get<std::string>();
  o.reference = j.at("reference").get<std::string>();
  const auto status = parse_status(j.at("status").get<std::string>());
  if (!status) throw MalformedFile("report: unknown status for word " + o.word_id);
  o.status = *status;
  o.text = j.at("text").get<std::string>();
  if (!j.at("stage_accepted").is_null()) o.stage_accepted = j.at("stage_accepted").get<std::size_t>();
  o.agreement = j.at("agreement").get<std::uint32_t>();
  for (const auto& s : j.at("trace")) {
    o.trace.push_back(StageRecord{s.at("classifier").get<std::size_t>(), s.at("text").get<std::string>(),
                                  s.at("in_lexicon").get<bool>(), s.at("agreement").get<std::uint32_t>()});
  }
  o.fallback_classifiers = j.at("fallback_classifiers").get<std::vector<std::size_t>>();
  if (j.contains("wall_ms")) o.wall_ms = j.at("wall_ms").get<double>();
  return o;
}

}  // namespace

double nearest_rank(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

Percentiles summarize(std::vector<double> values) {
  Percentiles p;
  if (values.empty()) return p;
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  p.mean = sum / static_cast<double>(values.size());
  p.p50 = nearest_rank(values, 50);
  p.p80 = nearest_rank(values, 80);
  p.p90 = nearest_rank(values, 90);
  return p;
}

CascadeConfig RunReport::cascade_config() const {
  CascadeConfig c;
  c.mnda_long = mnda_long;
  c.mnda_short = mnda_short;
  c.short_len_threshold = short_len_threshold;
  c.fallback = fallback;
  c.fallback_k = fallback_k;
  c.order = order;
  c.early_exit = early_exit;
  c.seed = seed;
  return c;
}

void RunReport::compute_aggregates() {
  metrics = run_metrics(outcomes, reference_map(outcomes), normalization);
  pfa = estimate_pfa(outcomes, normalization);
  stage_histogram.assign(classifiers.size(), 0);
  std::vector<double> stages;
  std::vector<double> wall;
  stages.reserve(outcomes.size());
  for (const auto& o : outcomes) {
    if (o.stage_accepted && *o.stage_accepted >= 1) {
      if (*o.stage_accepted > stage_histogram.size()) stage_histogram.resize(*o.stage_accepted, 0);
      ++stage_histogram[*o.stage_accepted - 1];
    }
    stages.push_back(static_cast<double>(o.trace.size()));
    if (o.wall_ms) wall.push_back(*o.wall_ms);
  }
  stages_evaluated = summarize(std::move(stages));
  wall_ms.reset();
  if (!wall.empty()) wall_ms = summarize(std::move(wall));
}

RunReport make_report(const CascadeConfig& config, std::string order_source, std::vector<std::string> classifiers,
                      NormalizationMode normalization, std::size_t lexicon_size, std::size_t unscoreable_entries,
                      std::vector<DecisionOutcome> outcomes) {
  RunReport r;
  r.seed = config.seed;
  r.mnda_long = config.mnda_long;
  r.mnda_short = config.mnda_short;
  r.short_len_threshold = config.short_len_threshold;
  r.fallback = config.fallback;
  r.fallback_k = config.fallback_k;
  r.early_exit = config.early_exit;
  r.order_source = std::move(order_source);
  r.order = config.resolved_order(classifiers.size());
  r.classifiers = std::move(classifiers);
  r.normalization = normalization;
  r.lexicon_size = lexicon_size;
  r.unscoreable_entries = unscoreable_entries;
  r.outcomes = std::move(outcomes);
  r.compute_aggregates();
  return r;
}

json to_json(const RunMetrics& m) {
  return json{{"accepted", m.accepted},
              {"cer", m.cer},
              {"cer_all_words", m.cer_all_words},
              {"char_errors", m.char_errors},
              {"char_errors_all", m.char_errors_all},
              {"correct", m.correct},
              {"fallback_decoded", m.fallback_decoded},
              {"false_acceptances", m.false_acceptances},
              {"reference_chars", m.reference_chars},
              {"reference_chars_all", m.reference_chars_all},
              {"rejected", m.rejected},
              {"wer", m.wer},
              {"wjr", m.wjr},
              {"words", m.words},
              {"wrong", m.wrong},
              {"wrr", m.wrr}};
}

json to_json(const PfaTable& t) {
  json bins = json::array();
  for (const auto& b : t.bins) bins.push_back(to_json(b));
  return json{{"bins", std::move(bins)}, {"overall", to_json(t.overall)}, {"required_agreement", t.required_agreement}};
}

json to_json(const RunReport& r) {
  json config{{"classifiers", r.classifiers},
              {"early_exit", r.early_exit},
              {"fallback", to_string(r.fallback)},
              {"fallback_k", r.fallback_k},
              {"lexicon_size", r.lexicon_size},
              {"mnda_long", r.mnda_long},
              {"mnda_short", r.mnda_short},
              {"normalization", to_string(r.normalization)},
              {"order", r.order},
              {"order_source", r.order_source},
              {"short_len_threshold", r.short_len_threshold}};
  json timing{{"stages_evaluated", to_json(r.stages_evaluated)}};
  if (r.wall_ms) timing["wall_ms"] = to_json(*r.wall_ms);
  json outcomes = json::array();
  for (const auto& o : r.outcomes) outcomes.push_back(to_json(o));
  return json{{"config", std::move(config)},
              {"metrics", to_json(r.metrics)},
              {"outcomes", std::move(outcomes)},
              {"pfa", to_json(r.pfa)},
              {"seed", r.seed},
              {"stage_histogram", r.stage_histogram},
              {"timing", std::move(timing)},
              {"tool", r.tool},
              {"unscoreable_entries", r.unscoreable_entries},
              {"version", r.version}};
}

RunReport report_from_json(const json& doc) {
  try {
    RunReport r;
    r.tool = doc.at("tool").get<std::string>();
    r.version = doc.at("version").get<std::string>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    const json& c = doc.at("config");
    r.mnda_long = c.at("mnda_long").get<std::uint32_t>();
    r.mnda_short = c.at("mnda_short").get<std::uint32_t>();
    r.short_len_threshold = c.at("short_len_threshold").get<std::uint32_t>();
    const auto fallback = c.at("fallback").get<std::string>();
    if (fallback == "viterbi") {
      r.fallback = FallbackMode::kViterbi;
    } else if (fallback == "none") {
      r.fallback = FallbackMode::kNone;
    } else {
      throw MalformedFile("report: unknown fallback '" + fallback + "'");
    }
    r.fallback_k = c.at("fallback_k").get<std::uint32_t>();
    r.early_exit = c.at("early_exit").get<bool>();
    r.order_source = c.at("order_source").get<std::string>();
    r.order = c.at("order").get<std::vector<std::size_t>>();
    r.classifiers = c.at("classifiers").get<std::vector<std::string>>();
    const auto mode = parse_normalization(c.at("normalization").get<std::string>());
    if (!mode) throw MalformedFile("report: unknown normalization");
    r.normalization = *mode;
    r.lexicon_size = c.at("lexicon_size").get<std::size_t>();
    r.unscoreable_entries = doc.at("unscoreable_entries").get<std::size_t>();

    r.metrics = metrics_from_json(doc.at("metrics"));
    const json& pfa = doc.at("pfa");
    r.pfa.required_agreement = pfa.at("required_agreement").get<std::uint32_t>();
    for (const auto& b : pfa.at("bins")) r.pfa.bins.push_back(bin_from_json(b));
    r.pfa.overall = bin_from_json(pfa.at("overall"));
    r.stage_histogram = doc.at("stage_histogram").get<std::vector<std::size_t>>();
    const json& timing = doc.at("timing");
    r.stages_evaluated = percentiles_from_json(timing.at("stages_evaluated"));
    if (timing.contains("wall_ms")) r.wall_ms = percentiles_from_json(timing.at("wall_ms"));
    for (const auto& o : doc.at("outcomes")) r.outcomes.push_back(outcome_from_json(o));
    return r;
  } catch (const json::exception& e) {
    throw MalformedFile(std::string("report: ") + e.what());
  }
}

std::string encode_report(const RunReport& report) { return to_json(report).dump(2) + "\n"; }

RunReport decode_report(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw MalformedFile(std::string("report: ") + e.what());
  }
  return report_from_json(doc);
}

RunReport load_report(const std::filesystem::path& path) {
  try {
    return decode_report(read_file(path));
  } catch (const MalformedFile& e) {
    throw MalformedFile(path.string() + ": " + e.what());
  }
}

void save_report(const RunReport& report, const std::filesystem::path& path) {
  write_file_atomic(path, encode_report(report));
}

std::vector<std::string> audit(const RunReport& report) {
  std::vector<std::string> problems;
  RunReport fresh = report;
  try {
    fresh.compute_aggregates();
  } catch (const Error& e) {
    problems.push_back(std::string("cannot recompute aggregates: ") + e.what());
    return problems;
  }
  auto compare = [&](const char* name, const json& stored, const json& recomputed) {
    if (stored.dump() != recomputed.dump()) {
      problems.push_back(std::string(name) + ": stored " + stored.dump() + ", recomputed " + recomputed.dump());
    }
  };
  compare("metrics", to_json(report.metrics), to_json(fresh.metrics));
  compare("pfa", to_json(report.pfa), to_json(fresh.pfa));
  compare("stage_histogram", json(report.stage_histogram), json(fresh.stage_histogram));
  compare("timing.stages_evaluated", to_json(report.stages_evaluated), to_json(fresh.stages_evaluated));
  compare("timing.wall_ms", report.wall_ms ? to_json(*report.wall_ms) : json(nullptr),
          fresh.wall_ms ? to_json(*fresh.wall_ms) : json(nullptr));

  const auto& m = report.metrics;
  if (m.accepted + m.rejected + m.fallback_decoded != report.outcomes.size()) {
    problems.push_back("partition: accepted + rejected + fallback_decoded != words");
  }
  if (std::abs(m.wrr + m.wer + m.wjr - 100.0) > 1e-9 && !report.outcomes.empty()) {
    problems.push_back("partition: WRR + WER + WJR != 100");
  }

  const std::size_t n = report.classifiers.size();
  const CascadeConfig config = report.cascade_config();
  std::set<std::string_view> ids;
  for (const auto& o : report.outcomes) {
    if (!ids.insert(o.word_id).second) problems.push_back("duplicate outcome for word " + o.word_id);
    for (const auto& s : o.trace) {
      if (s.classifier >= n) problems.push_back(o.word_id + ": trace names unknown classifier");
    }
    if (o.status == DecisionStatus::kAccepted) {
      const std::string key = normalize(o.text, report.normalization);
      if (!o.stage_accepted || *o.stage_accepted == 0 || *o.stage_accepted > n ||
          *o.stage_accepted > o.trace.size()) {
        problems.push_back(o.word_id + ": accepted without a valid stage");
        continue;
      }
      const auto& rec = o.trace[*o.stage_accepted - 1];
      if (!rec.in_lexicon || normalize(rec.text, report.normalization) != key) {
        problems.push_back(o.word_id + ": accepting stage does not hold the accepted lexicon member");
      }
      if (o.agreement < config.required_agreement(utf8_length(key))) {
        problems.push_back(o.word_id + ": agreement below the required minimum");
      }
    } else {
      if (o.stage_accepted) problems.push_back(o.word_id + ": stage_accepted set on a word that was not accepted");
      if (o.status == DecisionStatus::kRejected && !o.text.empty()) {
        problems.push_back(o.word_id + ": rejected word carries text");
      }
    }
  }
  return problems;
}

json to_json(const PruneReport& report, const std::vector<std::string>& names) {
  auto name_of = [&](std::size_t i) { return i < names.size() ? names[i] : std::to_string(i); };
  json kept_names = json::array();
  for (std::size_t i : report.kept) kept_names.push_back(name_of(i));
  json removed = json::array();
  for (const auto& r : report.removed) {
    removed.push_back(json{{"classifier", r.classifier}, {"name", name_of(r.classifier)}, {"reason", to_string(r.reason)}});
  }
  return json{{"after", to_json(report.after)},
              {"before", to_json(report.before)},
              {"fa_threshold", report.fa_threshold},
              {"iterative", report.iterative},
              {"kept", report.kept},
              {"kept_names", std::move(kept_names)},
              {"removed", std::move(removed)},
              {"tool", kToolName},
              {"version", kToolVersion}};
}

}  // namespace lexcascade
