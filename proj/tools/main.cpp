#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lexcascade/binary_io.hpp"
#include "lexcascade/cascade.hpp"
#include "lexcascade/cohort_sim.hpp"
#include "lexcascade/error.hpp"
#include "lexcascade/lexicon.hpp"
#include "lexcascade/manifest.hpp"
#include "lexcascade/pruning.hpp"
#include "lexcascade/report.hpp"
#include "lexcascade/rng.hpp"

namespace lc = lexcascade;
namespace fs = std::filesystem;

namespace {

struct LexiconBuildArgs {
  std::vector<fs::path> inputs;
  std::string normalize = "none";
  fs::path out;
};

struct LexiconQueryArgs {
  fs::path lex;
  std::vector<std::string> words;
};

struct LexiconBenchArgs {
  fs::path lex;
  std::size_t queries = 1'000'000;
  std::uint64_t seed = 0;
};

struct SimulateArgs {
  fs::path words;
  lc::CohortSpec spec;
  std::optional<double> target_wer;
  std::optional<double> target_wcso;
  std::size_t probes = 10;
  fs::path out;
};

struct CascadeArgs {
  fs::path manifest;
  fs::path classifiers;
  fs::path lexicon;
  fs::path validation;
  std::string order = "auto-deletion";
  std::string fallback = "none";
  lc::CascadeConfig config;
  bool no_early_exit = false;
  unsigned workers = 1;
  fs::path report;
};

struct MetricsArgs {
  fs::path report;
};

struct PruneArgs {
  fs::path run;
  std::string fa_threshold;
  bool iterative = false;
  fs::path out;
};

lc::NormalizationMode normalization_or_throw(const std::string& name) {
  auto mode = lc::parse_normalization(name);
  if (!mode) throw lc::ConfigInvalid("unknown normalization '" + name + "'");
  return *mode;
}

int lexicon_build(const LexiconBuildArgs& a) {
  const auto lexicon = lc::read_word_lists(a.inputs, normalization_or_throw(a.normalize));
  lc::save_lexicon(lexicon, a.out);
  std::cout << "wrote " << a.out.string() << ": " << lexicon.size() << " entries ("
            << lc::to_string(lexicon.mode()) << ")\n";
  return 0;
}

int lexicon_query(const LexiconQueryArgs& a) {
  const auto lexicon = lc::load_lexicon(a.lex);
  for (const auto& w : a.words) std::cout << w << '\t' << (lexicon.contains(w) ? "yes" : "no") << '\n';
  return 0;
}

int lexicon_bench(const LexiconBenchArgs& a) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const auto lexicon = lc::load_lexicon(a.lex);
  const double load_s = std::chrono::duration<double>(clock::now() - t0).count();
  if (lexicon.empty()) throw lc::EmptyResult("lexicon is empty");

  // Half members, half near misses.
  lc::RandomStream rng(a.seed);
  std::vector<std::string> queries;
  queries.reserve(a.queries);
  for (std::size_t i = 0; i < a.queries; ++i) {
    std::string q(lexicon.entry(rng.index(lexicon.size())));
    if (i % 2 == 1) q.push_back(static_cast<char>('a' + rng.index(26)));
    queries.push_back(std::move(q));
  }
  std::vector<double> ns;
  ns.reserve(queries.size());
  std::size_t hits = 0;
  for (const auto& q : queries) {
    const auto s = clock::now();
    hits += lexicon.contains(q) ? 1 : 0;
    ns.push_back(std::chrono::duration<double, std::nano>(clock::now() - s).count());
  }
  const auto p = lc::summarize(std::move(ns));
  std::printf("entries %zu  memory %.1f MiB  load %.2f s\n", lexicon.size(),
              static_cast<double>(lexicon.memory_bytes()) / (1024.0 * 1024.0), load_s);
  std::printf("queries %zu  hits %zu  per-query ns: mean %.1f  p50 %.1f  p90 %.1f\n", queries.size(), hits, p.mean,
              p.p50, p.p90);
  return 0;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw lc::IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

int simulate(SimulateArgs a) {
  const auto vocabulary = read_lines(a.words);
  if (vocabulary.empty()) throw lc::EmptyResult(a.words.string() + " has no words");
  auto alphabet = std::make_shared<const lc::Alphabet>(lc::Alphabet::from_words(vocabulary));
  std::vector<lc::WordSample> words;
  words.reserve(vocabulary.size());
  char id[32];
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    std::snprintf(id, sizeof id, "w%06zu", i);
    words.push_back({id, vocabulary[i]});
  }
  a.spec.validate();
  if (a.target_wer || a.target_wcso) {
    lc::CalibrationOptions options;
    options.probe_classifiers = a.probes;
    a.spec = lc::calibrate(a.spec, alphabet, words, {a.target_wer, a.target_wcso}, options);
    std::printf("calibrated eps %.6f rho %.6f\n", a.spec.eps, a.spec.rho);
  }
  lc::write_cohort(a.spec, alphabet, words, a.out);
  std::printf("wrote %zu classifiers x %zu words to %s\n", a.spec.n_classifiers, words.size(), a.out.string().c_str());
  return 0;
}

std::vector<std::size_t> read_order_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw lc::IoError("cannot open order file " + path.string());
  std::vector<std::size_t> order;
  std::string token;
  while (in >> token) {
    try {
      std::size_t used = 0;
      order.push_back(std::stoul(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::logic_error&) {
      throw lc::MalformedFile(path.string() + ": '" + token + "' is not a classifier index");
    }
  }
  return order;
}

int cascade_run(CascadeArgs a) {
  if (a.fallback == "viterbi") {
    a.config.fallback = lc::FallbackMode::kViterbi;
  } else if (a.fallback != "none") {
    throw lc::ConfigInvalid("unknown fallback '" + a.fallback + "'");
  }
  a.config.early_exit = !a.no_early_exit;

  const auto words = lc::load_manifest(a.manifest);
  const auto list = lc::load_classifier_list(a.classifiers);
  const auto lexicon = lc::load_lexicon(a.lexicon);
  lc::DirectorySource source(list.directories);
  source.check_complete(words);

  std::string order_source = a.order;
  if (a.order == "auto-deletion") {
    const auto validation = a.validation.empty() ? words : lc::load_manifest(a.validation);
    if (!a.validation.empty()) source.check_complete(validation);
    a.config.order = lc::order_by_deletion(source, validation, lexicon.mode(), a.workers);
  } else if (a.order == "identity") {
    a.config.order.clear();
  } else {
    a.config.order = read_order_file(a.order);
    order_source = "file";
  }
  a.config.validate(source.classifiers());

  lc::Cascade cascade(source, lexicon, a.config);
  auto outcomes = cascade.run(words, a.workers);
  auto report = lc::make_report(a.config, order_source, list.entries, lexicon.mode(), lexicon.size(),
                                cascade.unscoreable_entries(), std::move(outcomes));
  if (const auto problems = lc::audit(report); !problems.empty()) {
    throw lc::AuditFailure("report failed its self-audit: " + problems.front());
  }
  lc::save_report(report, a.report);
  const auto& m = report.metrics;
  std::printf("words %zu  WRR %.2f  WER %.2f  WJR %.2f  CER %.2f  stages p50 %.0f p80 %.0f p90 %.0f\n", m.words,
              m.wrr, m.wer, m.wjr, m.cer, report.stages_evaluated.p50, report.stages_evaluated.p80,
              report.stages_evaluated.p90);
  return 0;
}

int metrics(const MetricsArgs& a) {
  const auto report = lc::load_report(a.report);
  const auto problems = lc::audit(report);
  const auto& m = report.metrics;
  std::printf("words %zu  accepted %zu  fallback %zu  rejected %zu\n", m.words, m.accepted, m.fallback_decoded,
              m.rejected);
  std::printf("WRR %.4f  WER %.4f  WJR %.4f  CER %.4f  CER(all) %.4f  P_FA %.6f\n", m.wrr, m.wer, m.wjr, m.cer,
              m.cer_all_words, report.pfa.overall.estimate);
  for (const auto& p : problems) std::printf("discrepancy: %s\n", p.c_str());
  if (!problems.empty()) {
    throw lc::AuditFailure(std::to_string(problems.size()) + " discrepancies in " + a.report.string());
  }
  std::printf("audit: 0 discrepancies\n");
  return 0;
}

std::size_t parse_threshold(const std::string& text, std::size_t words) {
  if (text.empty()) return lc::default_fa_threshold(words);
  try {
    std::size_t used = 0;
    if (text.back() == '%') {
      const double pct = std::stod(text.substr(0, text.size() - 1), &used);
      if (used != text.size() - 1 || pct < 0) throw std::invalid_argument(text);
      return static_cast<std::size_t>(pct / 100.0 * static_cast<double>(words));
    }
    const auto n = std::stoul(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return n;
  } catch (const std::logic_error&) {
    throw lc::ConfigInvalid("--fa-threshold expects a count or a percentage, got '" + text + "'");
  }
}

int prune(const PruneArgs& a) {
  const auto report = lc::load_report(a.run);
  const auto table = lc::HypothesisTable::from_outcomes(report.outcomes);
  lc::PruneOptions options;
  options.fa_threshold = parse_threshold(a.fa_threshold, table.words());
  options.iterative = a.iterative;
  const auto result = lc::prune(table, report.cascade_config(), report.normalization, options);
  lc::write_file_atomic(a.out, lc::to_json(result, report.classifiers).dump(2) + "\n");
  std::printf("kept %zu of %zu classifiers  WRR %.2f -> %.2f  false acceptances %zu -> %zu\n", result.kept.size(),
              table.columns(), result.before.wrr, result.after.wrr, result.before.false_acceptances,
              result.after.false_acceptances);
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Lexicon-verified classifier cascades for word recognition"};
  app.set_version_flag("--version", std::string(lc::kToolVersion));
  app.require_subcommand(1);
  int status = 0;

  auto* lexicon = app.add_subcommand("lexicon", "Build, query and benchmark lexicons");
  lexicon->require_subcommand(1);

  LexiconBuildArgs build;
  auto* build_cmd = lexicon->add_subcommand("build", "Build a binary lexicon from word lists");
  build_cmd->add_option("--input", build.inputs, "Word list, one word per line")->required()->check(CLI::ExistingFile);
  build_cmd->add_option("--normalize", build.normalize, "none, lower or lower-noaccents")
      ->check(CLI::IsMember({"none", "lower", "lower-noaccents"}));
  build_cmd->add_option("--out", build.out, "Output file")->required();
  build_cmd->callback([&] { status = lexicon_build(build); });

  LexiconQueryArgs query;
  auto* query_cmd = lexicon->add_subcommand("query", "Test words for membership");
  query_cmd->add_option("--lex", query.lex, "Lexicon file")->required();
  query_cmd->add_option("--word", query.words, "Word to look up")->required();
  query_cmd->callback([&] { status = lexicon_query(query); });

  LexiconBenchArgs bench;
  auto* bench_cmd = lexicon->add_subcommand("bench", "Time membership queries");
  bench_cmd->add_option("--lex", bench.lex, "Lexicon file")->required();
  bench_cmd->add_option("--queries", bench.queries, "Number of queries")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bench.seed, "Query generator seed");
  bench_cmd->callback([&] { status = lexicon_bench(bench); });

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Write a synthetic classifier cohort");
  sim_cmd->add_option("--words", sim.words, "Word list; every line becomes a manifest entry")
      ->required()
      ->check(CLI::ExistingFile);
  sim_cmd->add_option("--n", sim.spec.n_classifiers, "Number of classifiers");
  sim_cmd->add_option("--seed", sim.spec.seed, "Generator seed");
  sim_cmd->add_option("--eps", sim.spec.eps, "Per-character corruption rate in [0, 1)");
  sim_cmd->add_option("--rho", sim.spec.rho, "Probability a corruption draw is shared, in [0, 1]");
  sim_cmd->add_option("--gamma", sim.spec.gamma, "Mass on each frame's dominant class, in (0, 1]");
  sim_cmd->add_option("--frames-per-char", sim.spec.frames_per_char, "Frames per character (>= 2)");
  sim_cmd->add_option("--target-wer", sim.target_wer, "Calibrate eps to this raw WER (percent)");
  sim_cmd->add_option("--target-wcso", sim.target_wcso, "Calibrate rho to this mean WCSO (percent)");
  sim_cmd->add_option("--probes", sim.probes, "Classifiers measured during calibration");
  sim_cmd->add_option("--out", sim.out, "Output directory")->required();
  sim_cmd->callback([&] { status = simulate(sim); });

  auto* cascade = app.add_subcommand("cascade", "Run classifier cascades");
  cascade->require_subcommand(1);
  CascadeArgs casc;
  auto* run_cmd = cascade->add_subcommand("run", "Run the cascade over a manifest and write a report");
  run_cmd->add_option("--manifest", casc.manifest, "JSONL manifest of words")->required();
  run_cmd->add_option("--classifiers", casc.classifiers, "File listing one posteriorgram directory per line")
      ->required();
  run_cmd->add_option("--lexicon", casc.lexicon, "Binary lexicon")->required();
  run_cmd->add_option("--mnda-long", casc.config.mnda_long, "Agreements required for long words");
  run_cmd->add_option("--mnda-short", casc.config.mnda_short, "Agreements required for short words");
  run_cmd->add_option("--short-len", casc.config.short_len_threshold, "Words shorter than this are short");
  run_cmd->add_option("--order", casc.order, "auto-deletion, identity, or a file of classifier indices");
  run_cmd->add_option("--validation-manifest", casc.validation, "Words used to order by deletion rate");
  run_cmd->add_option("--fallback", casc.fallback, "none or viterbi")->check(CLI::IsMember({"none", "viterbi"}));
  run_cmd->add_option("--fallback-k", casc.config.fallback_k, "Posteriorgrams averaged by the fallback");
  run_cmd->add_option("--seed", casc.config.seed, "Seed of the fallback classifier pick");
  run_cmd->add_option("--workers", casc.workers, "Worker threads")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--no-early-exit", casc.no_early_exit, "Decode every stage (needed for pruning)");
  run_cmd->add_flag("--wall-time", casc.config.record_wall_time, "Record per-word wall time in the report");
  run_cmd->add_flag("--share-prefixes", casc.config.share_prefixes, "Use the prefix-sharing Viterbi scorer");
  run_cmd->add_option("--report", casc.report, "Output report (JSON)")->required();
  run_cmd->callback([&] { status = cascade_run(casc); });

  MetricsArgs met;
  auto* met_cmd = app.add_subcommand("metrics", "Recompute and audit a run report");
  met_cmd->add_option("--report", met.report, "Run report (JSON)")->required();
  met_cmd->callback([&] { status = metrics(met); });

  PruneArgs pr;
  auto* prune_cmd = app.add_subcommand("prune", "Decimate a cohort from a run without early exit");
  prune_cmd->add_option("--run", pr.run, "Run report (JSON)")->required();
  prune_cmd->add_option("--fa-threshold", pr.fa_threshold, "Count, or percentage of words such as 0.5%");
  prune_cmd->add_flag("--iterative", pr.iterative, "Re-run the cascade after each tentative removal");
  prune_cmd->add_option("--out", pr.out, "Output file (JSON)")->required();
  prune_cmd->callback([&] { status = prune(pr); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "lexcascade: " << e.what() << '\n';
    return static_cast<int>(lc::ExitCode::kUsage);
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const lc::Error& e) {
    std::cerr << "lexcascade: " << e.kind() << ": " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "lexcascade: " << e.what() << '\n';
    return static_cast<int>(lc::ExitCode::kData);
  }
}
