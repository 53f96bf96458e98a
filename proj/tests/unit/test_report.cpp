#include <doctest.h>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "lexcascade/error.hpp"
#include "lexcascade/report.hpp"

using namespace lexcascade;

namespace {

std::string golden_text() { return testutil::read_text(std::filesystem::path(LEXCASCADE_FIXTURE_DIR) / "golden" / "expected_report.json"); }

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
  for (const auto& p : problems) {
    if (p.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("nearest-rank percentiles") {
  std::vector<double> v{10, 1, 9, 2, 8, 3, 7, 4, 6, 5};
  CHECK(nearest_rank(v, 50) == 5);
  CHECK(nearest_rank(v, 80) == 8);
  CHECK(nearest_rank(v, 90) == 9);
  CHECK(nearest_rank(v, 0) == 1);
  CHECK(nearest_rank(v, 100) == 10);
  CHECK(nearest_rank({}, 50) == 0);
  CHECK(nearest_rank({4}, 90) == 4);
  const auto s = summarize({1, 1, 1, 5});
  CHECK(s.mean == 2.0);
  CHECK(s.p50 == 1);
  CHECK(s.p80 == 5);
  CHECK(s.p90 == 5);
}

TEST_CASE("report encoding round trips byte for byte") {
  const std::string text = golden_text();
  const RunReport r = decode_report(text);
  CHECK(encode_report(r) == text);
  CHECK(audit(r).empty());
  CHECK(r.tool == kToolName);
  CHECK(r.outcomes.size() == 4);
  CHECK(r.order == std::vector<std::size_t>{1, 2, 0});

  const auto cfg = r.cascade_config();
  CHECK(cfg.mnda_long == 2);
  CHECK(cfg.mnda_short == 3);
  CHECK(cfg.fallback == FallbackMode::kViterbi);
  CHECK(cfg.order == r.order);

  // rebuilding the aggregates from outcomes reproduces the file
  RunReport rebuilt = make_report(cfg, r.order_source, r.classifiers, r.normalization, r.lexicon_size,
                                  r.unscoreable_entries, r.outcomes);
  CHECK(encode_report(rebuilt) == text);

  testutil::TempDir dir("report_io");
  save_report(r, dir / "r.json");
  CHECK(testutil::read_text(dir / "r.json") == text);
  CHECK(encode_report(load_report(dir / "r.json")) == text);
}

TEST_CASE("audit catches tampering") {
  const RunReport clean = decode_report(golden_text());

  auto r = clean;
  r.metrics.wrr += 1.0;
  CHECK(mentions(audit(r), "metrics"));

  r = clean;
  r.outcomes[0].text = "chien";
  CHECK_FALSE(audit(r).empty());

  r = clean;
  r.outcomes[1].word_id = r.outcomes[0].word_id;
  CHECK_FALSE(audit(r).empty());

  r = clean;
  r.stage_histogram[0] += 1;
  CHECK(mentions(audit(r), "stage_histogram"));

  r = clean;
  r.outcomes[0].trace[0].classifier = 7;
  CHECK_FALSE(audit(r).empty());

  r = clean;
  for (auto& o : r.outcomes) {
    if (o.status == DecisionStatus::kAccepted) o.agreement = 1;
  }
  CHECK_FALSE(audit(r).empty());

  r = clean;
  for (auto& o : r.outcomes) {
    if (o.status == DecisionStatus::kFallbackDecoded) {
      o.status = DecisionStatus::kRejected;
      o.stage_accepted = 1;
    }
  }
  CHECK_FALSE(audit(r).empty());
}

TEST_CASE("malformed reports") {
  CHECK_THROWS_AS(decode_report("{"), MalformedFile);
  CHECK_THROWS_AS(decode_report("{}"), MalformedFile);
  auto doc = nlohmann::json::parse(golden_text());
  doc["outcomes"][0]["status"] = "maybe";
  CHECK_THROWS_AS(report_from_json(doc), MalformedFile);
  doc = nlohmann::json::parse(golden_text());
  doc["config"]["mnda_long"] = "two";
  CHECK_THROWS_AS(report_from_json(doc), MalformedFile);
  CHECK_THROWS_AS(load_report("/nonexistent/report.json"), IoError);
}
