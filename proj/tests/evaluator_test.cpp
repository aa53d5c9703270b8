#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "slidetailor/deck/deck.hpp"
#include "slidetailor/evaluator/evaluator.hpp"
#include "slidetailor/util.hpp"
#include "published_rows.hpp"
#include "test_helpers.hpp"

using namespace slidetailor;
using namespace slidetailor::evaluator;
using slidetailor::testing::error_code;
using slidetailor::testing::fixtures;
namespace fs = std::filesystem;

namespace {

// Plain recursive definition, kept separate from the DP under test.
std::size_t lev_oracle(const std::vector<int>& a, std::size_t i, const std::vector<int>& b, std::size_t j) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  if (a[i] == b[j]) return lev_oracle(a, i + 1, b, j + 1);
  return 1 + std::min({lev_oracle(a, i + 1, b, j), lev_oracle(a, i, b, j + 1), lev_oracle(a, i + 1, b, j + 1)});
}

std::vector<std::vector<int>> all_sequences(int max_len, int alphabet) {
  std::vector<std::vector<int>> out{{}};
  std::size_t begin = 0;
  for (int len = 1; len <= max_len; ++len) {
    std::size_t end = out.size();
    for (std::size_t k = begin; k < end; ++k) {
      for (int s = 0; s < alphabet; ++s) {
        auto next = out[k];
        next.push_back(s);
        out.push_back(next);
      }
    }
    begin = end;
  }
  return out;
}

std::vector<int> random_sequence(std::mt19937_64& rng, int max_len, int alphabet) {
  std::vector<int> s(rng() % static_cast<unsigned>(max_len + 1));
  for (auto& x : s) x = static_cast<int>(rng() % static_cast<unsigned>(alphabet));
  return s;
}

double ngld_of(const std::vector<int>& a, const std::vector<int>& b) {
  return ngld(std::span<const int>(a), std::span<const int>(b));
}

const fs::path kPhoto = fs::path(SLIDETAILOR_FIXTURE_DIR) / "media" / "template_photo.png";

using JudgeCall = std::function<MetricScore(gateway::ModelGateway&)>;

std::vector<std::pair<std::string, JudgeCall>> all_judges() {
  return {
      {"judge_content_structure",
       [](gateway::ModelGateway& gw) { return judge_content_structure("ref: a -> b", "gen: a -> b", gw); }},
      {"judge_aesthetic_similarity",
       [](gateway::ModelGateway& gw) { return judge_aesthetic_similarity({kPhoto}, {kPhoto}, gw); }},
      {"judge_content", [](gateway::ModelGateway& gw) { return judge_content_quality("paper body", {kPhoto}, gw); }},
      {"judge_visual", [](gateway::ModelGateway& gw) { return judge_visual_quality("3 slides of text", {kPhoto}, gw); }},
  };
}

}  // namespace

TEST_SUITE("evaluator") {

TEST_CASE("levenshtein examples") {
  SubtopicSequence abc{"A", "B", "C"}, ac{"A", "C"};
  CHECK(levenshtein(abc, abc) == 0);
  CHECK(levenshtein(abc, ac) == 1);
  CHECK(levenshtein(abc, SubtopicSequence{}) == 3);
  CHECK(levenshtein(SubtopicSequence{"kitten"}, SubtopicSequence{"sitting"}) == 1);
}

TEST_CASE("levenshtein equals the recursive oracle on every short pair") {
  auto seqs = all_sequences(5, 3);
  REQUIRE(seqs.size() == 364);
  std::size_t mismatches = 0;
  for (const auto& a : seqs) {
    for (const auto& b : seqs) {
      if (levenshtein(std::span<const int>(a), std::span<const int>(b)) != lev_oracle(a, 0, b, 0)) ++mismatches;
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("ngld examples") {
  SubtopicSequence abc{"A", "B", "C"}, ac{"A", "C"};
  CHECK(ngld(abc, abc) == 0.0);
  CHECK(ngld(SubtopicSequence{"A"}, SubtopicSequence{}) == doctest::Approx(1.0));
  CHECK(ngld(abc, ac) == doctest::Approx(1.0 / 3.0));
  CHECK(ngld(SubtopicSequence{}, SubtopicSequence{}) == 0.0);
  CHECK(flow_score(abc, abc) == doctest::Approx(100.0));
  CHECK(flow_score(SubtopicSequence{"A"}, SubtopicSequence{}) == doctest::Approx(0.0));
  CHECK(std::fabs(flow_score(abc, ac) - 66.67) <= 0.01);
}

TEST_CASE("ngld is a bounded metric on random triples") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 1000; ++t) {
    auto a = random_sequence(rng, 8, 4);
    auto b = random_sequence(rng, 8, 4);
    auto c = random_sequence(rng, 8, 4);
    double ab = ngld_of(a, b), ba = ngld_of(b, a), bc = ngld_of(b, c), ac = ngld_of(a, c);
    REQUIRE(ab >= 0.0);
    REQUIRE(ab <= 1.0);
    REQUIRE(ab == ba);
    REQUIRE((ab == 0.0) == (a == b));
    REQUIRE(ac <= ab + bc + 1e-12);
  }
}

TEST_CASE("coverage examples") {
  CHECK(coverage_iou({"intro", "method", "results", "conclusion"}, {"intro", "results"}) == doctest::Approx(0.5));
  CHECK(coverage_iou({"a", "b"}, {"b", "a", "a"}) == 1.0);
  CHECK(coverage_iou({"a"}, {"b"}) == 0.0);
  CHECK(coverage_iou({}, {}) == 1.0);
  CHECK(coverage_iou({"a"}, {}) == 0.0);
}

TEST_CASE("coverage properties on random sets") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 500; ++t) {
    SubtopicSequence a, b;
    for (int k = 0; k < 8; ++k) {
      if (rng() % 2) a.push_back("t" + std::to_string(k));
      if (rng() % 2) b.push_back("t" + std::to_string(k));
    }
    std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    double iou = coverage_iou(a, b);
    REQUIRE(iou == coverage_iou(b, a));
    REQUIRE(iou >= 0.0);
    REQUIRE(iou <= 1.0);
    REQUIRE((iou == 1.0) == (sa == sb));
    REQUIRE(coverage_iou(a, a) == 1.0);
    // Growing the symmetric difference never raises the score.
    auto grown = b;
    double prev = coverage_iou(a, grown);
    for (int k = 0; k < 4; ++k) {
      grown.push_back("extra" + std::to_string(k));
      double next = coverage_iou(a, grown);
      REQUIRE(next <= prev);
      prev = next;
    }
  }
}

TEST_CASE("judge normalization") {
  for (int s = 1; s <= 5; ++s) CHECK(normalize_judge(s) == doctest::Approx(20.0 * s));
  CHECK(normalize_judge(4.83) == doctest::Approx(96.6));
  for (double s = 1.0; s < 5.0; s += 0.25) CHECK(normalize_judge(s) < normalize_judge(s + 0.25));
  CHECK(error_code([] { normalize_judge(0.0); }) == Errc::OutOfRange);
  CHECK(error_code([] { normalize_judge(5.5); }) == Errc::OutOfRange);
}

TEST_CASE("overall reproduces every published row") {
  for (const auto& row : slidetailor::testing::kPublishedRows) {
    CAPTURE(row.method);
    CHECK(std::fabs(overall(row.scores) - row.overall) <= slidetailor::testing::kOverallTolerance);
  }
  std::vector<double> five(5, 1.0);
  CHECK(error_code([&] { overall(five); }) == Errc::WrongArity);
}

TEST_CASE("pearson") {
  std::vector<double> x{1, 2, 3, 5}, neg{-1, -2, -3, -5};
  CHECK(pearson(x, x) == doctest::Approx(1.0));
  CHECK(pearson(x, neg) == doctest::Approx(-1.0));
  std::vector<double> a{1, 2, 3}, b{2, 4, 7};
  // Hand computation: sxy = 5, sxx = 2, syy = 114/9, r = 5 / sqrt(228/9).
  CHECK(std::fabs(pearson(a, b) - 0.9934) <= 0.0005);
  CHECK(pearson(a, b) == doctest::Approx(5.0 / std::sqrt(228.0 / 9.0)));
  std::vector<double> one{1}, flat{2, 2, 2};
  CHECK(error_code([&] { pearson(one, one); }) == Errc::ArityMismatch);
  CHECK(error_code([&] { pearson(a, x); }) == Errc::ArityMismatch);
  CHECK(error_code([&] { pearson(a, flat); }) == Errc::ZeroVariance);
}

TEST_CASE("ratings csv") {
  auto ratings = load_ratings_csv(fixtures().root / "ratings.csv");
  CHECK(ratings.size() == 144);
  auto paired = pair_ratings(ratings, "judge");
  CHECK(paired.xs.size() == 48);
  double r = pearson(paired.xs, paired.ys);
  CHECK(std::isfinite(r));
  CHECK(r >= -1.0);
  CHECK(r <= 1.0);
  auto humans = pair_ratings(ratings, "human_a", "human_b");
  CHECK(humans.xs.size() == 48);

  auto dir = slidetailor::testing::scratch_dir("ratings");
  write_file(dir / "quoted.csv", "case_id,rater_id,metric,score\n\"case, 1\",r1,content,4\n\"case, 1\",r2,content,\"5\"\n");
  auto q = load_ratings_csv(dir / "quoted.csv");
  REQUIRE(q.size() == 2);
  CHECK(q[0].case_id == "case, 1");
  CHECK(q[1].score == 5.0);
  write_file(dir / "bad.csv", "case_id,rater_id,metric,score\nc,r,m,high\n");
  CHECK(error_code([&] { load_ratings_csv(dir / "bad.csv"); }) == Errc::ConfigError);
  write_file(dir / "header.csv", "case,rater,score\n");
  CHECK(error_code([&] { load_ratings_csv(dir / "header.csv"); }) == Errc::ConfigError);
  CHECK(error_code([&] { load_ratings_csv(dir / "missing.csv"); }) == Errc::IoError);
}

TEST_CASE("two-turn repair transcript") {
  auto gw = slidetailor::testing::replay_gateway(fixtures().repair_transcripts());
  auto s = judge_content_structure(slidetailor::testing::kRepairRefStructure,
                                   slidetailor::testing::kRepairGenStructure, gw);
  CHECK(gw.call_count() == 2);
  CHECK(s.raw == 4.0);
  CHECK(s.normalized == 80.0);
  CHECK(!s.reason.empty());
  CHECK(s.warnings.empty());
}

TEST_CASE("adversarial judge responses") {
  std::vector<fs::path> files;
  for (const auto& f : fs::directory_iterator(fixtures().root / "judge_responses")) files.push_back(f.path());
  std::sort(files.begin(), files.end());
  REQUIRE(files.size() == 20);
  for (const auto& f : files) {
    auto c = Json::parse(read_file(f));
    for (const auto& [tag, call] : all_judges()) {
      CAPTURE(f.filename().string());
      CAPTURE(tag);
      slidetailor::testing::ScriptedGateway sg;
      const auto& responses = c["responses"];
      for (std::size_t i = 0; i <= gateway::kDefaultMaxRepairs; ++i) {
        sg.model->enqueue(tag, responses[std::min(i, responses.size() - 1)].get<std::string>());
      }
      const auto& expect = c["expect"];
      if (expect.contains("error")) {
        auto e = slidetailor::testing::caught([&] { call(sg.gw); });
        CHECK(to_string(e.code()) == expect["error"].get<std::string>());
        CHECK(!e.diagnostics().empty());
        CHECK(sg.gw.call_count() == gateway::kDefaultMaxRepairs + 1);
      } else {
        auto s = call(sg.gw);
        CHECK(s.raw == expect["score"].get<double>());
        CHECK(s.raw >= 1.0);
        CHECK(s.raw <= 5.0);
        CHECK(s.normalized == 20.0 * s.raw);
        CHECK(s.warnings.size() == (expect.value("clamped", false) ? 1u : 0u));
        CHECK(sg.gw.call_count() == expect.value("calls", 1u));
      }
    }
  }
}

TEST_CASE("judge specifics") {
  slidetailor::testing::ScriptedGateway sg;
  SUBCASE("score 7 is clamped with a warning") {
    sg.model->enqueue("judge_content_structure", R"({"reason": "r", "score": 7})");
    auto s = judge_content_structure("a", "b", sg.gw);
    CHECK(s.raw == 5.0);
    CHECK(s.warnings == std::vector<std::string>{"score 7 clamped to 5"});
  }
  SUBCASE("string score") {
    sg.model->enqueue("judge_aesthetic_similarity", R"({"reason": "r", "score": "4"})");
    CHECK(judge_aesthetic_similarity({kPhoto}, {kPhoto}, sg.gw).raw == 4.0);
  }
  SUBCASE("lowest visual score") {
    sg.model->enqueue("judge_visual", R"({"reason": "Black text on white only.", "score": 1})");
    CHECK(judge_visual_quality("all black text", {}, sg.gw).normalized == 20.0);
  }
  SUBCASE("one unified score for the whole deck") {
    auto s = judge_aesthetic_similarity({kPhoto, kPhoto, kPhoto}, {kPhoto}, sg.gw);
    CHECK(sg.gw.call_count() == 1);
    CHECK(sg.model->requests().at(0).messages.at(0).image_refs.size() == 4);
    CHECK(s.metric == Metric::AestheticPref);
  }
  SUBCASE("preconditions") {
    CHECK(error_code([&] { judge_aesthetic_similarity({}, {kPhoto}, sg.gw); }) == Errc::MissingRender);
    CHECK(error_code([&] { judge_aesthetic_similarity({kPhoto}, {}, sg.gw); }) == Errc::MissingRender);
    CHECK(error_code([&] { judge_content_quality("  ", {kPhoto}, sg.gw); }) == Errc::PreconditionFailed);
    CHECK(error_code([&] { judge_content_quality("text", {}, sg.gw); }) == Errc::MissingRender);
    CHECK(error_code([&] { judge_content_structure("", "b", sg.gw); }) == Errc::PreconditionFailed);
    CHECK(error_code([&] { judge_visual_quality("", {}, sg.gw); }) == Errc::PreconditionFailed);
    CHECK(sg.gw.call_count() == 0);
  }
  SUBCASE("content rubric is rendered verbatim") {
    judge_content_quality("paper body", {kPhoto}, sg.gw);
    CHECK(sg.model->requests().at(0).messages.at(0).text.find("informativeness of the slides") != std::string::npos);
  }
}

TEST_CASE("subtopic extraction") {
  slidetailor::testing::ScriptedGateway sg;
  CHECK(error_code([&] { extract_subtopics({}, sg.gw); }) == Errc::EmptyDeck);
  auto slides = slide_texts(deck::parse_deck_file(fixtures().ref_slides()));
  REQUIRE(slides.size() == 6);
  sg.model->enqueue("subtopic_extraction", R"({"subtopics": ["title", "motivation"]})");
  auto labels = extract_subtopics(slides, sg.gw);
  CHECK(sg.model->calls("subtopic_extraction") == 2);
  REQUIRE(labels.size() == 6);
  CHECK(labels.front() == "title");
  CHECK(labels.back() == "conclusion");
}

TEST_CASE("structure text") {
  auto text = structure_text({"title", "method"}, {"My Talk\nsubtitle", std::string(200, 'x')});
  CHECK(text.rfind("Subtopic sequence: title -> method\n", 0) == 0);
  CHECK(text.find("1. [title] My Talk\n") != std::string::npos);
  CHECK(text.find("2. [method] " + std::string(160, 'x') + "...") != std::string::npos);
}

TEST_CASE("full evaluation against the scripted model") {
  slidetailor::testing::ScriptedGateway sg;
  auto generated = deck::parse_deck_file(fixtures().ref_slides());
  EvalInputs in;
  in.generated = &generated;
  in.reference_slides = slide_texts(generated);
  in.paper_text = "## Introduction\nbody";
  in.generated_images = {kPhoto};
  in.template_images = {kPhoto};
  auto report = evaluate(in, sg.gw);
  REQUIRE(report.scores.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(report.scores[i].metric == kAllMetrics[i]);
  CHECK(report.find(Metric::Coverage)->normalized == 100.0);
  CHECK(report.find(Metric::Flow)->normalized == 100.0);
  std::array<double, 6> values{};
  for (std::size_t i = 0; i < 6; ++i) {
    values[i] = report.scores[i].normalized;
    CHECK(values[i] >= 0.0);
    CHECK(values[i] <= 100.0);
  }
  CHECK(report.overall == doctest::Approx(overall(values)));
  CHECK(report.provenance["model_id"] == "gpt-4.1");

  auto round = EvalReport::from_json(report.to_json());
  CHECK(round.to_json().dump() == report.to_json().dump());
  auto partial = report.to_json();
  partial["scores"].erase(partial["scores"].size() - 1);
  CHECK(error_code([&] { EvalReport::from_json(partial); }) == Errc::WrongArity);
}

TEST_CASE("metric names") {
  for (auto m : kAllMetrics) CHECK(parse_metric(to_string(m)) == m);
  CHECK_FALSE(parse_metric("overall"));
}

}
