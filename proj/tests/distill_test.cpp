#include <random>

#include "slidetailor/deck/deck.hpp"
#include "slidetailor/distill/preferences.hpp"
#include "test_helpers.hpp"

using namespace slidetailor;
using namespace slidetailor::distill;
using slidetailor::testing::error_code;
using slidetailor::testing::fixtures;

namespace {

Json guidelines(Json flow, Json prefs, Json omitted = Json::array()) {
  Json g = Json::object();
  g["narrative_flow_preference"] = std::move(flow);
  g["section_level_preferences"] = std::move(prefs);
  g["omitted_sections"] = std::move(omitted);
  return Json{{"presentation_guidelines", g}};
}

Json pref(const std::string& name, const std::string& handling) {
  return {{"section_name", name},
          {"content_handling", handling},
          {"formatting_preferences", "Bullet Points"},
          {"additional_comments", ""}};
}

Json illustrated_profile() {
  return guidelines({"Title", "Background & Motivation", "Method", "Experiments", "Future Work"},
                    {pref("Title", "Condensed"), pref("background &  motivation", "Expanded"),
                     pref("Future Work", "Newly Added")},
                    {"Related Work"});
}

bool has_code(const std::vector<Diagnostic>& d, const std::string& code) {
  for (const auto& x : d) {
    if (x.code == code) return true;
  }
  return false;
}

ContentPreferenceProfile replay_content() {
  auto gw = slidetailor::testing::replay_gateway();
  return distill_content_preferences(ingest::load_bundle(fixtures().ref_paper()),
                                     ingest::bundle_from_deck(deck::parse_deck_file(fixtures().ref_slides())), gw);
}

}  // namespace

TEST_SUITE("distill") {

TEST_CASE("content profile validator accepts the illustrated shape") {
  auto v = validate_content_profile(illustrated_profile());
  CHECK(v.diagnostics.empty());
  REQUIRE(v.profile);
  CHECK(v.profile->narrative_flow_preference.front() == "Title");
  CHECK(v.profile->section_level_preferences.size() == 3);
  CHECK(v.profile->omitted_sections == std::vector<std::string>{"Related Work"});
  CHECK(validate_content_profile(v.profile->to_json()).profile == v.profile);
}

TEST_CASE("content profile validator rejections") {
  auto cross = guidelines({"Title"}, {pref("Results", "Condensed")});
  auto d = validate_content_profile(cross).diagnostics;
  CHECK(has_code(d, "CrossRefViolation"));
  CHECK(d.at(0).path == "/presentation_guidelines/section_level_preferences/0/section_name");

  CHECK(has_code(validate_content_profile(guidelines(Json::array(), Json::array())).diagnostics, "EmptyFlow"));
  CHECK(has_code(validate_content_profile(guidelines({"Title"}, {pref("Title", "Shortened")})).diagnostics,
                 "EnumViolation"));
  CHECK(!validate_content_profile(Json::object()).profile);
  CHECK(content_handling_values() == std::vector<std::string>{"Expanded", "Newly Added", "Condensed"});
}

TEST_CASE("validator property: generated profiles and their mutants") {
  std::mt19937_64 rng(42);
  const std::vector<std::string> names{"Title", "Motivation", "Method", "Results", "Conclusion", "Demo", "Q&A"};
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  for (int iter = 0; iter < 300; ++iter) {
    Json flow = Json::array();
    std::size_t len = 1 + pick(names.size());
    for (std::size_t i = 0; i < len; ++i) flow.push_back(names[i]);
    Json prefs = Json::array();
    for (std::size_t i = 0; i < len; ++i) {
      if (pick(2)) prefs.push_back(pref(names[i], content_handling_values()[pick(3)]));
    }
    auto valid = guidelines(flow, prefs);
    CAPTURE(valid.dump());
    auto ok = validate_content_profile(valid);
    REQUIRE(ok.diagnostics.empty());
    REQUIRE(ok.profile);
    CHECK(ok.profile->narrative_flow_preference.size() == len);

    auto mutant = valid;
    auto& g = mutant["presentation_guidelines"];
    int kind = static_cast<int>(pick(prefs.empty() ? 3 : 6));
    switch (kind) {
      case 0: g["narrative_flow_preference"] = Json::array(); break;
      case 1: g.erase("section_level_preferences"); break;
      case 2: g["narrative_flow_preference"].push_back(7); break;
      case 3: g["section_level_preferences"][0]["content_handling"] = "Shortened"; break;
      case 4: g["section_level_preferences"][0]["section_name"] = "Appendix"; break;
      default: g["section_level_preferences"][0].erase("formatting_preferences"); break;
    }
    CAPTURE(kind);
    auto bad = validate_content_profile(mutant);
    CHECK(!bad.profile);
    CHECK(!bad.diagnostics.empty());
  }
}

TEST_CASE("content preferences from the replay fixture") {
  auto p = replay_content();
  REQUIRE(!p.narrative_flow_preference.empty());
  CHECK(p.narrative_flow_preference.front() == "Title");
  REQUIRE(!p.section_level_preferences.empty());
  CHECK(p.section_level_preferences.front().content_handling == "Condensed");
}

TEST_CASE("aesthetic profile from the replay fixture") {
  auto tmpl = deck::parse_deck_file(fixtures().template_deck());
  auto gw = slidetailor::testing::replay_gateway();
  auto a = distill_aesthetic_profile(tmpl, gw);
  CHECK(a.template_slide_count == 5);
  REQUIRE(a.slide_themes.size() == 5);
  CHECK(a.slide_themes[0].rfind("Opening", 0) == 0);
  CHECK(a.element_metadata == deck::describe_deck(tmpl));
  CHECK(a.to_json()["slide_themes"].contains("slide_4"));
  CHECK(AestheticProfile::from_json(a.to_json()) == a);
}

TEST_CASE("closed enum violations engage the repair loop") {
  slidetailor::testing::ScriptedGateway sg;
  auto bad = guidelines({"Title"}, {pref("Title", "Shortened")}).dump();
  auto paper = ingest::load_bundle(fixtures().ref_paper());
  auto slides = ingest::bundle_from_deck(deck::parse_deck_file(fixtures().ref_slides()));
  SUBCASE("fixed on the second answer") {
    sg.model->enqueue("content_preference", bad);
    auto p = distill_content_preferences(paper, slides, sg.gw);
    CHECK(sg.model->calls("content_preference") == 2);
    CHECK(p.narrative_flow_preference.front() == "Title");
  }
  SUBCASE("never fixed") {
    for (int i = 0; i < 4; ++i) sg.model->enqueue("content_preference", bad);
    auto e = slidetailor::testing::caught([&] { distill_content_preferences(paper, slides, sg.gw); });
    CHECK(e.code() == Errc::ExhaustedRepairs);
    CHECK(has_code(e.diagnostics(), "EnumViolation"));
    CHECK(e.diagnostics().at(0).path == "/presentation_guidelines/section_level_preferences/0/content_handling");
  }
}

TEST_CASE("missing slide keys") {
  auto tmpl = deck::parse_deck_file(fixtures().template_deck());
  slidetailor::testing::ScriptedGateway sg;
  Json partial = Json::object();
  for (int i = 0; i < 5; ++i) {
    if (i != 3) partial["slide_" + std::to_string(i)] = "Contents, text";
  }
  SUBCASE("repaired") {
    sg.model->enqueue("aesthetic_preference", partial.dump());
    auto a = distill_aesthetic_profile(tmpl, sg.gw);
    CHECK(a.slide_themes.size() == 5);
    auto reqs = sg.model->requests();
    CHECK(reqs.back().messages.back().text.find("slide_3") != std::string::npos);
  }
  SUBCASE("never repaired") {
    for (int i = 0; i < 4; ++i) sg.model->enqueue("aesthetic_preference", partial.dump());
    auto e = slidetailor::testing::caught([&] { distill_aesthetic_profile(tmpl, sg.gw); });
    CHECK(e.code() == Errc::KeyCoverageViolation);
    CHECK(e.diagnostics().at(0).path == "/slide_3");
  }
  SUBCASE("empty template") {
    deck::DeckModel empty = tmpl;
    empty.slides.clear();
    CHECK(error_code([&] { distill_aesthetic_profile(empty, sg.gw); }) == Errc::PreconditionFailed);
  }
}

TEST_CASE("merged profiles") {
  auto content = *validate_content_profile(illustrated_profile()).profile;
  AestheticProfile a;
  a.slide_themes = {"Opening", "Contents"};
  a.template_slide_count = 2;
  auto both = merge_profiles(content, a);
  CHECK_FALSE(both.content_ablated());
  CHECK(PreferenceProfile::from_json(both.to_json()) == both);
  auto ablated = merge_profiles(std::nullopt, a);
  CHECK(ablated.content_ablated());
  CHECK(PreferenceProfile::from_json(ablated.to_json()) == ablated);
}

}
