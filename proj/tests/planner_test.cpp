#include <algorithm>
#include <filesystem>
#include <map>

#include "slidetailor/deck/deck.hpp"
#include "slidetailor/planner/planner.hpp"
#include "slidetailor/util.hpp"
#include "replayed_stages.hpp"

using namespace slidetailor;
using namespace slidetailor::planner;
using slidetailor::testing::error_code;
using slidetailor::testing::fixtures;
namespace fs = std::filesystem;

namespace {

using Replayed = slidetailor::testing::ReplayedStages;

Json entry(const std::string& purpose, std::vector<std::string> images = {}) {
  Json e = Json::object();
  e["purpose"] = purpose;
  e["speech_draft"] = "Speech for " + purpose;
  e["subsections"] = Json::array();
  e["content_style"] = "bullets";
  if (!images.empty()) e["image_assets"] = images;
  e["layout_recommendation"] = "text";
  return e;
}

Json small_outline(int n) {
  Json o = Json::object();
  for (int i = 1; i <= n; ++i) o[std::to_string(i) + "_Topic " + std::to_string(i)] = entry("p" + std::to_string(i));
  return o;
}

bool has_code(const std::vector<Diagnostic>& d, const std::string& code) {
  for (const auto& x : d) {
    if (x.code == code) return true;
  }
  return false;
}

}  // namespace

TEST_SUITE("planner") {

TEST_CASE("replayed stages") {
  Replayed r;
  SUBCASE("section order follows the preferred narrative flow") {
    // Role of each target heading within the reference flow.
    const std::map<std::string, std::string> role{{"Introduction", "Motivation"}, {"Method", "Method"},
                                                  {"Experimental Setup", "Experiments"}, {"Results", "Results"},
                                                  {"Conclusion", "Conclusion"}};
    const auto& flow = r.content.narrative_flow_preference;
    std::vector<std::ptrdiff_t> positions;
    for (const auto& s : r.doc.sections) {
      REQUIRE(role.count(s.title));
      auto it = std::find(flow.begin(), flow.end(), role.at(s.title));
      REQUIRE(it != flow.end());
      positions.push_back(it - flow.begin());
    }
    CHECK(positions.size() == 5);
    CHECK(std::is_sorted(positions.begin(), positions.end()));
    CHECK(r.doc.title == r.target.metadata.title);
  }
  SUBCASE("outline has ten entries keyed 1.. 10") {
    REQUIRE(r.outline.size() == 10);
    int i = 1;
    for (const auto& [key, e] : r.outline.items()) {
      auto k = parse_outline_key(key);
      REQUIRE(k);
      CHECK(k->index == i++);
      CHECK(e.contains("speech_draft"));
    }
    CHECK(validate_outline(r.outline, {10, {"fig1", "fig2", "fig3", "tab1"}, 0, false, true}).empty());
  }
  SUBCASE("selection picks template slides and keeps everything else") {
    for (const auto& [key, e] : r.selected.items()) {
      auto k = layout_index(e);
      REQUIRE(k);
      CHECK(*k >= 0);
      CHECK(*k < 5);
      for (const auto& [field, value] : r.outline[key].items()) CHECK(e[field].dump() == value.dump());
    }
    CHECK(validate_outline(r.selected, {10, {"fig1", "fig2", "fig3", "tab1"}, 5, true, true}).empty());
  }
  SUBCASE("stage purity under replay") {
    Replayed again;
    CHECK(again.doc == r.doc);
    CHECK(again.outline.dump() == r.outline.dump());
    CHECK(again.selected.dump() == r.selected.dump());
  }
}

TEST_CASE("ablated reorganizer request") {
  slidetailor::testing::ScriptedGateway sg;
  auto target = ingest::load_bundle(fixtures().target());
  auto doc = reorganize_paper(target, std::nullopt, sg.gw);
  CHECK(doc.sections.size() == target.sections.size());
  auto text = sg.model->requests().at(0).messages.at(0).text;
  CHECK(text.find(kNoGuidelines) != std::string::npos);
  CHECK(text.find("presentation_guidelines") == std::string::npos);
}

TEST_CASE("reorganizer repairs a subsection without content") {
  slidetailor::testing::ScriptedGateway sg;
  sg.model->enqueue("paper_reorganizer",
                    R"({"metadata": {"title": "T"}, "sections": [{"title": "A", "subsections": [{"title": "a"}]}]})");
  auto doc = reorganize_paper(ingest::load_bundle(fixtures().target()), std::nullopt, sg.gw);
  CHECK(sg.model->calls("paper_reorganizer") == 2);
  auto repair = sg.model->requests().at(1).messages.back().text;
  CHECK(repair.find("/sections/0/subsections/0/content") != std::string::npos);
  CHECK(doc.author == "A. Rivera, M. Chen");
}

TEST_CASE("reorganized document defaults and json") {
  Json v = {{"metadata", {{"title", "T"}}}, {"sections", {{{"title", "S"}, {"subsections", Json::array()}}}}};
  CHECK(validate_reorganized(v).empty());
  CHECK(v["metadata"]["organization"] == "");
  auto doc = ReorganizedDoc::from_json(v);
  CHECK(ReorganizedDoc::from_json(doc.to_json()) == doc);
  Json empty = {{"metadata", Json::object()}, {"sections", Json::array()}};
  CHECK(has_code(validate_reorganized(empty), "EmptySections"));
}

TEST_CASE("outline keys") {
  auto k = parse_outline_key("3_Method_Details");
  REQUIRE(k);
  CHECK(k->index == 3);
  CHECK(k->topic == "Method_Details");
  CHECK_FALSE(parse_outline_key("Method"));
  CHECK_FALSE(parse_outline_key("_Method"));
  CHECK_FALSE(parse_outline_key("x3_Method"));
  CHECK(layout_index(Json{{"layout", "slide_4"}}) == 4);
  CHECK_FALSE(layout_index(Json{{"layout", "slide_x"}}));
  CHECK_FALSE(layout_index(Json::object()));
}

TEST_CASE("outline validation") {
  OutlineCheck check{10, {"fig1", "fig2"}, 5, false, true};
  auto nine = small_outline(9);
  CHECK(has_code(validate_outline(nine, check), "SlideCountMismatch"));

  auto ok = small_outline(10);
  CHECK(validate_outline(ok, check).empty());

  auto dup = ok;
  dup["2_Topic 2"]["image_assets"] = {"fig2"};
  dup["5_Topic 5"]["image_assets"] = {"fig2"};
  CHECK(has_code(validate_outline(dup, check), "DuplicateImageUse"));

  auto unknown = ok;
  unknown["2_Topic 2"]["image_assets"] = {"fig9"};
  CHECK(has_code(validate_outline(unknown, check), "UnknownAssetId"));

  auto speech = ok;
  CHECK(has_code(validate_outline(speech, {10, {}, 5, false, false}), "UnexpectedSpeech"));
  speech["4_Topic 4"].erase("speech_draft");
  CHECK(!validate_outline(speech, check).empty());

  auto gap = Json::object();
  for (int i : {1, 2, 4}) gap[std::to_string(i) + "_T"] = entry("p");
  CHECK(has_code(validate_outline(gap, {3, {}, 0, false, true}), "IndexGap"));

  auto selected = ok;
  for (auto& [k, e] : selected.items()) {
    e["layout"] = "slide_1";
    e["layout_justification"] = "fits";
  }
  check.selected = true;
  CHECK(validate_outline(selected, check).empty());
  selected["3_Topic 3"]["layout"] = "slide_7";
  CHECK(has_code(validate_outline(selected, check), "LayoutOutOfRange"));
}

TEST_CASE("chain-of-speech surgery on the outline prompt") {
  ReorganizedDoc doc;
  doc.title = "T";
  doc.sections = {{"S", {{"s", "c"}}}};
  auto with = outline_prompt(doc, std::nullopt, {}, {10, true});
  auto without = outline_prompt(doc, std::nullopt, {}, {10, false});
  CHECK(with.find("speech_draft") != std::string::npos);
  CHECK(without.find("speech_draft") == std::string::npos);
  CHECK(with.find("The desired number of slides: 10") != std::string::npos);
}

TEST_CASE("outline stage errors") {
  slidetailor::testing::ScriptedGateway sg;
  ReorganizedDoc doc;
  doc.title = "T";
  doc.sections = {{"S", {{"s", "c"}}}};
  CHECK(error_code([&] { generate_outline(doc, std::nullopt, {}, {1, true}, sg.gw); }) == Errc::PreconditionFailed);

  for (int i = 0; i < 3; ++i) sg.model->enqueue("slide_outline", small_outline(9).dump());
  CHECK(error_code([&] { generate_outline(doc, std::nullopt, {}, {10, true}, sg.gw); }) == Errc::SlideCountMismatch);
  CHECK(sg.model->calls("slide_outline") == 3);

  auto assets = ingest::load_bundle(fixtures().target()).assets;
  auto dup = small_outline(3);
  dup["1_Topic 1"]["image_assets"] = {"fig2"};
  dup["2_Topic 2"]["image_assets"] = {"fig2"};
  for (int i = 0; i < 3; ++i) sg.model->enqueue("slide_outline", dup.dump());
  CHECK(error_code([&] { generate_outline(doc, std::nullopt, assets, {3, true}, sg.gw); }) == Errc::DuplicateImageUse);
}

TEST_CASE("selector that alters a speech draft") {
  slidetailor::testing::ScriptedGateway sg;
  auto outline = small_outline(3);
  auto altered = outline;
  for (auto& [k, e] : altered.items()) {
    e["layout"] = "slide_1";
    e["layout_justification"] = "fits";
  }
  altered["2_Topic 2"]["speech_draft"] = "Something else";
  for (int i = 0; i < 4; ++i) sg.model->enqueue("layout_selection", altered.dump());
  distill::AestheticProfile a;
  a.slide_themes = {"Opening", "Contents"};
  a.template_slide_count = 2;
  auto e = slidetailor::testing::caught([&] { select_layouts(outline, a, sg.gw); });
  CHECK(e.code() == Errc::ContentMutated);
  CHECK(e.diagnostics().at(0).path == "/2_Topic 2/speech_draft");
}

TEST_CASE("selector preservation fixtures") {
  std::vector<fs::path> files;
  for (const auto& f : fs::directory_iterator(fixtures().root / "selector")) files.push_back(f.path());
  std::sort(files.begin(), files.end());
  REQUIRE(files.size() == 20);
  for (const auto& f : files) {
    CAPTURE(f.filename().string());
    auto c = Json::parse(read_file(f));
    auto r = merge_layout_selection(c["input"], c["selector_output"], c["template_slide_count"].get<int>());
    if (c["expect"] == "preserved") {
      CHECK(r.diagnostics.empty());
      for (const auto& [key, original] : c["input"].items()) {
        const auto& merged = r.outline[key];
        for (const auto& [field, value] : original.items()) CHECK(merged[field].dump() == value.dump());
        std::size_t added = 0;
        for (const auto& [field, value] : merged.items()) added += original.contains(field) ? 0 : 1;
        CHECK(added == 2);
        CHECK(merged.contains("layout"));
        CHECK(merged.contains("layout_justification"));
      }
    } else {
      CHECK(has_code(r.diagnostics, "ContentMutated"));
    }
  }
}

}
