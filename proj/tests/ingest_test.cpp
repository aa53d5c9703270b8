#include "slidetailor/deck/deck.hpp"
#include "slidetailor/ingest/bundle.hpp"
#include "slidetailor/util.hpp"
#include "test_helpers.hpp"

using namespace slidetailor;
using namespace slidetailor::ingest;
using slidetailor::testing::error_code;
using slidetailor::testing::fixtures;
using slidetailor::testing::scratch_dir;
namespace fs = std::filesystem;

namespace {

fs::path copy_target(const std::string& name) {
  auto dir = scratch_dir(name) / "bundle";
  fs::copy(fixtures().target(), dir, fs::copy_options::recursive);
  return dir;
}

fs::path stub_script(const fs::path& dir, const std::string& body) {
  auto path = dir / "extract.sh";
  write_file(path, "#!/bin/sh\n" + body + "\n");
  fs::permissions(path, fs::perms::owner_all);
  return path;
}

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("fixture bundle counts") {
  // paper.md has six "## " headings; assets/manifest.json lists four entries.
  auto b = load_bundle(fixtures().target());
  REQUIRE(b.sections.size() == 6);
  CHECK(b.sections[0].heading == "Introduction");
  CHECK(b.sections[5].heading == "Conclusion");
  REQUIRE(b.assets.size() == 4);
  CHECK(b.assets[2].asset_id == "tab1");
  CHECK(b.assets[2].kind == AssetKind::Table);
  CHECK(b.assets[3].caption.empty());
  CHECK(b.assets[0].file_path.is_absolute());
  CHECK(b.metadata.title == "HopCache: Shape-Aware Page Caching for Graph Queries");
  CHECK(b.metadata.authors == "A. Rivera, M. Chen");
  CHECK(b.metadata.organization == "Northfield University");
  CHECK(validate_bundle(b).empty());
  CHECK(b.find_asset("fig2") != nullptr);
  CHECK(b.find_asset("fig9") == nullptr);
}

TEST_CASE("loading is deterministic") {
  CHECK(load_bundle(fixtures().target()) == load_bundle(fixtures().target()));
  CHECK(to_json(load_bundle(fixtures().target())).dump() == to_json(load_bundle(fixtures().target())).dump());
}

TEST_CASE("section splitting") {
  auto s = split_sections("lead text\n# A\nalpha\n### B\nbeta\n\n## C\n");
  REQUIRE(s.size() == 4);
  CHECK(s[0].heading == "Preamble");
  CHECK(s[0].text == "lead text");
  CHECK(s[2].heading == "B");
  CHECK(s[3].text.empty());
  CHECK(split_sections("   \n").empty());
}

TEST_CASE("colliding headings get suffixes") {
  auto dir = copy_target("dup_headings");
  write_file(dir / "paper.md", "## Method\none\n## method \ntwo\n## METHOD\nthree\n");
  auto b = load_bundle(dir);
  REQUIRE(b.sections.size() == 3);
  CHECK(b.sections[1].heading == "method (2)");
  CHECK(b.sections[2].heading == "METHOD (3)");
  CHECK(validate_bundle(b).empty());
}

TEST_CASE("validation diagnostics") {
  auto b = load_bundle(fixtures().target());
  auto dup = b;
  dup.assets[1].asset_id = dup.assets[0].asset_id;
  auto d = validate_bundle(dup);
  REQUIRE(d.size() == 1);
  CHECK(d[0].code == "DuplicateAssetId");

  auto sections = b;
  sections.sections = {{"Method", "a"}, {"  method ", "b"}};
  d = validate_bundle(sections);
  REQUIRE(d.size() == 1);
  CHECK(d[0].code == "DuplicateSection");
  CHECK(d[0].path == "/sections/1");

  auto missing = b;
  missing.assets[0].file_path = "/nonexistent.png";
  CHECK(validate_bundle(missing).at(0).code == "MissingAssetFile");
}

TEST_CASE("bundle loading errors") {
  SUBCASE("missing image") {
    auto dir = copy_target("missing_image");
    fs::remove(dir / "assets" / "fig_pipeline.png");
    CHECK(error_code([&] { load_bundle(dir); }) == Errc::BadAsset);
  }
  SUBCASE("undecodable image") {
    auto dir = copy_target("bad_image");
    write_file(dir / "assets" / "fig_pipeline.png", "not an image");
    CHECK(error_code([&] { load_bundle(dir); }) == Errc::BadAsset);
  }
  SUBCASE("empty body") {
    auto dir = copy_target("empty_body");
    write_file(dir / "paper.md", "");
    CHECK(error_code([&] { load_bundle(dir); }) == Errc::MissingBody);
  }
  SUBCASE("no body file") {
    auto dir = copy_target("no_body");
    fs::remove(dir / "paper.md");
    CHECK(error_code([&] { load_bundle(dir); }) == Errc::MissingBody);
  }
  SUBCASE("no manifest") {
    auto dir = copy_target("no_manifest");
    fs::remove(dir / "assets" / "manifest.json");
    CHECK(error_code([&] { load_bundle(dir); }) == Errc::MissingManifest);
  }
  SUBCASE("duplicate asset ids in the manifest") {
    auto dir = copy_target("dup_manifest");
    auto m = Json::parse(read_file(dir / "assets" / "manifest.json"));
    m[1]["asset_id"] = "fig1";
    write_file(dir / "assets" / "manifest.json", m.dump());
    CHECK(error_code([&] { load_bundle(dir); }) == Errc::BadAsset);
  }
}

TEST_CASE("pdf extraction through a stub command") {
  auto dir = scratch_dir("extract");
  write_file(dir / "paper.pdf", "%PDF-1.4 stub");
  SUBCASE("copying a canned bundle") {
    auto script = stub_script(dir, "cp -R \"" + fixtures().target().string() + "/.\" \"$2\"");
    auto b = extract_pdf(dir / "paper.pdf", script.string(), dir / "out");
    auto expected = load_bundle(dir / "out");
    CHECK(b == expected);
    CHECK(b.sections.size() == 6);
    CHECK(b.assets.size() == 4);
  }
  SUBCASE("nonzero exit") {
    auto script = stub_script(dir, "echo broken >&2; exit 3");
    auto e = slidetailor::testing::caught([&] { extract_pdf(dir / "paper.pdf", script.string(), dir / "out"); });
    CHECK(e.code() == Errc::ExtractorFailed);
    CHECK(std::string(e.what()).find("broken") != std::string::npos);
  }
  SUBCASE("no manifest written") {
    auto script = stub_script(dir, "printf '## Only\\nbody\\n' > \"$2/paper.md\"");
    CHECK(error_code([&] { extract_pdf(dir / "paper.pdf", script.string(), dir / "out"); }) ==
          Errc::MissingManifest);
  }
  SUBCASE("no command") {
    CHECK(error_code([&] { extract_pdf(dir / "paper.pdf", "", dir / "out"); }) == Errc::ExtractorUnavailable);
  }
}

TEST_CASE("decks become text bundles") {
  auto deck = deck::parse_deck_file(fixtures().ref_slides());
  auto b = bundle_from_deck(deck);
  REQUIRE(b.sections.size() == deck.slides.size());
  CHECK(b.sections[0].heading.rfind("Slide 1", 0) == 0);
  CHECK(b.assets.empty());
  auto any = load_any(fixtures().ref_slides(), "", scratch_dir("load_any"));
  CHECK(any == b);
  CHECK(error_code([] { load_any("/nonexistent/thing.docx", "", "/tmp"); }) == Errc::MissingBody);
}

TEST_CASE("image probing") {
  ImageInfo info;
  REQUIRE(probe_image(read_file(fixtures().root / "media" / "template_photo.png"), info));
  CHECK(info.format == "png");
  CHECK(info.width > 0);
  CHECK_FALSE(probe_image("GIF89a", info));
}

}
