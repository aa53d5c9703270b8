#include "slidetailor/ingest/bundle.hpp"

#include <map>
#include <set>

#include "slidetailor/util.hpp"

namespace slidetailor::ingest {

std::string_view to_string(AssetKind kind) noexcept {
  return kind == AssetKind::Table ? "table" : "figure";
}

std::string PaperBundle::body_text() const {
  std::string out;
  for (const auto& s : sections) {
    if (!out.empty()) out += "\n\n";
    if (!(s.heading == "Preamble" && &s == &sections.front())) out += "## " + s.heading + "\n\n";
    out += s.text;
  }
  return out;
}

const AssetRecord* PaperBundle::find_asset(std::string_view asset_id) const {
  for (const auto& a : assets) {
    if (a.asset_id == asset_id) return &a;
  }
  return nullptr;
}

namespace {

// "### Title" -> "Title"; empty when the line is not an ATX heading.
std::optional<std::string> heading_of(const std::string& line) {
  std::size_t level = 0;
  while (level < line.size() && line[level] == '#') ++level;
  if (level == 0 || level > 6) return std::nullopt;
  if (level < line.size() && line[level] != ' ' && line[level] != '\t') return std::nullopt;
  std::string text = trim(std::string_view(line).substr(level));
  while (!text.empty() && text.back() == '#') text.pop_back();
  text = trim(text);
  if (text.empty()) return std::nullopt;
  return text;
}

}  // namespace

std::vector<Section> split_sections(std::string_view markdown) {
  std::vector<Section> out;
  Section current{"Preamble", ""};
  bool in_fence = false;
  auto flush = [&] {
    current.text = trim(current.text);
    if (current.heading != "Preamble" || !out.empty() || !current.text.empty()) out.push_back(current);
  };
  for (const auto& line : split_lines(markdown)) {
    auto stripped = trim(line);
    if (stripped.rfind("```", 0) == 0 || stripped.rfind("~~~", 0) == 0) in_fence = !in_fence;
    if (!in_fence) {
      if (auto h = heading_of(line)) {
        flush();
        current = Section{*h, ""};
        continue;
      }
    }
    current.text += line;
    current.text += '\n';
  }
  flush();
  return out;
}

namespace {

std::string string_field(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return "";
  if (it->is_string()) return it->get<std::string>();
  if (it->is_array()) {
    std::string joined;
    for (const auto& v : *it) {
      if (!v.is_string()) continue;
      if (!joined.empty()) joined += ", ";
      joined += v.get<std::string>();
    }
    return joined;
  }
  return it->dump();
}

Error bad_asset(const std::string& id, const std::string& cause) {
  return Error(Errc::BadAsset, "asset '" + id + "': " + cause, {{"BadAsset", id, cause}});
}

}  // namespace

PaperBundle load_bundle(const fs::path& directory) {
  PaperBundle bundle;
  fs::path body_path = directory / "paper.md";
  if (!fs::is_regular_file(body_path)) body_path = directory / "paper.txt";
  if (!fs::is_regular_file(body_path)) {
    throw Error(Errc::MissingBody, directory.string() + " has no paper.md or paper.txt");
  }
  std::string body = read_file(body_path);
  bundle.sections = split_sections(body);
  if (bundle.sections.empty()) throw Error(Errc::MissingBody, body_path.string() + " is empty");

  std::map<std::string, int> seen;
  for (auto& s : bundle.sections) {
    int n = ++seen[canonicalize_label(s.heading)];
    if (n > 1) {
      s.heading += " (" + std::to_string(n) + ")";
      ++seen[canonicalize_label(s.heading)];
    }
  }

  if (auto meta_path = directory / "metadata.json"; fs::is_regular_file(meta_path)) {
    Json meta;
    try {
      meta = Json::parse(read_file(meta_path));
    } catch (const Json::parse_error& e) {
      throw Error(Errc::ParseFailure, meta_path.string() + ": " + e.what());
    }
    if (meta.is_object()) {
      bundle.metadata.title = string_field(meta, "title");
      bundle.metadata.authors = string_field(meta, "authors");
      bundle.metadata.venue = string_field(meta, "venue");
      bundle.metadata.organization = string_field(meta, "organization");
    }
  }
  if (bundle.metadata.title.empty() && bundle.sections.front().heading != "Preamble") {
    bundle.metadata.title = bundle.sections.front().heading;
  }

  auto assets_dir = directory / "assets";
  auto manifest_path = assets_dir / "manifest.json";
  if (!fs::is_regular_file(manifest_path)) {
    throw Error(Errc::MissingManifest, directory.string() + " has no assets/manifest.json");
  }
  Json manifest;
  try {
    manifest = Json::parse(read_file(manifest_path));
  } catch (const Json::parse_error& e) {
    throw Error(Errc::MissingManifest, manifest_path.string() + " is not valid JSON: " + e.what());
  }
  if (!manifest.is_array()) throw Error(Errc::MissingManifest, manifest_path.string() + " must hold a JSON array");

  std::set<std::string> ids;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& entry = manifest[i];
    std::string label = "#" + std::to_string(i);
    if (!entry.is_object()) throw bad_asset(label, "manifest entry is not an object");
    if (!entry.contains("asset_id") || !entry["asset_id"].is_string() || entry["asset_id"].get<std::string>().empty()) {
      throw bad_asset(label, "missing asset_id");
    }
    AssetRecord rec;
    rec.asset_id = entry["asset_id"].get<std::string>();
    if (!ids.insert(rec.asset_id).second) throw bad_asset(rec.asset_id, "duplicate asset_id");
    std::string kind = entry.value("kind", "");
    if (kind == "figure") rec.kind = AssetKind::Figure;
    else if (kind == "table") rec.kind = AssetKind::Table;
    else throw bad_asset(rec.asset_id, "kind must be \"figure\" or \"table\"");
    if (!entry.contains("caption") || !entry["caption"].is_string()) {
      throw bad_asset(rec.asset_id, "caption must be present (it may be empty)");
    }
    rec.caption = entry["caption"].get<std::string>();
    rec.source_locator = string_field(entry, "source_locator");
    if (!entry.contains("file_path") || !entry["file_path"].is_string()) {
      throw bad_asset(rec.asset_id, "missing file_path");
    }
    rec.file_path = fs::absolute(assets_dir / entry["file_path"].get<std::string>()).lexically_normal();
    if (!fs::is_regular_file(rec.file_path)) throw bad_asset(rec.asset_id, rec.file_path.string() + " does not exist");
    ImageInfo info;
    if (!probe_image(read_file(rec.file_path), info)) {
      throw bad_asset(rec.asset_id, rec.file_path.string() + " is not a decodable PNG or JPEG");
    }
    bundle.assets.push_back(std::move(rec));
  }
  return bundle;
}

PaperBundle extract_pdf(const fs::path& pdf, const std::string& command, const fs::path& out_dir) {
  if (command.empty()) throw Error(Errc::ExtractorUnavailable, "no PDF extractor command configured");
  fs::create_directories(out_dir);
  auto result = run_shell_command(command, {pdf.string(), out_dir.string()});
  if (result.exit_code == 127) {
    throw Error(Errc::ExtractorUnavailable, "extractor could not be run: " + result.stderr_text);
  }
  if (result.exit_code != 0) {
    throw Error(Errc::ExtractorFailed,
                "extractor exited with status " + std::to_string(result.exit_code) + ": " + result.stderr_text);
  }
  return load_bundle(out_dir);
}

std::vector<Diagnostic> validate_bundle(const PaperBundle& bundle) {
  std::vector<Diagnostic> out;
  bool any_text = false;
  for (const auto& s : bundle.sections) any_text = any_text || !trim(s.text).empty() || !trim(s.heading).empty();
  if (bundle.sections.empty() || !any_text) out.push_back({"EmptyBody", "/sections", "bundle has no body text"});

  std::map<std::string, std::size_t> headings;
  for (std::size_t i = 0; i < bundle.sections.size(); ++i) {
    auto key = canonicalize_label(bundle.sections[i].heading);
    auto [it, fresh] = headings.emplace(key, i);
    if (!fresh) {
      out.push_back({"DuplicateSection", "/sections/" + std::to_string(i),
                     "heading '" + bundle.sections[i].heading + "' repeats section " + std::to_string(it->second)});
    }
  }

  std::set<std::string> ids;
  for (std::size_t i = 0; i < bundle.assets.size(); ++i) {
    const auto& a = bundle.assets[i];
    std::string path = "/assets/" + std::to_string(i);
    if (a.asset_id.empty()) out.push_back({"EmptyAssetId", path, "asset id is empty"});
    if (!ids.insert(a.asset_id).second) {
      out.push_back({"DuplicateAssetId", path, "asset id '" + a.asset_id + "' is not unique"});
    }
    ImageInfo info;
    if (!fs::is_regular_file(a.file_path)) {
      out.push_back({"MissingAssetFile", path, a.file_path.string() + " does not exist"});
    } else if (!probe_image(read_file(a.file_path), info)) {
      out.push_back({"UndecodableAsset", path, a.file_path.string() + " is not a PNG or JPEG"});
    }
  }
  return out;
}

PaperBundle bundle_from_deck(const deck::DeckModel& deck) {
  PaperBundle bundle;
  for (std::size_t i = 0; i < deck.slides.size(); ++i) {
    const auto& slide = deck.slides[i];
    std::string title;
    for (const auto& s : slide.shapes) {
      if (s.placeholder_type == "title" || s.placeholder_type == "ctrTitle") {
        title = trim(s.text());
        break;
      }
    }
    Section sec;
    sec.heading = "Slide " + std::to_string(i + 1) + (title.empty() ? "" : ": " + title);
    std::string text;
    for (const auto& s : slide.shapes) {
      if (s.placeholder_type == "title" || s.placeholder_type == "ctrTitle") continue;
      std::string t = trim(s.paragraphs.empty() ? s.nested_text : s.text());
      if (t.empty()) continue;
      if (!text.empty()) text += "\n";
      text += t;
    }
    sec.text = text;
    if (i == 0) bundle.metadata.title = title;
    bundle.sections.push_back(std::move(sec));
  }
  return bundle;
}

PaperBundle load_any(const fs::path& path, const std::string& extractor_command, const fs::path& scratch_dir) {
  if (fs::is_directory(path)) return load_bundle(path);
  auto ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".pptx") return bundle_from_deck(deck::parse_deck_file(path));
  if (ext == ".pdf") return extract_pdf(path, extractor_command, scratch_dir / path.stem());
  throw Error(Errc::MissingBody, path.string() + " is not a bundle directory, .pptx deck, or .pdf");
}

Json to_json(const PaperBundle& bundle) {
  Json sections = Json::array();
  for (const auto& s : bundle.sections) sections.push_back({{"heading", s.heading}, {"text", s.text}});
  Json assets = Json::array();
  for (const auto& a : bundle.assets) {
    assets.push_back({{"asset_id", a.asset_id},
                      {"kind", to_string(a.kind)},
                      {"file_path", a.file_path.generic_string()},
                      {"caption", a.caption},
                      {"source_locator", a.source_locator}});
  }
  return Json{{"metadata",
               {{"title", bundle.metadata.title},
                {"authors", bundle.metadata.authors},
                {"venue", bundle.metadata.venue},
                {"organization", bundle.metadata.organization}}},
              {"sections", std::move(sections)},
              {"assets", std::move(assets)}};
}

}  // namespace slidetailor::ingest
