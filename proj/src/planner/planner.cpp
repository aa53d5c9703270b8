#include "slidetailor/planner/planner.hpp"

#include <charconv>
#include <map>
#include <mutex>

#include "slidetailor/gateway/prompt.hpp"
#include "slidetailor/util.hpp"

namespace slidetailor::planner {

using gateway::schema::require_object;
using gateway::schema::require_string;
using gateway::schema::require_string_array;

// ---- reorganized document -------------------------------------------------

Json ReorganizedDoc::to_json() const {
  Json meta = Json::object();
  meta["title"] = title;
  meta["author"] = author;
  meta["publish date"] = publish_date;
  meta["organization"] = organization;
  Json secs = Json::array();
  for (const auto& s : sections) {
    Json subs = Json::array();
    for (const auto& sub : s.subsections) {
      Json e = Json::object();
      e["title"] = sub.title;
      e["content"] = sub.content;
      subs.push_back(std::move(e));
    }
    Json e = Json::object();
    e["title"] = s.title;
    e["subsections"] = std::move(subs);
    secs.push_back(std::move(e));
  }
  Json out = Json::object();
  out["metadata"] = std::move(meta);
  out["sections"] = std::move(secs);
  return out;
}

ReorganizedDoc ReorganizedDoc::from_json(const Json& j) {
  ReorganizedDoc doc;
  const auto& meta = j.at("metadata");
  doc.title = meta.value("title", "");
  doc.author = meta.value("author", "");
  doc.publish_date = meta.value("publish date", "");
  doc.organization = meta.value("organization", "");
  for (const auto& s : j.at("sections")) {
    DocSection sec{s.at("title").get<std::string>(), {}};
    for (const auto& sub : s.at("subsections")) {
      sec.subsections.push_back({sub.at("title").get<std::string>(), sub.at("content").get<std::string>()});
    }
    doc.sections.push_back(std::move(sec));
  }
  return doc;
}

std::vector<Diagnostic> validate_reorganized(Json& v) {
  std::vector<Diagnostic> out;
  if (!require_object(v, "", out)) return out;
  if (!v.contains("metadata") || v["metadata"].is_null()) v["metadata"] = Json::object();
  auto& meta = v["metadata"];
  if (require_object(meta, "/metadata", out)) {
    for (const char* key : {"title", "author", "publish date", "organization"}) {
      if (!meta.contains(key) || meta[key].is_null()) {
        meta[key] = "";
      } else if (meta[key].is_array()) {
        std::string joined;
        for (const auto& x : meta[key]) {
          if (!x.is_string()) continue;
          joined += (joined.empty() ? "" : ", ") + x.get<std::string>();
        }
        meta[key] = joined;
      } else if (!meta[key].is_string()) {
        out.push_back({"TypeMismatch", std::string("/metadata/") + key, "expected a string"});
      }
    }
  }
  if (!v.contains("sections")) {
    out.push_back({"MissingField", "/sections", "required field is missing"});
    return out;
  }
  const auto& secs = v["sections"];
  if (!secs.is_array()) {
    out.push_back({"TypeMismatch", "/sections", "expected an array"});
    return out;
  }
  if (secs.empty()) out.push_back({"EmptySections", "/sections", "at least one section is required"});
  for (std::size_t i = 0; i < secs.size(); ++i) {
    std::string path = "/sections/" + std::to_string(i);
    const auto& s = secs[i];
    if (!require_object(s, path, out)) continue;
    require_string(s, "title", path, out, true);
    if (!s.contains("subsections")) {
      out.push_back({"MissingField", path + "/subsections", "required field is missing"});
      continue;
    }
    if (!s["subsections"].is_array()) {
      out.push_back({"TypeMismatch", path + "/subsections", "expected an array"});
      continue;
    }
    for (std::size_t k = 0; k < s["subsections"].size(); ++k) {
      std::string sp = path + "/subsections/" + std::to_string(k);
      const auto& sub = s["subsections"][k];
      if (!require_object(sub, sp, out)) continue;
      require_string(sub, "title", sp, out, true);
      require_string(sub, "content", sp, out, true);
    }
  }
  return out;
}

// ---- outlines -----------------------------------------------------------------

std::optional<OutlineKey> parse_outline_key(const std::string& key) {
  auto us = key.find('_');
  if (us == std::string::npos || us == 0) return std::nullopt;
  OutlineKey out;
  auto [p, ec] = std::from_chars(key.data(), key.data() + us, out.index);
  if (ec != std::errc() || p != key.data() + us || out.index < 1) return std::nullopt;
  out.topic = key.substr(us + 1);
  if (trim(out.topic).empty()) return std::nullopt;
  return out;
}

std::optional<int> layout_index(const Json& entry) {
  if (!entry.is_object() || !entry.contains("layout") || !entry["layout"].is_string()) return std::nullopt;
  const auto& s = entry["layout"].get_ref<const std::string&>();
  if (s.rfind("slide_", 0) != 0 || s.size() == 6) return std::nullopt;
  int k = 0;
  auto [p, ec] = std::from_chars(s.data() + 6, s.data() + s.size(), k);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return k;
}

std::vector<Diagnostic> validate_outline(const Json& outline, const OutlineCheck& check) {
  std::vector<Diagnostic> out;
  if (!outline.is_object()) {
    out.push_back({"NotAnObject", "/", "the outline must be a JSON object keyed by \"<index>_<Slide Topic>\""});
    return out;
  }
  if (static_cast<int>(outline.size()) != check.num_slides) {
    out.push_back({"SlideCountMismatch", "/",
                   "expected exactly " + std::to_string(check.num_slides) + " slides, got " +
                       std::to_string(outline.size())});
  }
  std::map<std::string, std::string> image_owner;
  int expected_index = 1;
  for (const auto& [key, entry] : outline.items()) {
    std::string path = "/" + key;
    auto parsed = parse_outline_key(key);
    if (!parsed) {
      out.push_back({"BadKey", path, "slide keys must look like \"<index>_<Slide Topic>\""});
    } else if (parsed->index != expected_index) {
      out.push_back({"IndexGap", path,
                     "slide indices must run 1.." + std::to_string(check.num_slides) + " in order; expected " +
                         std::to_string(expected_index) + " here"});
    }
    ++expected_index;
    if (!require_object(entry, path, out)) continue;
    require_string(entry, "purpose", path, out);
    require_string_array(entry, "subsections", path, out);
    require_string(entry, "content_style", path, out);
    require_string(entry, "layout_recommendation", path, out);
    if (check.expect_speech) {
      if (*check.expect_speech) {
        require_string(entry, "speech_draft", path, out, true);
      } else if (entry.contains("speech_draft")) {
        out.push_back({"UnexpectedSpeech", path + "/speech_draft", "speech_draft must be omitted"});
      }
    }
    if (entry.contains("image_assets") && require_string_array(entry, "image_assets", path, out)) {
      const auto& imgs = entry["image_assets"];
      for (std::size_t i = 0; i < imgs.size(); ++i) {
        auto id = imgs[i].get<std::string>();
        std::string ip = path + "/image_assets/" + std::to_string(i);
        if (!check.known_asset_ids.count(id)) {
          out.push_back({"UnknownAssetId", ip, "\"" + id + "\" is not one of the available image ids"});
          continue;
        }
        auto [it, fresh] = image_owner.emplace(id, key);
        if (!fresh) {
          out.push_back({"DuplicateImageUse", ip, "\"" + id + "\" is already used by \"" + it->second +
                                                      "\"; each image may appear on one slide only"});
        }
      }
    }
    if (check.selected) {
      if (!entry.contains("layout")) {
        out.push_back({"MissingLayout", path + "/layout", "every slide needs a layout"});
      } else {
        auto k = layout_index(entry);
        if (!k || *k >= check.template_slide_count) {
          out.push_back({"LayoutOutOfRange", path + "/layout",
                         "layout must be one of slide_0..slide_" + std::to_string(check.template_slide_count - 1)});
        }
      }
      require_string(entry, "layout_justification", path, out);
    }
  }
  return out;
}

SelectionResult merge_layout_selection(const Json& input, const Json& selector_output, int template_slide_count) {
  SelectionResult result;
  auto& diags = result.diagnostics;
  if (!selector_output.is_object()) {
    diags.push_back({"NotAnObject", "/", "expected the outline JSON object"});
    return result;
  }
  for (const auto& [key, entry] : selector_output.items()) {
    if (!input.contains(key)) {
      diags.push_back({"ContentMutated", "/" + key, "slide key is not in the original outline; keep keys unchanged"});
    }
  }
  result.outline = Json::object();
  for (const auto& [key, original] : input.items()) {
    std::string path = "/" + key;
    if (!selector_output.contains(key)) {
      diags.push_back({"ContentMutated", path, "slide is missing; keep every original slide"});
      continue;
    }
    const auto& chosen = selector_output[key];
    if (!require_object(chosen, path, diags)) continue;
    Json merged = Json::object();
    for (const auto& [field, value] : original.items()) {
      if (field == "layout" || field == "layout_justification") continue;
      merged[field] = value;
      if (!chosen.contains(field)) {
        diags.push_back({"ContentMutated", path + "/" + field, "field was removed; keep it exactly as given"});
      } else if (chosen[field].dump() != value.dump()) {
        diags.push_back({"ContentMutated", path + "/" + field, "field was changed; keep it exactly as given"});
      }
    }
    for (const auto& [field, value] : chosen.items()) {
      if (field != "layout" && field != "layout_justification" && !original.contains(field)) {
        diags.push_back({"ContentMutated", path + "/" + field, "only layout and layout_justification may be added"});
      }
    }
    auto k = layout_index(chosen);
    if (!chosen.contains("layout")) {
      diags.push_back({"MissingLayout", path + "/layout", "every slide needs a layout"});
    } else if (!k || *k < 0 || *k >= template_slide_count) {
      diags.push_back({"LayoutOutOfRange", path + "/layout",
                       "layout must be one of slide_0..slide_" + std::to_string(template_slide_count - 1)});
    }
    if (!chosen.contains("layout_justification") || !chosen["layout_justification"].is_string()) {
      diags.push_back({"MissingField", path + "/layout_justification", "a short justification string is required"});
    }
    if (chosen.contains("layout")) merged["layout"] = chosen["layout"];
    if (chosen.contains("layout_justification")) merged["layout_justification"] = chosen["layout_justification"];
    result.outline[key] = std::move(merged);
  }
  return result;
}

// ---- stages -------------------------------------------------------------------

void register_schemas() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto& catalog = gateway::schema_catalog();
    catalog.add(kReorganizedSchema, validate_reorganized);
    catalog.add(kOutlineSchema, [](Json& v) {
      std::vector<Diagnostic> out;
      require_object(v, "", out);
      return out;
    });
    catalog.add(kSelectionSchema, [](Json& v) {
      std::vector<Diagnostic> out;
      require_object(v, "", out);
      return out;
    });
  });
}

std::string paper_prompt_text(const ingest::PaperBundle& paper) {
  std::string head;
  const auto& m = paper.metadata;
  if (!m.title.empty()) head += "Title: " + m.title + "\n";
  if (!m.authors.empty()) head += "Authors: " + m.authors + "\n";
  if (!m.venue.empty()) head += "Venue: " + m.venue + "\n";
  if (!m.organization.empty()) head += "Organization: " + m.organization + "\n";
  if (!head.empty()) head += "\n";
  return head + paper.body_text();
}

namespace {

std::string guidelines_text(const std::optional<distill::ContentPreferenceProfile>& pref) {
  return pref ? pref->to_json().dump(2) : std::string(kNoGuidelines);
}

// The most specific error code among the last diagnostics.
Error remap(const Error& e, std::initializer_list<std::pair<const char*, Errc>> order) {
  for (const auto& [code, errc] : order) {
    for (const auto& d : e.diagnostics()) {
      if (d.code == code) return Error(errc, e.what(), e.diagnostics());
    }
  }
  return e;
}

}  // namespace

ReorganizedDoc reorganize_paper(const ingest::PaperBundle& target,
                                const std::optional<distill::ContentPreferenceProfile>& content_pref,
                                gateway::ModelGateway& gw, const gateway::ModelOptions& options) {
  register_schemas();
  auto prompt = gateway::render_prompt(gateway::prompt_template("paper_reorganizer").text,
                                       {{"user preference guidelines", guidelines_text(content_pref)},
                                        {"target paper", paper_prompt_text(target)}});
  try {
    auto outcome = gw.complete_structured(gateway::make_request(std::move(prompt), options, "paper_reorganizer"),
                                          kReorganizedSchema);
    return ReorganizedDoc::from_json(outcome.value);
  } catch (const Error& e) {
    if (e.code() != Errc::ExhaustedRepairs) throw;
    throw remap(e, {{"EmptySections", Errc::EmptySections}});
  }
}

std::string outline_prompt(const ReorganizedDoc& doc,
                           const std::optional<distill::ContentPreferenceProfile>& content_pref,
                           const std::vector<ingest::AssetRecord>& assets, const OutlineOptions& options) {
  std::string images;
  for (const auto& a : assets) {
    images += "- " + a.asset_id + " (" + std::string(ingest::to_string(a.kind)) + "): " +
              (a.caption.empty() ? "(no caption)" : a.caption) + "\n";
  }
  if (images.empty()) images = "(no images available)\n";

  std::string text(gateway::prompt_template("slide_outline").text);
  if (!options.chain_of_speech) {
    std::string kept;
    for (const auto& line : split_lines(text)) {
      if (line.find("speech_draft") != std::string::npos) continue;
      kept += line;
      kept += '\n';
    }
    text = std::move(kept);
  }
  std::string n = std::to_string(options.num_slides);
  return gateway::render_prompt(text, {{"summarized_doc_content", doc.to_json().dump(2)},
                                       {"pref_guidelines", guidelines_text(content_pref)},
                                       {"image_information", images},
                                       {"num_slides", n}});
}

Json generate_outline(const ReorganizedDoc& doc, const std::optional<distill::ContentPreferenceProfile>& content_pref,
                      const std::vector<ingest::AssetRecord>& assets, const OutlineOptions& outline_options,
                      gateway::ModelGateway& gw, const gateway::ModelOptions& options) {
  register_schemas();
  if (outline_options.num_slides < 2) {
    throw Error(Errc::PreconditionFailed, "num_slides must be at least 2");
  }
  OutlineCheck check;
  check.num_slides = outline_options.num_slides;
  for (const auto& a : assets) check.known_asset_ids.insert(a.asset_id);
  check.expect_speech = outline_options.chain_of_speech;

  auto request = gateway::make_request(outline_prompt(doc, content_pref, assets, outline_options), options,
                                       "slide_outline");
  try {
    // Slide-count enforcement: two repair rounds, then fail.
    auto outcome = gw.complete_structured(std::move(request), kOutlineSchema, 2,
                                          [&](const Json& v) { return validate_outline(v, check); });
    return outcome.value;
  } catch (const Error& e) {
    if (e.code() != Errc::ExhaustedRepairs) throw;
    throw remap(e, {{"SlideCountMismatch", Errc::SlideCountMismatch},
                    {"DuplicateImageUse", Errc::DuplicateImageUse},
                    {"UnknownAssetId", Errc::UnknownAssetId}});
  }
}

Json select_layouts(const Json& outline, const distill::AestheticProfile& aesthetic, gateway::ModelGateway& gw,
                    const gateway::ModelOptions& options) {
  register_schemas();
  if (aesthetic.template_slide_count < 1) throw Error(Errc::PreconditionFailed, "template has no slides");
  Json keys = Json::object();
  for (std::size_t i = 0; i < aesthetic.slide_themes.size(); ++i) {
    keys["slide_" + std::to_string(i)] = aesthetic.slide_themes[i];
  }
  auto prompt = gateway::render_prompt(gateway::prompt_template("layout_selection").text,
                                       {{"content_outline", outline.dump(4)}, {"functional_keys", keys.dump(4)}});
  int m = aesthetic.template_slide_count;
  try {
    auto outcome = gw.complete_structured(
        gateway::make_request(std::move(prompt), options, "layout_selection"), kSelectionSchema,
        gateway::kDefaultMaxRepairs,
        [&](const Json& v) { return merge_layout_selection(outline, v, m).diagnostics; });
    return merge_layout_selection(outline, outcome.value, m).outline;
  } catch (const Error& e) {
    if (e.code() != Errc::ExhaustedRepairs) throw;
    throw remap(e, {{"ContentMutated", Errc::ContentMutated}, {"LayoutOutOfRange", Errc::LayoutOutOfRange}});
  }
}

}  // namespace slidetailor::planner
