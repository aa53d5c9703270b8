#include "slidetailor/realizer/realizer.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <set>

#include "slidetailor/gateway/prompt.hpp"
#include "slidetailor/util.hpp"

namespace slidetailor::realizer {

using gateway::schema::require_object;

std::string_view to_string(Action action) noexcept {
  switch (action) {
    case Action::SetText: return "set_text";
    case Action::ReplaceImage: return "replace_image";
    case Action::Delete: return "delete";
  }
  return "delete";
}

namespace {

Json assignment_json(const Assignment& a) {
  Json j = Json::object();
  j["shape_id"] = a.shape_id;
  j["element_index"] = a.element_index;
  j["action"] = to_string(a.action);
  if (a.action == Action::SetText) j["text"] = a.text;
  if (a.action == Action::ReplaceImage) j["asset_id"] = a.asset_id;
  if (a.automatic) j["automatic"] = true;
  return j;
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

}  // namespace

Json ElementMapping::to_json() const {
  Json list = Json::array();
  for (const auto& a : assignments) list.push_back(assignment_json(a));
  Json j = Json::object();
  j["outline_key"] = outline_key;
  j["template_index"] = template_index;
  j["assignments"] = std::move(list);
  return j;
}

MappingValidation validate_mapping(const Json& raw, const deck::SlideModel& slide,
                                   const std::vector<std::string>& allowed_assets) {
  MappingValidation out;
  auto& diags = out.diagnostics;
  if (!require_object(raw, "", diags)) return out;
  if (!raw.contains("assignments")) {
    diags.push_back({"MissingField", "/assignments", "required field is missing"});
    return out;
  }
  const auto& list = raw["assignments"];
  if (!list.is_array()) {
    diags.push_back({"TypeMismatch", "/assignments", "expected an array"});
    return out;
  }
  std::set<int> used;
  for (std::size_t i = 0; i < list.size(); ++i) {
    std::string path = "/assignments/" + std::to_string(i);
    const auto& e = list[i];
    if (!require_object(e, path, diags)) continue;
    if (!e.contains("shape_id") || !e["shape_id"].is_number_integer()) {
      diags.push_back({"TypeMismatch", path + "/shape_id", "shape_id must be an integer element id"});
      continue;
    }
    int index = e["shape_id"].get<int>();
    if (index < 0 || static_cast<std::size_t>(index) >= slide.shapes.size()) {
      diags.push_back({"UnknownShapeId", path + "/shape_id",
                       "element id " + std::to_string(index) + " does not exist; valid ids are 0.." +
                           std::to_string(static_cast<int>(slide.shapes.size()) - 1)});
      continue;
    }
    const auto& shape = slide.shapes[static_cast<std::size_t>(index)];
    if (!used.insert(index).second) {
      diags.push_back({"DuplicateAssignment", path + "/shape_id",
                       "element " + std::to_string(index) + " is assigned more than once"});
      continue;
    }
    Assignment a;
    a.element_index = index;
    a.shape_id = shape.shape_id;
    std::string action = e.contains("action") && e["action"].is_string() ? e["action"].get<std::string>() : "";
    if (action == "set_text") {
      a.action = Action::SetText;
      if (!shape.accepts_text()) {
        diags.push_back({"IllegalAction", path + "/action",
                         "element " + std::to_string(index) + " is a " + std::string(deck::to_string(shape.kind)) +
                             " and cannot hold text"});
        continue;
      }
      const Json* text = e.contains("text") ? &e["text"] : nullptr;
      if (text && text->is_string()) {
        a.text = {text->get<std::string>()};
      } else if (text && text->is_array() &&
                 std::all_of(text->begin(), text->end(), [](const Json& x) { return x.is_string(); })) {
        a.text = text->get<std::vector<std::string>>();
      } else {
        diags.push_back({"TypeMismatch", path + "/text", "text must be a list of paragraph strings"});
        continue;
      }
    } else if (action == "replace_image") {
      a.action = Action::ReplaceImage;
      if (!shape.accepts_image()) {
        diags.push_back({"IllegalAction", path + "/action",
                         "element " + std::to_string(index) + " is a " + std::string(deck::to_string(shape.kind)) +
                             " and cannot hold an image"});
        continue;
      }
      if (!e.contains("asset_id") || !e["asset_id"].is_string()) {
        diags.push_back({"MissingField", path + "/asset_id", "replace_image needs an asset_id"});
        continue;
      }
      a.asset_id = e["asset_id"].get<std::string>();
      if (std::find(allowed_assets.begin(), allowed_assets.end(), a.asset_id) == allowed_assets.end()) {
        diags.push_back({"UnknownAssetId", path + "/asset_id",
                         "\"" + a.asset_id + "\" is not listed under Available Assets"});
        continue;
      }
    } else if (action == "delete") {
      a.action = Action::Delete;
    } else {
      diags.push_back({"IllegalAction", path + "/action",
                       "action must be \"set_text\", \"replace_image\" or \"delete\""});
      continue;
    }
    out.assignments.push_back(std::move(a));
  }
  return out;
}

void complete_mapping(std::vector<Assignment>& assignments, const deck::SlideModel& slide) {
  for (auto& a : assignments) {
    const auto& shape = slide.shapes[static_cast<std::size_t>(a.element_index)];
    bool blank = std::all_of(a.text.begin(), a.text.end(), [](const std::string& t) { return trim(t).empty(); });
    if (a.action == Action::SetText && shape.is_placeholder() && blank) {
      a.action = Action::Delete;
      a.text.clear();
    }
  }
  std::set<int> assigned;
  for (const auto& a : assignments) assigned.insert(a.element_index);
  for (std::size_t i = 0; i < slide.shapes.size(); ++i) {
    const auto& shape = slide.shapes[i];
    if (shape.kind != deck::ShapeKind::Placeholder || assigned.count(static_cast<int>(i))) continue;
    Assignment del;
    del.element_index = static_cast<int>(i);
    del.shape_id = shape.shape_id;
    del.action = Action::Delete;
    del.automatic = true;
    assignments.push_back(del);
  }
}

void register_schemas() {
  static std::once_flag once;
  std::call_once(once, [] {
    gateway::schema_catalog().add(kMappingSchema, [](Json& v) {
      std::vector<Diagnostic> out;
      if (!require_object(v, "", out)) return out;
      if (!v.contains("assignments")) out.push_back({"MissingField", "/assignments", "required field is missing"});
      else if (!v["assignments"].is_array()) out.push_back({"TypeMismatch", "/assignments", "expected an array"});
      return out;
    });
  });
}

Json slide_plan(const std::string& outline_key, const Json& entry, const planner::ReorganizedDoc& doc) {
  auto key = planner::parse_outline_key(outline_key);
  Json plan = Json::object();
  plan["slide_title"] = key ? key->topic : outline_key;
  for (const auto& [field, value] : entry.items()) {
    if (field == "layout_justification") continue;
    plan[field] = value;
  }
  Json sources = Json::array();
  if (entry.contains("subsections") && entry["subsections"].is_array()) {
    for (const auto& wanted : entry["subsections"]) {
      if (!wanted.is_string()) continue;
      auto canon = canonicalize_label(wanted.get<std::string>());
      for (const auto& sec : doc.sections) {
        for (const auto& sub : sec.subsections) {
          if (canonicalize_label(sub.title) == canon) {
            Json s = Json::object();
            s["title"] = sub.title;
            s["content"] = sub.content;
            sources.push_back(std::move(s));
          }
        }
      }
    }
  }
  plan["subsection_content"] = std::move(sources);
  Json document = Json::object();
  document["title"] = doc.title;
  document["author"] = doc.author;
  document["organization"] = doc.organization;
  plan["document"] = std::move(document);
  return plan;
}

ElementMapping map_content_to_elements(const std::string& outline_key, const Json& entry,
                                       const planner::ReorganizedDoc& doc, const deck::DeckModel& tmpl,
                                       const distill::AestheticProfile& aesthetic,
                                       const std::vector<ingest::AssetRecord>& assets, gateway::ModelGateway& gw,
                                       const gateway::ModelOptions& options) {
  register_schemas();
  auto k = planner::layout_index(entry);
  if (!k || *k < 0 || static_cast<std::size_t>(*k) >= tmpl.slides.size()) {
    throw Error(Errc::PreconditionFailed, outline_key + " has no layout within the template");
  }
  const auto& slide = tmpl.slides[static_cast<std::size_t>(*k)];

  std::vector<std::string> allowed;
  std::string asset_lines;
  if (entry.contains("image_assets") && entry["image_assets"].is_array()) {
    for (const auto& id : entry["image_assets"]) {
      if (!id.is_string()) continue;
      const auto* rec = [&]() -> const ingest::AssetRecord* {
        for (const auto& a : assets) {
          if (a.asset_id == id.get<std::string>()) return &a;
        }
        return nullptr;
      }();
      if (!rec) continue;
      allowed.push_back(rec->asset_id);
      asset_lines += "- " + rec->asset_id + " (" + std::string(ingest::to_string(rec->kind)) + "): " +
                     (rec->caption.empty() ? "(no caption)" : rec->caption) + "\n";
    }
  }
  if (asset_lines.empty()) asset_lines = "(none)\n";

  std::string theme = static_cast<std::size_t>(*k) < aesthetic.slide_themes.size()
                          ? aesthetic.slide_themes[static_cast<std::size_t>(*k)]
                          : "";
  auto prompt = gateway::render_prompt(gateway::prompt_template("element_mapping").text,
                                       {{"slide_plan", slide_plan(outline_key, entry, doc).dump(2)},
                                        {"slide_theme", theme},
                                        {"slide_elements", deck::describe_slide(slide).dump(2)},
                                        {"assets", asset_lines}});
  try {
    auto outcome = gw.complete_structured(
        gateway::make_request(std::move(prompt), options, "element_mapping"), kMappingSchema,
        gateway::kDefaultMaxRepairs, [&](const Json& v) { return validate_mapping(v, slide, allowed).diagnostics; });
    ElementMapping mapping;
    mapping.outline_key = outline_key;
    mapping.template_index = *k;
    mapping.assignments = validate_mapping(outcome.value, slide, allowed).assignments;
    complete_mapping(mapping.assignments, slide);
    return mapping;
  } catch (const Error& e) {
    if (e.code() != Errc::ExhaustedRepairs) throw;
    for (auto [code, errc] : {std::pair{"UnknownShapeId", Errc::UnknownShapeId}, {"IllegalAction", Errc::IllegalAction}}) {
      for (const auto& d : e.diagnostics()) {
        if (d.code == code) throw Error(errc, e.what(), e.diagnostics());
      }
    }
    throw;
  }
}

deck::EditPlan build_edit_plan(const std::vector<ElementMapping>& mappings,
                               const std::vector<ingest::AssetRecord>& assets) {
  deck::EditPlan plan;
  for (std::size_t i = 0; i < mappings.size(); ++i) {
    int out = static_cast<int>(i);
    plan.push_back(deck::CloneTemplateSlide{mappings[i].template_index});
    for (const auto& a : mappings[i].assignments) {
      switch (a.action) {
        case Action::SetText:
          plan.push_back(deck::SetText{out, a.shape_id, a.text});
          break;
        case Action::ReplaceImage: {
          auto it = std::find_if(assets.begin(), assets.end(),
                                 [&](const ingest::AssetRecord& r) { return r.asset_id == a.asset_id; });
          if (it == assets.end()) {
            throw Error(Errc::UnknownAssetId,
                        mappings[i].outline_key + ": asset \"" + a.asset_id + "\" is not in the paper bundle");
          }
          plan.push_back(deck::ReplaceImage{out, a.shape_id, it->file_path});
          break;
        }
        case Action::Delete:
          plan.push_back(deck::DeleteShape{out, a.shape_id});
          break;
      }
    }
  }
  return plan;
}

Json RealizeReport::to_json() const {
  Json list = Json::array();
  for (const auto& s : slides) {
    Json applied = Json::array();
    for (const auto& a : s.applied) applied.push_back(assignment_json(a));
    Json e = Json::object();
    e["outline_key"] = s.outline_key;
    e["template_index"] = s.template_index;
    e["assignments"] = std::move(applied);
    e["deleted_shape_ids"] = s.deleted_shape_ids;
    e["warnings"] = s.warnings;
    list.push_back(std::move(e));
  }
  Json j = Json::object();
  j["output_path"] = output_path.generic_string();
  j["slides"] = std::move(list);
  return j;
}

RealizedDeck realize_deck(const deck::DeckModel& tmpl, const Json& outline, const std::vector<ElementMapping>& mappings,
                          const std::vector<ingest::AssetRecord>& assets, const RealizeOptions& options) {
  if (!outline.is_object() || outline.size() != mappings.size()) {
    throw Error(Errc::PreconditionFailed, "need exactly one element mapping per outline entry");
  }
  auto plan = build_edit_plan(mappings, assets);
  std::size_t i = 0;
  if (options.embed_notes) {
    for (const auto& [key, entry] : outline.items()) {
      if (entry.contains("speech_draft") && entry["speech_draft"].is_string()) {
        plan.push_back(deck::SetNotes{static_cast<int>(i), entry["speech_draft"].get<std::string>()});
      }
      ++i;
    }
  }
  RealizedDeck out{deck::apply_edit_plan(tmpl, plan), {}};

  for (const auto& m : mappings) {
    SlideReport rep;
    rep.outline_key = m.outline_key;
    rep.template_index = m.template_index;
    rep.applied = m.assignments;
    const auto& slide = tmpl.slides[static_cast<std::size_t>(m.template_index)];
    for (const auto& a : m.assignments) {
      if (a.action == Action::Delete) rep.deleted_shape_ids.push_back(a.shape_id);
      if (a.action != Action::SetText) continue;
      const auto* shape = slide.find_shape(a.shape_id);
      std::size_t chars = 0;
      for (const auto& t : a.text) chars += utf8_length(t);
      double area = shape->bbox.width_pt() * shape->bbox.height_pt();
      if (area <= 0) continue;
      double capacity = options.overflow_threshold * area;
      if (static_cast<double>(chars) > capacity) {
        rep.warnings.push_back("element " + std::to_string(a.element_index) + " (shape " + std::to_string(a.shape_id) +
                               "): " + std::to_string(chars) + " characters exceed the estimated capacity of " +
                               std::to_string(static_cast<long>(std::floor(capacity))));
      }
    }
    out.report.slides.push_back(std::move(rep));
  }
  return out;
}

std::vector<NarrationRecord> narration_from_outline(const Json& outline) {
  std::vector<NarrationRecord> out;
  int i = 0;
  for (const auto& [key, entry] : outline.items()) {
    if (!entry.is_object() || !entry.contains("speech_draft") || !entry["speech_draft"].is_string()) {
      throw Error(Errc::MissingSpeech, "outline entry \"" + key + "\" has no speech_draft");
    }
    auto parsed = planner::parse_outline_key(key);
    out.push_back({i++, parsed ? parsed->topic : key, entry["speech_draft"].get<std::string>()});
  }
  return out;
}

std::vector<NarrationRecord> export_narration(const Json& outline, const fs::path& out_dir) {
  auto records = narration_from_outline(outline);
  Json list = Json::array();
  std::string text;
  for (const auto& r : records) {
    Json e = Json::object();
    e["slide_index"] = r.slide_index;
    e["title"] = r.title;
    e["speech_text"] = r.speech_text;
    list.push_back(std::move(e));
    text += "Slide " + std::to_string(r.slide_index + 1) + ": " + r.title + "\n" + r.speech_text + "\n\n";
  }
  fs::create_directories(out_dir);
  write_file_atomic(out_dir / "narration.json", list.dump(2) + "\n");
  write_file_atomic(out_dir / "narration.txt", text);
  return records;
}

std::vector<NarrationRecord> load_narration(const fs::path& json_path) {
  auto j = Json::parse(read_file(json_path));
  std::vector<NarrationRecord> out;
  for (const auto& e : j) {
    out.push_back({e.at("slide_index").get<int>(), e.at("title").get<std::string>(),
                   e.at("speech_text").get<std::string>()});
  }
  return out;
}

}  // namespace slidetailor::realizer
