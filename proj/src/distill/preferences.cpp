#include "slidetailor/distill/preferences.hpp"

#include <mutex>
#include <set>

#include "slidetailor/gateway/prompt.hpp"
#include "slidetailor/util.hpp"

namespace slidetailor::distill {

using gateway::schema::require_object;
using gateway::schema::require_string;
using gateway::schema::require_string_array;

const std::vector<std::string>& content_handling_values() {
  static const std::vector<std::string> values{"Expanded", "Newly Added", "Condensed"};
  return values;
}

Json ContentPreferenceProfile::to_json() const {
  Json sections = Json::array();
  for (const auto& s : section_level_preferences) {
    Json e = Json::object();
    e["section_name"] = s.section_name;
    e["content_handling"] = s.content_handling;
    e["formatting_preferences"] = s.formatting_preferences;
    e["additional_comments"] = s.additional_comments;
    sections.push_back(std::move(e));
  }
  Json g = Json::object();
  g["narrative_flow_preference"] = narrative_flow_preference;
  g["section_level_preferences"] = std::move(sections);
  g["omitted_sections"] = omitted_sections;
  Json out = Json::object();
  out["presentation_guidelines"] = std::move(g);
  return out;
}

ContentValidation validate_content_profile(const Json& raw) {
  ContentValidation result;
  auto& diags = result.diagnostics;
  if (!require_object(raw, "", diags)) return result;
  if (!raw.contains("presentation_guidelines")) {
    diags.push_back({"MissingField", "/presentation_guidelines", "required field is missing"});
    return result;
  }
  const auto& g = raw["presentation_guidelines"];
  const std::string base = "/presentation_guidelines";
  if (!require_object(g, base, diags)) return result;

  ContentPreferenceProfile profile;
  if (require_string_array(g, "narrative_flow_preference", base, diags)) {
    profile.narrative_flow_preference = g["narrative_flow_preference"].get<std::vector<std::string>>();
    if (profile.narrative_flow_preference.empty()) {
      diags.push_back({"EmptyFlow", base + "/narrative_flow_preference", "narrative flow must list at least one section"});
    }
  }
  bool flow_ok = !profile.narrative_flow_preference.empty();
  std::set<std::string> flow;
  for (const auto& name : profile.narrative_flow_preference) flow.insert(canonicalize_label(name));

  if (!g.contains("section_level_preferences")) {
    diags.push_back({"MissingField", base + "/section_level_preferences", "required field is missing"});
  } else if (!g["section_level_preferences"].is_array()) {
    diags.push_back({"TypeMismatch", base + "/section_level_preferences", "expected an array"});
  } else {
    const auto& arr = g["section_level_preferences"];
    for (std::size_t i = 0; i < arr.size(); ++i) {
      std::string path = base + "/section_level_preferences/" + std::to_string(i);
      const auto& e = arr[i];
      if (!require_object(e, path, diags)) continue;
      bool ok = require_string(e, "section_name", path, diags, true);
      ok = require_string(e, "content_handling", path, diags) && ok;
      ok = require_string(e, "formatting_preferences", path, diags) && ok;
      ok = require_string(e, "additional_comments", path, diags) && ok;
      if (!ok) continue;
      SectionPreference pref{e["section_name"].get<std::string>(), e["content_handling"].get<std::string>(),
                             e["formatting_preferences"].get<std::string>(), e["additional_comments"].get<std::string>()};
      const auto& allowed = content_handling_values();
      if (std::find(allowed.begin(), allowed.end(), pref.content_handling) == allowed.end()) {
        diags.push_back({"EnumViolation", path + "/content_handling",
                         "content_handling must be exactly one of \"Expanded\", \"Newly Added\", \"Condensed\"; got \"" +
                             pref.content_handling + "\""});
      }
      if (flow_ok && !flow.count(canonicalize_label(pref.section_name))) {
        diags.push_back({"CrossRefViolation", path + "/section_name",
                         "section \"" + pref.section_name + "\" does not appear in narrative_flow_preference"});
      }
      profile.section_level_preferences.push_back(std::move(pref));
    }
  }
  if (require_string_array(g, "omitted_sections", base, diags)) {
    profile.omitted_sections = g["omitted_sections"].get<std::vector<std::string>>();
  }
  if (diags.empty()) result.profile = std::move(profile);
  return result;
}

Json AestheticProfile::to_json() const {
  Json themes = Json::object();
  for (std::size_t i = 0; i < slide_themes.size(); ++i) themes["slide_" + std::to_string(i)] = slide_themes[i];
  Json out = Json::object();
  out["slide_themes"] = std::move(themes);
  out["element_metadata"] = element_metadata;
  out["template_slide_count"] = template_slide_count;
  return out;
}

AestheticProfile AestheticProfile::from_json(const Json& j) {
  AestheticProfile p;
  p.template_slide_count = j.at("template_slide_count").get<int>();
  const auto& themes = j.at("slide_themes");
  for (int i = 0; i < p.template_slide_count; ++i) {
    p.slide_themes.push_back(themes.at("slide_" + std::to_string(i)).get<std::string>());
  }
  p.element_metadata = j.at("element_metadata");
  return p;
}

Json PreferenceProfile::to_json() const {
  Json out = Json::object();
  out["content"] = content ? content->to_json() : Json(nullptr);
  out["aesthetic"] = aesthetic.to_json();
  return out;
}

PreferenceProfile PreferenceProfile::from_json(const Json& j) {
  PreferenceProfile p;
  if (!j.at("content").is_null()) {
    auto v = validate_content_profile(j.at("content"));
    if (!v.profile) throw Error(Errc::SchemaViolation, "stored content profile is invalid", v.diagnostics);
    p.content = std::move(v.profile);
  }
  p.aesthetic = AestheticProfile::from_json(j.at("aesthetic"));
  return p;
}

namespace {

std::vector<Diagnostic> validate_theme_map(Json& v) {
  std::vector<Diagnostic> out;
  if (!require_object(v, "", out)) return out;
  for (const auto& [key, value] : v.items()) {
    if (!value.is_string()) {
      out.push_back({"TypeMismatch", "/" + key, "theme must be a string"});
    } else if (trim(value.get<std::string>()).empty()) {
      out.push_back({"EmptyField", "/" + key, "theme must not be empty"});
    }
  }
  return out;
}

std::vector<Diagnostic> key_coverage(const Json& v, std::size_t n) {
  std::vector<Diagnostic> out;
  std::set<std::string> expected;
  for (std::size_t i = 0; i < n; ++i) expected.insert("slide_" + std::to_string(i));
  for (const auto& key : expected) {
    if (!v.contains(key)) out.push_back({"MissingKey", "/" + key, "every template slide needs a theme; " + key + " is missing"});
  }
  for (const auto& [key, value] : v.items()) {
    if (!expected.count(key)) {
      out.push_back({"UnexpectedKey", "/" + key,
                     "only keys slide_0 to slide_" + std::to_string(n - 1) + " are allowed"});
    }
  }
  return out;
}

}  // namespace

void register_schemas() {
  static std::once_flag once;
  std::call_once(once, [] {
    gateway::schema_catalog().add(kContentSchema,
                                  [](Json& v) { return validate_content_profile(v).diagnostics; });
    gateway::schema_catalog().add(kAestheticSchema, validate_theme_map);
  });
}

ContentPreferenceProfile distill_content_preferences(const ingest::PaperBundle& ref_paper,
                                                     const ingest::PaperBundle& ref_slides,
                                                     gateway::ModelGateway& gw, const gateway::ModelOptions& options) {
  register_schemas();
  auto prompt = gateway::render_prompt(gateway::prompt_template("content_preference").text,
                                       {{"reference content pdf", ref_paper.body_text()},
                                        {"reference content slide", ref_slides.body_text()}});
  // One targeted repair, then fail.
  auto outcome = gw.complete_structured(gateway::make_request(std::move(prompt), options, "content_preference"),
                                        kContentSchema, 1);
  return *validate_content_profile(outcome.value).profile;
}

AestheticProfile distill_aesthetic_profile(const deck::DeckModel& tmpl, gateway::ModelGateway& gw,
                                           const gateway::ModelOptions& options) {
  register_schemas();
  if (tmpl.slides.empty()) throw Error(Errc::PreconditionFailed, "template deck has no slides");
  AestheticProfile profile;
  profile.element_metadata = deck::describe_deck(tmpl);
  profile.template_slide_count = static_cast<int>(tmpl.slides.size());

  auto prompt = gateway::render_prompt(gateway::prompt_template("aesthetic_preference").text,
                                       {{"slide_info", profile.element_metadata.dump(2)}});
  std::size_t n = tmpl.slides.size();
  gateway::StructuredOutcome outcome;
  try {
    outcome = gw.complete_structured(gateway::make_request(std::move(prompt), options, "aesthetic_preference"),
                                     kAestheticSchema, gateway::kDefaultMaxRepairs,
                                     [n](const Json& v) { return key_coverage(v, n); });
  } catch (const Error& e) {
    if (e.code() != Errc::ExhaustedRepairs) throw;
    bool coverage = !e.diagnostics().empty();
    for (const auto& d : e.diagnostics()) coverage = coverage && (d.code == "MissingKey" || d.code == "UnexpectedKey");
    if (coverage) throw Error(Errc::KeyCoverageViolation, e.what(), e.diagnostics());
    throw;
  }
  for (std::size_t i = 0; i < n; ++i) {
    profile.slide_themes.push_back(trim(outcome.value["slide_" + std::to_string(i)].get<std::string>()));
  }
  return profile;
}

PreferenceProfile merge_profiles(std::optional<ContentPreferenceProfile> content, AestheticProfile aesthetic) {
  return PreferenceProfile{std::move(content), std::move(aesthetic)};
}

}  // namespace slidetailor::distill
