#pragma once

#include <optional>
#include <string>
#include <vector>

#include "slidetailor/deck/deck.hpp"
#include "slidetailor/error.hpp"
#include "slidetailor/gateway/gateway.hpp"
#include "slidetailor/ingest/bundle.hpp"
#include "slidetailor/json.hpp"

namespace slidetailor::distill {

inline constexpr const char* kContentSchema = "presentation_guidelines";
inline constexpr const char* kAestheticSchema = "slide_themes";

/// The closed set allowed for content_handling.
const std::vector<std::string>& content_handling_values();

struct SectionPreference {
  std::string section_name;
  std::string content_handling;
  std::string formatting_preferences;
  std::string additional_comments;

  bool operator==(const SectionPreference&) const = default;
};

struct ContentPreferenceProfile {
  std::vector<std::string> narrative_flow_preference;
  std::vector<SectionPreference> section_level_preferences;
  std::vector<std::string> omitted_sections;

  /// {"presentation_guidelines": {...}} with the prompt's field names.
  Json to_json() const;
  bool operator==(const ContentPreferenceProfile&) const = default;
};

struct ContentValidation {
  std::optional<ContentPreferenceProfile> profile;
  std::vector<Diagnostic> diagnostics;
};

/// Checks shape, enum membership, non-empty flow and that every
/// section-level entry names a flow section (compared canonically).
/// Codes: EmptyFlow, CrossRefViolation, EnumViolation, plus schema codes.
ContentValidation validate_content_profile(const Json& raw);

struct AestheticProfile {
  /// Theme sentence per template slide, index i for "slide_i".
  std::vector<std::string> slide_themes;
  Json element_metadata;
  int template_slide_count = 0;

  Json to_json() const;
  static AestheticProfile from_json(const Json& j);
  bool operator==(const AestheticProfile&) const = default;
};

struct PreferenceProfile {
  std::optional<ContentPreferenceProfile> content;
  AestheticProfile aesthetic;

  bool content_ablated() const noexcept { return !content.has_value(); }
  Json to_json() const;
  static PreferenceProfile from_json(const Json& j);
  bool operator==(const PreferenceProfile&) const = default;
};

/// Registers this module's schemas with the gateway catalog (idempotent).
void register_schemas();

/// Throws ExhaustedRepairs (diagnostics carry the offending field paths).
ContentPreferenceProfile distill_content_preferences(const ingest::PaperBundle& ref_paper,
                                                     const ingest::PaperBundle& ref_slides,
                                                     gateway::ModelGateway& gateway,
                                                     const gateway::ModelOptions& options = {});

/// Throws PreconditionFailed for an empty template, KeyCoverageViolation
/// when the slide key set never matches, ExhaustedRepairs otherwise.
AestheticProfile distill_aesthetic_profile(const deck::DeckModel& tmpl, gateway::ModelGateway& gateway,
                                           const gateway::ModelOptions& options = {});

PreferenceProfile merge_profiles(std::optional<ContentPreferenceProfile> content, AestheticProfile aesthetic);

}  // namespace slidetailor::distill
