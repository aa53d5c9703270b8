#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "slidetailor/deck/deck.hpp"
#include "slidetailor/distill/preferences.hpp"
#include "slidetailor/gateway/gateway.hpp"
#include "slidetailor/ingest/bundle.hpp"
#include "slidetailor/json.hpp"
#include "slidetailor/planner/planner.hpp"

namespace slidetailor::realizer {

inline constexpr const char* kMappingSchema = "element_mapping";
inline constexpr double kDefaultOverflowThreshold = 0.02;  // characters per pt²

enum class Action { SetText, ReplaceImage, Delete };

std::string_view to_string(Action action) noexcept;

struct Assignment {
  /// Position of the shape on the template slide, as shown to the model.
  int element_index = 0;
  /// The shape's id in the slide XML.
  int shape_id = 0;
  Action action = Action::Delete;
  std::vector<std::string> text;
  std::string asset_id;
  /// Added by the realizer for an unfilled placeholder.
  bool automatic = false;

  bool operator==(const Assignment&) const = default;
};

struct ElementMapping {
  std::string outline_key;
  int template_index = 0;
  std::vector<Assignment> assignments;

  Json to_json() const;
  bool operator==(const ElementMapping&) const = default;
};

struct MappingValidation {
  std::vector<Assignment> assignments;
  std::vector<Diagnostic> diagnostics;
};

/// Checks a model answer against one template slide. Codes:
/// UnknownShapeId, IllegalAction, DuplicateAssignment, UnknownAssetId plus
/// schema codes. A single string is accepted where a paragraph list is
/// expected.
MappingValidation validate_mapping(const Json& raw, const deck::SlideModel& slide,
                                   const std::vector<std::string>& allowed_assets);

/// Adds delete actions for unassigned placeholders and turns blank
/// set_text on a placeholder into a delete.
void complete_mapping(std::vector<Assignment>& assignments, const deck::SlideModel& slide);

void register_schemas();

/// The planned-slide block shown to the mapping model: the outline entry,
/// the matching reorganized subsection texts and the document metadata.
Json slide_plan(const std::string& outline_key, const Json& entry, const planner::ReorganizedDoc& doc);

/// Throws PreconditionFailed (no usable layout), UnknownShapeId,
/// IllegalAction, ExhaustedRepairs.
ElementMapping map_content_to_elements(const std::string& outline_key, const Json& entry,
                                       const planner::ReorganizedDoc& doc, const deck::DeckModel& tmpl,
                                       const distill::AestheticProfile& aesthetic,
                                       const std::vector<ingest::AssetRecord>& assets,
                                       gateway::ModelGateway& gateway, const gateway::ModelOptions& options = {});

/// Throws UnknownAssetId.
deck::EditPlan build_edit_plan(const std::vector<ElementMapping>& mappings,
                               const std::vector<ingest::AssetRecord>& assets);

struct SlideReport {
  std::string outline_key;
  int template_index = 0;
  std::vector<Assignment> applied;
  std::vector<int> deleted_shape_ids;
  std::vector<std::string> warnings;
};

struct RealizeReport {
  std::vector<SlideReport> slides;
  std::filesystem::path output_path;
  Json to_json() const;
};

struct RealizeOptions {
  bool embed_notes = true;
  double overflow_threshold = kDefaultOverflowThreshold;
};

struct RealizedDeck {
  deck::DeckModel deck;
  RealizeReport report;
};

/// Throws PreconditionFailed when mapping and outline sizes differ, plus
/// apply_edit_plan errors.
RealizedDeck realize_deck(const deck::DeckModel& tmpl, const Json& outline, const std::vector<ElementMapping>& mappings,
                          const std::vector<ingest::AssetRecord>& assets, const RealizeOptions& options = {});

struct NarrationRecord {
  int slide_index = 0;
  std::string title;
  std::string speech_text;
  bool operator==(const NarrationRecord&) const = default;
};

/// Throws MissingSpeech when any entry lacks speech_draft.
std::vector<NarrationRecord> narration_from_outline(const Json& outline);

/// Writes narration.json and narration.txt into `out_dir`. Throws
/// MissingSpeech.
std::vector<NarrationRecord> export_narration(const Json& outline, const std::filesystem::path& out_dir);

std::vector<NarrationRecord> load_narration(const std::filesystem::path& json_path);

}  // namespace slidetailor::realizer
