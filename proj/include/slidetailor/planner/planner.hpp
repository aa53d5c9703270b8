#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "slidetailor/distill/preferences.hpp"
#include "slidetailor/error.hpp"
#include "slidetailor/gateway/gateway.hpp"
#include "slidetailor/ingest/bundle.hpp"
#include "slidetailor/json.hpp"

namespace slidetailor::planner {

inline constexpr const char* kReorganizedSchema = "reorganized_doc";
inline constexpr const char* kOutlineSchema = "slide_outline";
inline constexpr const char* kSelectionSchema = "layout_selection";

/// Substituted for the guidelines when content preferences are ablated.
inline constexpr const char* kNoGuidelines =
    "No user preference guidelines supplied; use general academic presentation conventions.";

// ---- reorganized document -------------------------------------------------

struct Subsection {
  std::string title;
  std::string content;
  bool operator==(const Subsection&) const = default;
};

struct DocSection {
  std::string title;
  std::vector<Subsection> subsections;
  bool operator==(const DocSection&) const = default;
};

struct ReorganizedDoc {
  std::string title;
  std::string author;
  std::string publish_date;
  std::string organization;
  std::vector<DocSection> sections;

  Json to_json() const;
  static ReorganizedDoc from_json(const Json& j);
  bool operator==(const ReorganizedDoc&) const = default;
};

/// Fills absent metadata strings with "" and checks sections. Codes:
/// EmptySections plus schema codes.
std::vector<Diagnostic> validate_reorganized(Json& value);

// ---- outlines -----------------------------------------------------------------

/// An outline is kept as the JSON object the model produced so that field
/// bytes survive untouched between stages.
struct OutlineKey {
  int index = 0;
  std::string topic;
};

/// "3_Method" -> {3, "Method"}; the first "_" after the integer delimits.
std::optional<OutlineKey> parse_outline_key(const std::string& key);

struct OutlineCheck {
  int num_slides = 10;
  std::set<std::string> known_asset_ids;
  int template_slide_count = 0;
  /// Require layout/layout_justification (post-selection stage).
  bool selected = false;
  /// true: every entry needs speech_draft; false: none may carry it.
  std::optional<bool> expect_speech;
};

/// Codes: NotAnObject, SlideCountMismatch, BadKey, IndexGap, MissingField,
/// TypeMismatch, UnexpectedSpeech, UnknownAssetId, DuplicateImageUse,
/// MissingLayout, LayoutOutOfRange.
std::vector<Diagnostic> validate_outline(const Json& outline, const OutlineCheck& check);

struct SelectionResult {
  Json outline;
  std::vector<Diagnostic> diagnostics;
};

/// Rebuilds the selected outline from `input` plus the selector's layout
/// and layout_justification fields. Any change to another field, a missing
/// or extra slide key, or an added field yields ContentMutated diagnostics.
SelectionResult merge_layout_selection(const Json& input, const Json& selector_output, int template_slide_count);

/// Index k of "slide_k", or nullopt.
std::optional<int> layout_index(const Json& entry);

// ---- stages -------------------------------------------------------------------

struct OutlineOptions {
  int num_slides = 10;
  bool chain_of_speech = true;
};

void register_schemas();

/// Prompt text for a paper: metadata lines followed by the body.
std::string paper_prompt_text(const ingest::PaperBundle& paper);

/// Throws EmptySections or ExhaustedRepairs.
ReorganizedDoc reorganize_paper(const ingest::PaperBundle& target,
                                const std::optional<distill::ContentPreferenceProfile>& content_pref,
                                gateway::ModelGateway& gateway, const gateway::ModelOptions& options = {});

/// Outline prompt after chain-of-speech surgery.
std::string outline_prompt(const ReorganizedDoc& doc,
                           const std::optional<distill::ContentPreferenceProfile>& content_pref,
                           const std::vector<ingest::AssetRecord>& assets, const OutlineOptions& options);

/// Throws PreconditionFailed (num_slides < 2), SlideCountMismatch,
/// DuplicateImageUse, UnknownAssetId, ExhaustedRepairs.
Json generate_outline(const ReorganizedDoc& doc, const std::optional<distill::ContentPreferenceProfile>& content_pref,
                      const std::vector<ingest::AssetRecord>& assets, const OutlineOptions& outline_options,
                      gateway::ModelGateway& gateway, const gateway::ModelOptions& options = {});

/// Throws ContentMutated, LayoutOutOfRange, ExhaustedRepairs.
Json select_layouts(const Json& outline, const distill::AestheticProfile& aesthetic, gateway::ModelGateway& gateway,
                    const gateway::ModelOptions& options = {});

}  // namespace slidetailor::planner
