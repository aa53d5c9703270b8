#pragma once

// Internal OOXML package plumbing shared by the deck parser, serializer and
// editor.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slidetailor/deck/deck.hpp"
#include "slidetailor/deck/xml.hpp"

namespace slidetailor::deck {

namespace rel_type {
inline constexpr std::string_view kOfficeDocument =
    "http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument";
inline constexpr std::string_view kSlide =
    "http://schemas.openxmlformats.org/officeDocument/2006/relationships/slide";
inline constexpr std::string_view kSlideLayout =
    "http://schemas.openxmlformats.org/officeDocument/2006/relationships/slideLayout";
inline constexpr std::string_view kSlideMaster =
    "http://schemas.openxmlformats.org/officeDocument/2006/relationships/slideMaster";
inline constexpr std::string_view kNotesSlide =
    "http://schemas.openxmlformats.org/officeDocument/2006/relationships/notesSlide";
inline constexpr std::string_view kNotesMaster =
    "http://schemas.openxmlformats.org/officeDocument/2006/relationships/notesMaster";
inline constexpr std::string_view kImage =
    "http://schemas.openxmlformats.org/officeDocument/2006/relationships/image";
inline constexpr std::string_view kTheme =
    "http://schemas.openxmlformats.org/officeDocument/2006/relationships/theme";
}  // namespace rel_type

namespace content_type {
inline constexpr std::string_view kSlide = "application/vnd.openxmlformats-officedocument.presentationml.slide+xml";
inline constexpr std::string_view kNotesSlide =
    "application/vnd.openxmlformats-officedocument.presentationml.notesSlide+xml";
inline constexpr std::string_view kNotesMaster =
    "application/vnd.openxmlformats-officedocument.presentationml.notesMaster+xml";
inline constexpr std::string_view kTheme = "application/vnd.openxmlformats-officedocument.theme+xml";
inline constexpr std::string_view kRels = "application/vnd.openxmlformats-package.relationships+xml";
}  // namespace content_type

inline constexpr std::string_view kNsA = "http://schemas.openxmlformats.org/drawingml/2006/main";
inline constexpr std::string_view kNsR = "http://schemas.openxmlformats.org/officeDocument/2006/relationships";
inline constexpr std::string_view kNsP = "http://schemas.openxmlformats.org/presentationml/2006/main";
inline constexpr std::string_view kNsRels = "http://schemas.openxmlformats.org/package/2006/relationships";
inline constexpr std::string_view kNsContentTypes = "http://schemas.openxmlformats.org/package/2006/content-types";

struct Relationship {
  std::string id;
  std::string type;
  std::string target;
  bool external = false;

  bool operator==(const Relationship&) const = default;
};

namespace detail {

struct SlideSource {
  std::string part_name;
  std::string xml;
  std::string rels_xml;
  std::vector<Relationship> rels;
  /// Modeled shapes exactly as parsed from `xml`.
  std::vector<ShapeModel> baseline_shapes;
};

struct PackageSource {
  std::string presentation_part;
  std::string presentation_xml;
  std::string presentation_content_type;
  /// Relationships of the presentation part other than slides.
  std::vector<Relationship> presentation_rels;
  std::vector<std::pair<std::string, std::string>> ct_defaults;
  std::map<std::string, std::string> ct_overrides;
  std::optional<std::string> notes_master_part;
};

}  // namespace detail

std::string rels_part_for(std::string_view part);
std::string part_dir(std::string_view part);
/// Resolves a relationship target against the source part's directory.
std::string resolve_target(std::string_view source_part, std::string_view target);
/// Relative target from `source_part` to `target_part`.
std::string relative_target(std::string_view source_part, std::string_view target_part);

std::vector<Relationship> parse_rels(std::string_view bytes, std::string_view part_name);
std::string serialize_rels(const std::vector<Relationship>& rels);
/// "rId<n>" with n one past the largest numeric suffix in use.
std::string next_rel_id(const std::vector<Relationship>& rels);

std::string local_name(std::string_view qname);
/// Serializes one element subtree without an XML declaration.
std::string serialize_fragment(const xml::Node& node);
/// Parses a fragment produced by serialize_fragment.
xml::NodePtr parse_fragment(std::string_view fragment);

/// Element holding cNvPr/nvPr for a slide-tree child ("p:nvSpPr" etc.).
const xml::Node* non_visual_props(const xml::Node& shape_element);
std::optional<int> shape_element_id(const xml::Node& shape_element);
bool is_shape_element(const xml::Node& node);

}  // namespace slidetailor::deck
