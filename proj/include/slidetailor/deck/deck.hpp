#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "slidetailor/json.hpp"

namespace slidetailor::deck {

inline constexpr std::int64_t kEmuPerPoint = 12700;

/// Nearest integer point for an EMU length (half away from zero).
std::int64_t emu_to_rounded_points(std::int64_t emu) noexcept;

/// Geometry in EMU.
struct BoundingBox {
  std::int64_t left = 0;
  std::int64_t top = 0;
  std::int64_t width = 0;
  std::int64_t height = 0;

  static BoundingBox from_points(double left, double top, double width, double height);
  double left_pt() const noexcept { return static_cast<double>(left) / kEmuPerPoint; }
  double top_pt() const noexcept { return static_cast<double>(top) / kEmuPerPoint; }
  double width_pt() const noexcept { return static_cast<double>(width) / kEmuPerPoint; }
  double height_pt() const noexcept { return static_cast<double>(height) / kEmuPerPoint; }

  bool operator==(const BoundingBox&) const = default;
};

enum class ShapeKind { TextBox, Picture, Placeholder, Table, Group, Other };

std::string_view to_string(ShapeKind kind) noexcept;

struct TextRun {
  std::string text;
  /// Serialized <a:rPr> element, empty when the run has none.
  std::string style_xml;
  /// A line break (<a:br>) rather than a text run; `text` is "\n".
  bool is_break = false;

  bool operator==(const TextRun&) const = default;
};

struct Paragraph {
  std::vector<TextRun> runs;
  /// Serialized <a:pPr> element, empty when absent.
  std::string props_xml;

  std::string text() const;
  bool operator==(const Paragraph&) const = default;
};

struct ShapeModel {
  int shape_id = 0;
  ShapeKind kind = ShapeKind::Other;
  /// Local element name in the slide tree: "sp", "pic", "graphicFrame",
  /// "grpSp" or "cxnSp".
  std::string element;
  std::string name;
  BoundingBox bbox;
  std::vector<Paragraph> paragraphs;
  /// Package part name of the picture, e.g. "ppt/media/image1.png".
  std::optional<std::string> image_ref;
  /// Placeholder type ("title", "body", "pic", ...); empty if not a
  /// placeholder. Untyped placeholders report "obj".
  std::string placeholder_type;
  std::optional<int> placeholder_idx;
  /// Read-only text of table cells or grouped shapes.
  std::string nested_text;

  /// Paragraph texts joined with '\n'.
  std::string text() const;
  bool is_placeholder() const noexcept { return !placeholder_type.empty(); }
  /// True for shapes whose text body can be written (p:sp that is not a
  /// picture placeholder).
  bool accepts_text() const noexcept;
  /// True for pictures and picture-capable placeholders.
  bool accepts_image() const noexcept;

  bool operator==(const ShapeModel&) const = default;
};

namespace detail {
struct SlideSource;
struct PackageSource;
}  // namespace detail

struct SlideModel {
  std::vector<ShapeModel> shapes;
  std::optional<std::string> notes;

  /// The original XML this slide came from; serialization re-emits it
  /// byte-for-byte while the modeled fields are unchanged.
  std::shared_ptr<const detail::SlideSource> source;

  const ShapeModel* find_shape(int shape_id) const;
  ShapeModel* find_shape(int shape_id);
  /// Concatenated text of every shape, one line per non-empty shape.
  std::string text() const;

  bool operator==(const SlideModel& other) const {
    return shapes == other.shapes && notes == other.notes;
  }
};

struct SlideSize {
  std::int64_t width = 0;  // EMU
  std::int64_t height = 0;
  bool operator==(const SlideSize&) const = default;
};

struct DeckModel {
  SlideSize slide_size;
  std::vector<SlideModel> slides;
  /// Parts not modeled structurally (theme, masters, layouts, media, doc
  /// properties), keyed by part name without a leading slash.
  std::map<std::string, std::string> preserved_parts;

  std::shared_ptr<const detail::PackageSource> package;

  /// Compares modeled fields only.
  bool operator==(const DeckModel& other) const {
    return slide_size == other.slide_size && slides == other.slides;
  }
};

/// Throws NotAZip, MissingPresentationPart, MalformedXML.
DeckModel parse_deck(std::string_view bytes);
DeckModel parse_deck_file(const std::filesystem::path& path);

/// Throws DanglingImageRef, RelationshipConflict, IllegalAction (a model
/// shape with no counterpart in the slide XML).
std::string serialize_deck(const DeckModel& model);

/// The nested {"slide_i": {"shape_j": {...}}} element description.
Json describe_deck(const DeckModel& model);
Json describe_slide(const SlideModel& slide);

/// Replaces the shape's text with one paragraph per entry, reusing the
/// shape's first paragraph and run styling. Embedded '\n' become breaks.
void set_shape_text(ShapeModel& shape, const std::vector<std::string>& paragraphs);

/// Throws IndexOutOfRange.
void set_speaker_notes(DeckModel& model, std::size_t slide_index, std::string text);

// ---- declarative edit plans ------------------------------------------------

struct CloneTemplateSlide {
  int template_index = 0;
  bool operator==(const CloneTemplateSlide&) const = default;
};
struct SetText {
  int out_slide = 0;
  int shape_id = 0;
  std::vector<std::string> paragraphs;
  bool operator==(const SetText&) const = default;
};
struct ReplaceImage {
  int out_slide = 0;
  int shape_id = 0;
  std::filesystem::path asset_path;
  bool operator==(const ReplaceImage&) const = default;
};
struct DeleteShape {
  int out_slide = 0;
  int shape_id = 0;
  bool operator==(const DeleteShape&) const = default;
};
struct SetNotes {
  int out_slide = 0;
  std::string text;
  bool operator==(const SetNotes&) const = default;
};

using EditOp = std::variant<CloneTemplateSlide, SetText, ReplaceImage, DeleteShape, SetNotes>;
using EditPlan = std::vector<EditOp>;

Json edit_plan_to_json(const EditPlan& plan);

/// Builds a new deck containing exactly the cloned-and-edited slides in plan
/// order. The template is not modified. Throws UnknownTemplateIndex,
/// IndexOutOfRange, UnknownShapeId, IllegalAction, AssetUnreadable.
DeckModel apply_edit_plan(const DeckModel& template_deck, const EditPlan& plan);

/// Letterboxes an image of the given pixel size into `box`, centered.
BoundingBox fit_image(const BoundingBox& box, std::uint32_t pixel_width, std::uint32_t pixel_height);

// ---- rendering ---------------------------------------------------------------

struct RenderOptions {
  /// Invoked as `<command> <pptx_path> <out_dir>`; must write
  /// out_dir/slide-<i>.png for i = 1..N.
  std::string command;
  /// Pre-rendered slide-<i>.png images, used instead of running a command.
  std::filesystem::path prerendered_dir;
};

/// Throws RendererUnavailable, RendererFailed (stderr in the message).
std::vector<std::filesystem::path> render_slides(std::string_view deck_bytes, const RenderOptions& options,
                                                 const std::filesystem::path& work_dir);

}  // namespace slidetailor::deck
