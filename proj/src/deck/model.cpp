#include <cmath>

#include "package.hpp"
#include "slidetailor/error.hpp"
#include "slidetailor/util.hpp"

namespace slidetailor::deck {

std::int64_t emu_to_rounded_points(std::int64_t emu) noexcept {
  return std::llround(static_cast<double>(emu) / static_cast<double>(kEmuPerPoint));
}

BoundingBox BoundingBox::from_points(double left, double top, double width, double height) {
  auto emu = [](double pt) { return std::llround(pt * kEmuPerPoint); };
  return BoundingBox{emu(left), emu(top), emu(width), emu(height)};
}

std::string_view to_string(ShapeKind kind) noexcept {
  switch (kind) {
    case ShapeKind::TextBox: return "TextBox";
    case ShapeKind::Picture: return "Picture";
    case ShapeKind::Placeholder: return "Placeholder";
    case ShapeKind::Table: return "Table";
    case ShapeKind::Group: return "Group";
    case ShapeKind::Other: return "Other";
  }
  return "Other";
}

std::string Paragraph::text() const {
  std::string out;
  for (const auto& r : runs) out += r.text;
  return out;
}

std::string ShapeModel::text() const {
  std::string out;
  for (std::size_t i = 0; i < paragraphs.size(); ++i) {
    if (i) out += '\n';
    out += paragraphs[i].text();
  }
  return out;
}

bool ShapeModel::accepts_text() const noexcept {
  return element == "sp" && placeholder_type != "pic";
}

bool ShapeModel::accepts_image() const noexcept {
  if (kind == ShapeKind::Picture) return true;
  return element == "sp" &&
         (placeholder_type == "pic" || placeholder_type == "obj" || placeholder_type == "clipArt");
}

const ShapeModel* SlideModel::find_shape(int shape_id) const {
  for (const auto& s : shapes) {
    if (s.shape_id == shape_id) return &s;
  }
  return nullptr;
}

ShapeModel* SlideModel::find_shape(int shape_id) {
  return const_cast<ShapeModel*>(std::as_const(*this).find_shape(shape_id));
}

std::string SlideModel::text() const {
  std::string out;
  for (const auto& s : shapes) {
    std::string t = s.paragraphs.empty() ? s.nested_text : s.text();
    if (trim(t).empty()) continue;
    out += t;
    out += '\n';
  }
  return out;
}

Json describe_slide(const SlideModel& slide) {
  Json out = Json::object();
  for (std::size_t i = 0; i < slide.shapes.size(); ++i) {
    const auto& s = slide.shapes[i];
    std::string desc = "[" + std::string(to_string(s.kind)) + " id=" + std::to_string(i);
    if (s.is_placeholder()) desc += " type=" + s.placeholder_type;
    desc += "]\n";
    std::string text = s.paragraphs.empty() ? s.nested_text : s.text();
    if (!text.empty()) text += "\n";
    Json shape = Json::object();
    shape["pptc_description"] = desc;
    shape["pptc_size_info"] = "Size: height=" + std::to_string(emu_to_rounded_points(s.bbox.height)) +
                              "pt, width=" + std::to_string(emu_to_rounded_points(s.bbox.width)) + "pt\n";
    shape["pptc_space_info"] = "Visual Positions: left=" + std::to_string(emu_to_rounded_points(s.bbox.left)) +
                               "pt, top=" + std::to_string(emu_to_rounded_points(s.bbox.top)) + "pt\n";
    shape["pptc_text_info"] = text;
    out["shape_" + std::to_string(i)] = std::move(shape);
  }
  return out;
}

Json describe_deck(const DeckModel& model) {
  Json out = Json::object();
  for (std::size_t i = 0; i < model.slides.size(); ++i) {
    out["slide_" + std::to_string(i)] = describe_slide(model.slides[i]);
  }
  return out;
}

void set_shape_text(ShapeModel& shape, const std::vector<std::string>& paragraphs) {
  std::string props;
  std::string style;
  if (!shape.paragraphs.empty()) {
    props = shape.paragraphs.front().props_xml;
    for (const auto& p : shape.paragraphs) {
      for (const auto& r : p.runs) {
        if (!r.is_break) {
          style = r.style_xml;
          goto found;
        }
      }
    }
  }
found:
  std::vector<Paragraph> out;
  auto lines = paragraphs.empty() ? std::vector<std::string>{""} : paragraphs;
  for (const auto& text : lines) {
    Paragraph para;
    para.props_xml = props;
    std::size_t start = 0;
    while (true) {
      auto nl = text.find('\n', start);
      std::string piece = text.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
      if (!piece.empty()) para.runs.push_back(TextRun{piece, style, false});
      if (nl == std::string::npos) break;
      para.runs.push_back(TextRun{"\n", style, true});
      start = nl + 1;
    }
    out.push_back(std::move(para));
  }
  shape.paragraphs = std::move(out);
}

void set_speaker_notes(DeckModel& model, std::size_t slide_index, std::string text) {
  if (slide_index >= model.slides.size()) {
    throw Error(Errc::IndexOutOfRange, "slide index " + std::to_string(slide_index) + " out of range (deck has " +
                                           std::to_string(model.slides.size()) + " slides)");
  }
  model.slides[slide_index].notes = std::move(text);
}

BoundingBox fit_image(const BoundingBox& box, std::uint32_t pixel_width, std::uint32_t pixel_height) {
  if (pixel_width == 0 || pixel_height == 0 || box.width == 0 || box.height == 0) return box;
  double scale = std::min(static_cast<double>(box.width) / pixel_width, static_cast<double>(box.height) / pixel_height);
  auto w = static_cast<std::int64_t>(std::llround(pixel_width * scale));
  auto h = static_cast<std::int64_t>(std::llround(pixel_height * scale));
  w = std::min(w, box.width);
  h = std::min(h, box.height);
  return BoundingBox{box.left + (box.width - w) / 2, box.top + (box.height - h) / 2, w, h};
}

Json edit_plan_to_json(const EditPlan& plan) {
  Json out = Json::array();
  for (const auto& op : plan) {
    Json j = Json::object();
    std::visit(
        [&](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, CloneTemplateSlide>) {
            j["op"] = "clone_template_slide";
            j["template_index"] = o.template_index;
          } else if constexpr (std::is_same_v<T, SetText>) {
            j["op"] = "set_text";
            j["out_slide"] = o.out_slide;
            j["shape_id"] = o.shape_id;
            j["paragraphs"] = o.paragraphs;
          } else if constexpr (std::is_same_v<T, ReplaceImage>) {
            j["op"] = "replace_image";
            j["out_slide"] = o.out_slide;
            j["shape_id"] = o.shape_id;
            j["asset_path"] = o.asset_path.generic_string();
          } else if constexpr (std::is_same_v<T, DeleteShape>) {
            j["op"] = "delete_shape";
            j["out_slide"] = o.out_slide;
            j["shape_id"] = o.shape_id;
          } else {
            j["op"] = "set_notes";
            j["out_slide"] = o.out_slide;
            j["text"] = o.text;
          }
        },
        op);
    out.push_back(std::move(j));
  }
  return out;
}

namespace {

SlideModel& out_slide(DeckModel& deck, int index) {
  if (index < 0 || static_cast<std::size_t>(index) >= deck.slides.size()) {
    throw Error(Errc::IndexOutOfRange, "edit targets output slide " + std::to_string(index) +
                                           " before it was cloned (" + std::to_string(deck.slides.size()) +
                                           " cloned so far)");
  }
  return deck.slides[static_cast<std::size_t>(index)];
}

ShapeModel& out_shape(DeckModel& deck, int slide, int shape_id) {
  auto* s = out_slide(deck, slide).find_shape(shape_id);
  if (!s) {
    throw Error(Errc::UnknownShapeId,
                "slide " + std::to_string(slide) + " has no shape with id " + std::to_string(shape_id));
  }
  return *s;
}

}  // namespace

DeckModel apply_edit_plan(const DeckModel& template_deck, const EditPlan& plan) {
  DeckModel out;
  out.slide_size = template_deck.slide_size;
  out.preserved_parts = template_deck.preserved_parts;
  out.package = template_deck.package;

  for (const auto& op : plan) {
    if (const auto* c = std::get_if<CloneTemplateSlide>(&op)) {
      if (c->template_index < 0 || static_cast<std::size_t>(c->template_index) >= template_deck.slides.size()) {
        throw Error(Errc::UnknownTemplateIndex, "template slide " + std::to_string(c->template_index) +
                                                    " does not exist (template has " +
                                                    std::to_string(template_deck.slides.size()) + " slides)");
      }
      SlideModel slide = template_deck.slides[static_cast<std::size_t>(c->template_index)];
      slide.notes.reset();
      out.slides.push_back(std::move(slide));
    } else if (const auto* t = std::get_if<SetText>(&op)) {
      auto& shape = out_shape(out, t->out_slide, t->shape_id);
      if (!shape.accepts_text()) {
        throw Error(Errc::IllegalAction, "shape " + std::to_string(t->shape_id) + " (" +
                                             std::string(to_string(shape.kind)) + ") cannot hold text");
      }
      set_shape_text(shape, t->paragraphs);
    } else if (const auto* r = std::get_if<ReplaceImage>(&op)) {
      auto& shape = out_shape(out, r->out_slide, r->shape_id);
      if (!shape.accepts_image()) {
        throw Error(Errc::IllegalAction, "shape " + std::to_string(r->shape_id) + " (" +
                                             std::string(to_string(shape.kind)) + ") cannot hold an image");
      }
      std::string bytes;
      try {
        bytes = read_file(r->asset_path);
      } catch (const Error& e) {
        throw Error(Errc::AssetUnreadable, r->asset_path.string() + ": " + e.what());
      }
      ImageInfo info;
      if (!probe_image(bytes, info)) throw Error(Errc::AssetUnreadable, r->asset_path.string() + ": not a PNG or JPEG image");
      std::string part = "ppt/media/st_" + sha256_hex(bytes).substr(0, 12) + "." + info.format;
      out.preserved_parts.try_emplace(part, std::move(bytes));
      shape.bbox = fit_image(shape.bbox, info.width, info.height);
      shape.image_ref = part;
      shape.kind = ShapeKind::Picture;
      shape.element = "pic";
      shape.paragraphs.clear();
    } else if (const auto* d = std::get_if<DeleteShape>(&op)) {
      auto& slide = out_slide(out, d->out_slide);
      out_shape(out, d->out_slide, d->shape_id);
      std::erase_if(slide.shapes, [&](const ShapeModel& s) { return s.shape_id == d->shape_id; });
    } else if (const auto* n = std::get_if<SetNotes>(&op)) {
      out_slide(out, n->out_slide).notes = n->text;
    }
  }
  return out;
}

}  // namespace slidetailor::deck
