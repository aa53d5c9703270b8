#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "package.hpp"
#include "slidetailor/deck/zip.hpp"
#include "slidetailor/error.hpp"
#include "slidetailor/util.hpp"

namespace slidetailor::deck {

namespace {

std::int64_t to_int64(const std::string* s) {
  if (!s) return 0;
  std::int64_t v = 0;
  std::from_chars(s->data(), s->data() + s->size(), v);
  return v;
}

std::optional<BoundingBox> read_xfrm(const xml::Node* xfrm) {
  if (!xfrm) return std::nullopt;
  BoundingBox box;
  if (const auto* off = xfrm->child("a:off")) {
    box.left = to_int64(off->attr("x"));
    box.top = to_int64(off->attr("y"));
  }
  if (const auto* ext = xfrm->child("a:ext")) {
    box.width = std::max<std::int64_t>(0, to_int64(ext->attr("cx")));
    box.height = std::max<std::int64_t>(0, to_int64(ext->attr("cy")));
  }
  return box;
}

const xml::Node* xfrm_of(const xml::Node& el) {
  if (el.name == "p:graphicFrame") return el.child("p:xfrm");
  const xml::Node* pr = el.child(el.name == "p:grpSp" ? "p:grpSpPr" : "p:spPr");
  return pr ? pr->child("a:xfrm") : nullptr;
}

const xml::Node* placeholder_of(const xml::Node& el) {
  const auto* nv = non_visual_props(el);
  if (!nv) return nullptr;
  const auto* nvpr = nv->child("p:nvPr");
  return nvpr ? nvpr->child("p:ph") : nullptr;
}

std::string placeholder_type(const xml::Node& ph) {
  const auto* t = ph.attr("type");
  return t ? *t : std::string("obj");
}

std::optional<int> placeholder_idx(const xml::Node& ph) {
  const auto* i = ph.attr("idx");
  if (!i) return std::nullopt;
  return static_cast<int>(to_int64(i));
}

// Master placeholders only come in a handful of types.
std::string master_type(const std::string& type) {
  if (type == "ctrTitle" || type == "title") return "title";
  if (type == "dt" || type == "ftr" || type == "sldNum") return type;
  return "body";
}

std::vector<Paragraph> read_paragraphs(const xml::Node* tx_body) {
  std::vector<Paragraph> out;
  if (!tx_body) return out;
  for (const auto* p : tx_body->children_named("a:p")) {
    Paragraph para;
    for (const auto& c : p->children) {
      if (!c->is_element()) continue;
      if (c->name == "a:pPr") {
        para.props_xml = serialize_fragment(*c);
      } else if (c->name == "a:r" || c->name == "a:fld") {
        TextRun run;
        if (const auto* t = c->child("a:t")) run.text = t->inner_text();
        if (const auto* rpr = c->child("a:rPr")) run.style_xml = serialize_fragment(*rpr);
        para.runs.push_back(std::move(run));
      } else if (c->name == "a:br") {
        TextRun run;
        run.text = "\n";
        run.is_break = true;
        if (const auto* rpr = c->child("a:rPr")) run.style_xml = serialize_fragment(*rpr);
        para.runs.push_back(std::move(run));
      }
    }
    out.push_back(std::move(para));
  }
  return out;
}

void collect_nested_text(const xml::Node& node, std::vector<std::string>& lines) {
  for (const auto& c : node.children) {
    if (!c->is_element()) continue;
    if (c->name == "p:txBody" || c->name == "a:txBody") {
      for (const auto& para : read_paragraphs(c.get())) {
        auto t = para.text();
        if (!t.empty()) lines.push_back(t);
      }
    } else {
      collect_nested_text(*c, lines);
    }
  }
}

std::string table_text(const xml::Node& tbl) {
  std::string out;
  for (const auto* tr : tbl.children_named("a:tr")) {
    std::string row;
    bool first = true;
    for (const auto* tc : tr->children_named("a:tc")) {
      std::vector<std::string> lines;
      collect_nested_text(*tc, lines);
      std::string cell;
      for (const auto& l : lines) cell += (cell.empty() ? "" : " ") + l;
      row += (first ? "" : " | ") + cell;
      first = false;
    }
    if (!out.empty()) out += "\n";
    out += row;
  }
  return out;
}

struct PartReader {
  const std::map<std::string, std::string>& parts;
  std::map<std::string, xml::Document> docs;
  std::map<std::string, std::vector<Relationship>> rels;

  const xml::Document* doc(const std::string& part) {
    auto it = docs.find(part);
    if (it != docs.end()) return &it->second;
    auto p = parts.find(part);
    if (p == parts.end()) return nullptr;
    return &docs.emplace(part, xml::parse(p->second, part)).first->second;
  }

  const std::vector<Relationship>& rels_of(const std::string& part) {
    auto it = rels.find(part);
    if (it != rels.end()) return it->second;
    auto rp = rels_part_for(part);
    auto p = parts.find(rp);
    std::vector<Relationship> r;
    if (p != parts.end()) r = parse_rels(p->second, rp);
    return rels.emplace(part, std::move(r)).first->second;
  }

  std::optional<std::string> related(const std::string& part, std::string_view type) {
    for (const auto& r : rels_of(part)) {
      if (r.type == type && !r.external) return resolve_target(part, r.target);
    }
    return std::nullopt;
  }
};

const xml::Node* sp_tree(const xml::Document& doc) {
  const auto* csld = doc.root->child("p:cSld");
  return csld ? csld->child("p:spTree") : nullptr;
}

// Geometry a placeholder inherits from the layout, then the master.
std::optional<BoundingBox> inherited_geometry(PartReader& reader, const std::string& slide_part,
                                              const std::string& type, std::optional<int> idx) {
  auto layout = reader.related(slide_part, rel_type::kSlideLayout);
  if (!layout) return std::nullopt;
  const auto* ldoc = reader.doc(*layout);
  std::string via_type = type;
  if (ldoc && sp_tree(*ldoc)) {
    const xml::Node* match = nullptr;
    for (const auto& c : sp_tree(*ldoc)->children) {
      if (!is_shape_element(*c)) continue;
      const auto* ph = placeholder_of(*c);
      if (!ph) continue;
      if (idx && placeholder_idx(*ph) == idx) {
        match = c.get();
        break;
      }
      if (!match && master_type(placeholder_type(*ph)) == master_type(type) &&
          (placeholder_type(*ph) == type || !idx)) {
        match = c.get();
      }
    }
    if (match) {
      if (auto box = read_xfrm(xfrm_of(*match))) return box;
      via_type = placeholder_type(*placeholder_of(*match));
    }
  }
  auto master = reader.related(*layout, rel_type::kSlideMaster);
  if (!master) return std::nullopt;
  const auto* mdoc = reader.doc(*master);
  if (!mdoc || !sp_tree(*mdoc)) return std::nullopt;
  for (const auto& c : sp_tree(*mdoc)->children) {
    if (!is_shape_element(*c)) continue;
    const auto* ph = placeholder_of(*c);
    if (ph && master_type(placeholder_type(*ph)) == master_type(via_type)) return read_xfrm(xfrm_of(*c));
  }
  return std::nullopt;
}

ShapeModel read_shape(const xml::Node& el, PartReader& reader, const std::string& slide_part,
                      const std::vector<Relationship>& slide_rels) {
  ShapeModel shape;
  shape.element = local_name(el.name);
  shape.shape_id = shape_element_id(el).value_or(0);
  if (const auto* nv = non_visual_props(el)) {
    if (const auto* c = nv->child("p:cNvPr")) {
      if (const auto* n = c->attr("name")) shape.name = *n;
    }
  }
  const auto* ph = placeholder_of(el);
  if (ph) {
    shape.placeholder_type = placeholder_type(*ph);
    shape.placeholder_idx = placeholder_idx(*ph);
  }

  if (auto box = read_xfrm(xfrm_of(el))) {
    shape.bbox = *box;
  } else if (ph) {
    shape.bbox = inherited_geometry(reader, slide_part, shape.placeholder_type, shape.placeholder_idx)
                     .value_or(BoundingBox{});
  }

  if (el.name == "p:sp") {
    shape.paragraphs = read_paragraphs(el.child("p:txBody"));
    bool tx_box = false;
    if (const auto* nv = el.child("p:nvSpPr")) {
      if (const auto* c = nv->child("p:cNvSpPr")) {
        const auto* v = c->attr("txBox");
        tx_box = v && (*v == "1" || *v == "true");
      }
    }
    shape.kind = ph ? ShapeKind::Placeholder : (tx_box ? ShapeKind::TextBox : ShapeKind::Other);
  } else if (el.name == "p:pic") {
    shape.kind = ShapeKind::Picture;
    const auto* blip = el.find("a:blip");
    const auto* embed = blip ? blip->attr("r:embed") : nullptr;
    if (embed) {
      for (const auto& r : slide_rels) {
        if (r.id == *embed && !r.external) shape.image_ref = resolve_target(slide_part, r.target);
      }
    }
  } else if (el.name == "p:graphicFrame") {
    if (const auto* tbl = el.find("a:tbl")) {
      shape.kind = ShapeKind::Table;
      shape.nested_text = table_text(*tbl);
    } else {
      shape.kind = ShapeKind::Other;
    }
  } else if (el.name == "p:grpSp") {
    shape.kind = ShapeKind::Group;
    std::vector<std::string> lines;
    collect_nested_text(el, lines);
    for (const auto& l : lines) shape.nested_text += (shape.nested_text.empty() ? "" : "\n") + l;
  } else {
    shape.kind = ShapeKind::Other;
  }
  return shape;
}

std::optional<std::string> read_notes(PartReader& reader, const std::string& notes_part) {
  const auto* doc = reader.doc(notes_part);
  if (!doc) return std::nullopt;
  const auto* tree = sp_tree(*doc);
  if (!tree) return std::string();
  for (const auto& c : tree->children) {
    if (!is_shape_element(*c)) continue;
    const auto* ph = placeholder_of(*c);
    if (!ph || placeholder_type(*ph) != "body") continue;
    std::string text;
    bool first = true;
    for (const auto& para : read_paragraphs(c->child("p:txBody"))) {
      if (!first) text += "\n";
      text += para.text();
      first = false;
    }
    return text;
  }
  return std::string();
}

}  // namespace

DeckModel parse_deck(std::string_view bytes) {
  std::map<std::string, std::string> parts;
  for (auto& e : read_zip(bytes)) parts[e.name] = std::move(e.data);

  auto missing = [](const std::string& what) {
    return Error(Errc::MissingPresentationPart, "package has no " + what);
  };
  if (!parts.count("[Content_Types].xml")) throw missing("[Content_Types].xml");

  PartReader reader{parts, {}, {}};
  auto pkg = std::make_shared<detail::PackageSource>();

  std::string pres_part;
  if (auto it = parts.find("_rels/.rels"); it != parts.end()) {
    for (const auto& r : parse_rels(it->second, "_rels/.rels")) {
      if (r.type == rel_type::kOfficeDocument) pres_part = resolve_target("", r.target);
    }
  }
  if (pres_part.empty()) pres_part = "ppt/presentation.xml";
  if (!parts.count(pres_part)) throw missing("presentation part " + pres_part);
  pkg->presentation_part = pres_part;
  pkg->presentation_xml = parts.at(pres_part);

  auto ct = xml::parse(parts.at("[Content_Types].xml"), "[Content_Types].xml");
  for (const auto* d : ct.root->children_named("Default")) {
    pkg->ct_defaults.emplace_back(d->attr("Extension") ? *d->attr("Extension") : "",
                                  d->attr("ContentType") ? *d->attr("ContentType") : "");
  }
  for (const auto* o : ct.root->children_named("Override")) {
    std::string name = o->attr("PartName") ? *o->attr("PartName") : "";
    if (!name.empty() && name.front() == '/') name.erase(0, 1);
    pkg->ct_overrides[name] = o->attr("ContentType") ? *o->attr("ContentType") : "";
  }
  if (auto it = pkg->ct_overrides.find(pres_part); it != pkg->ct_overrides.end()) {
    pkg->presentation_content_type = it->second;
  } else {
    pkg->presentation_content_type = "application/vnd.openxmlformats-officedocument.presentationml.presentation.main+xml";
  }

  const auto* pres = reader.doc(pres_part);
  DeckModel model;
  if (const auto* sz = pres->root->child("p:sldSz")) {
    model.slide_size.width = to_int64(sz->attr("cx"));
    model.slide_size.height = to_int64(sz->attr("cy"));
  }

  const auto& pres_rels = reader.rels_of(pres_part);
  std::map<std::string, std::string> slide_by_rid;
  for (const auto& r : pres_rels) {
    if (r.type == rel_type::kSlide) {
      slide_by_rid[r.id] = resolve_target(pres_part, r.target);
    } else {
      pkg->presentation_rels.push_back(r);
      if (r.type == rel_type::kNotesMaster) pkg->notes_master_part = resolve_target(pres_part, r.target);
    }
  }

  std::set<std::string> excluded{"[Content_Types].xml", pres_part, rels_part_for(pres_part)};
  for (const auto& [name, type] : pkg->ct_overrides) {
    if (type == content_type::kSlide || type == content_type::kNotesSlide) {
      excluded.insert(name);
      excluded.insert(rels_part_for(name));
    }
  }

  if (const auto* lst = pres->root->child("p:sldIdLst")) {
    for (const auto* sid : lst->children_named("p:sldId")) {
      const auto* rid = sid->attr("r:id");
      if (!rid || !slide_by_rid.count(*rid)) {
        throw Error(Errc::MalformedXML, pres_part + ": slide id without a slide relationship");
      }
      const auto& part = slide_by_rid.at(*rid);
      if (!parts.count(part)) throw missing("slide part " + part);
      excluded.insert(part);
      excluded.insert(rels_part_for(part));

      auto src = std::make_shared<detail::SlideSource>();
      src->part_name = part;
      src->xml = parts.at(part);
      if (auto it = parts.find(rels_part_for(part)); it != parts.end()) src->rels_xml = it->second;
      src->rels = reader.rels_of(part);

      SlideModel slide;
      const auto* doc = reader.doc(part);
      if (const auto* tree = sp_tree(*doc)) {
        for (const auto& c : tree->children) {
          if (is_shape_element(*c)) slide.shapes.push_back(read_shape(*c, reader, part, src->rels));
        }
      }
      if (auto notes_part = reader.related(part, rel_type::kNotesSlide)) {
        excluded.insert(*notes_part);
        excluded.insert(rels_part_for(*notes_part));
        slide.notes = read_notes(reader, *notes_part);
      }
      src->baseline_shapes = slide.shapes;
      slide.source = std::move(src);
      model.slides.push_back(std::move(slide));
    }
  }

  for (auto& [name, data] : parts) {
    if (!excluded.count(name)) model.preserved_parts.emplace(name, std::move(data));
  }
  model.package = std::move(pkg);
  return model;
}

DeckModel parse_deck_file(const std::filesystem::path& path) {
  return parse_deck(read_file(path));
}

}  // namespace slidetailor::deck
