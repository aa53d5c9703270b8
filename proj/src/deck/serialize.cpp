#include <map>
#include <set>

#include "package.hpp"
#include "slidetailor/deck/zip.hpp"
#include "slidetailor/error.hpp"

namespace slidetailor::deck {

namespace {

using xml::Node;
using xml::NodePtr;

constexpr std::string_view kNsDecls =
    R"( xmlns:a="http://schemas.openxmlformats.org/drawingml/2006/main")"
    R"( xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships")"
    R"( xmlns:p="http://schemas.openxmlformats.org/presentationml/2006/main")";

constexpr std::string_view kXmlDecl = "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\r\n";

constexpr std::string_view kGroupProps =
    "<p:nvGrpSpPr><p:cNvPr id=\"1\" name=\"\"/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr>"
    "<p:grpSpPr><a:xfrm><a:off x=\"0\" y=\"0\"/><a:ext cx=\"0\" cy=\"0\"/>"
    "<a:chOff x=\"0\" y=\"0\"/><a:chExt cx=\"0\" cy=\"0\"/></a:xfrm></p:grpSpPr>";

std::string notes_master_xml() {
  std::string s(kXmlDecl);
  s += "<p:notesMaster";
  s += kNsDecls;
  s += "><p:cSld><p:bg><p:bgRef idx=\"1001\"><a:schemeClr val=\"bg1\"/></p:bgRef></p:bg><p:spTree>";
  s += kGroupProps;
  s += "<p:sp><p:nvSpPr><p:cNvPr id=\"2\" name=\"Slide Image Placeholder 1\"/><p:cNvSpPr>"
       "<a:spLocks noGrp=\"1\" noRot=\"1\" noChangeAspect=\"1\"/></p:cNvSpPr><p:nvPr><p:ph type=\"sldImg\" "
       "idx=\"2\"/></p:nvPr></p:nvSpPr><p:spPr><a:xfrm><a:off x=\"1143000\" y=\"685800\"/><a:ext cx=\"4572000\" "
       "cy=\"3429000\"/></a:xfrm><a:prstGeom prst=\"rect\"><a:avLst/></a:prstGeom><a:noFill/><a:ln w=\"12700\">"
       "<a:solidFill><a:prstClr val=\"black\"/></a:solidFill></a:ln></p:spPr></p:sp>";
  s += "<p:sp><p:nvSpPr><p:cNvPr id=\"3\" name=\"Notes Placeholder 2\"/><p:cNvSpPr><a:spLocks noGrp=\"1\"/>"
       "</p:cNvSpPr><p:nvPr><p:ph type=\"body\" sz=\"quarter\" idx=\"3\"/></p:nvPr></p:nvSpPr><p:spPr><a:xfrm>"
       "<a:off x=\"685800\" y=\"4343400\"/><a:ext cx=\"5486400\" cy=\"4114800\"/></a:xfrm><a:prstGeom "
       "prst=\"rect\"><a:avLst/></a:prstGeom></p:spPr><p:txBody><a:bodyPr/><a:lstStyle/><a:p><a:pPr lvl=\"0\"/>"
       "<a:endParaRPr lang=\"en-US\"/></a:p></p:txBody></p:sp>";
  s += "</p:spTree></p:cSld><p:clrMap bg1=\"lt1\" tx1=\"dk1\" bg2=\"lt2\" tx2=\"dk2\" accent1=\"accent1\" "
       "accent2=\"accent2\" accent3=\"accent3\" accent4=\"accent4\" accent5=\"accent5\" accent6=\"accent6\" "
       "hlink=\"hlink\" folHlink=\"folHlink\"/><p:notesStyle><a:lvl1pPr marL=\"0\" algn=\"l\" rtl=\"0\">"
       "<a:defRPr sz=\"1200\" kern=\"1200\"><a:solidFill><a:schemeClr val=\"tx1\"/></a:solidFill><a:latin "
       "typeface=\"+mn-lt\"/><a:ea typeface=\"+mn-ea\"/><a:cs typeface=\"+mn-cs\"/></a:defRPr></a:lvl1pPr>"
       "</p:notesStyle></p:notesMaster>";
  return s;
}

std::string notes_slide_xml(const std::string& text) {
  std::string s(kXmlDecl);
  s += "<p:notes";
  s += kNsDecls;
  s += "><p:cSld><p:spTree>";
  s += kGroupProps;
  s += "<p:sp><p:nvSpPr><p:cNvPr id=\"2\" name=\"Slide Image Placeholder 1\"/><p:cNvSpPr><a:spLocks "
       "noGrp=\"1\" noRot=\"1\" noChangeAspect=\"1\"/></p:cNvSpPr><p:nvPr><p:ph type=\"sldImg\"/></p:nvPr>"
       "</p:nvSpPr><p:spPr/></p:sp>";
  s += "<p:sp><p:nvSpPr><p:cNvPr id=\"3\" name=\"Notes Placeholder 2\"/><p:cNvSpPr><a:spLocks noGrp=\"1\"/>"
       "</p:cNvSpPr><p:nvPr><p:ph type=\"body\" idx=\"1\"/></p:nvPr></p:nvSpPr><p:spPr/><p:txBody><a:bodyPr/>"
       "<a:lstStyle/>";
  std::size_t start = 0;
  while (true) {
    auto nl = text.find('\n', start);
    auto line = text.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
    if (line.empty()) {
      s += "<a:p><a:endParaRPr lang=\"en-US\"/></a:p>";
    } else {
      s += "<a:p><a:r><a:rPr lang=\"en-US\" dirty=\"0\"/><a:t>" + xml::escape_text(line) + "</a:t></a:r></a:p>";
    }
    if (nl == std::string::npos) break;
    start = nl + 1;
  }
  s += "</p:txBody></p:sp></p:spTree></p:cSld><p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr></p:notes>";
  return s;
}

// Inserts `node` right after the last child whose name is in `after`, or
// first when none of them is present.
Node& insert_after(Node& parent, NodePtr node, std::initializer_list<std::string_view> after) {
  std::size_t pos = 0;
  for (std::size_t i = 0; i < parent.children.size(); ++i) {
    const auto& c = parent.children[i];
    if (!c->is_element()) continue;
    for (auto name : after) {
      if (c->name == name) pos = i + 1;
    }
  }
  auto it = parent.children.insert(parent.children.begin() + static_cast<std::ptrdiff_t>(pos), std::move(node));
  return **it;
}

Node& ensure_child(Node& parent, std::string_view qname, std::initializer_list<std::string_view> after) {
  if (auto* c = parent.child(qname)) return *c;
  return insert_after(parent, Node::element(std::string(qname)), after);
}

void write_xfrm(Node& el, const BoundingBox& box) {
  Node* xfrm = nullptr;
  if (el.name == "p:graphicFrame") {
    xfrm = &ensure_child(el, "p:xfrm", {"p:nvGraphicFramePr"});
  } else {
    bool group = el.name == "p:grpSp";
    auto& pr = ensure_child(el, group ? "p:grpSpPr" : "p:spPr", {"p:nvSpPr", "p:nvPicPr", "p:nvGrpSpPr", "p:nvCxnSpPr"});
    xfrm = &ensure_child(pr, "a:xfrm", {});
  }
  auto& off = ensure_child(*xfrm, "a:off", {});
  off.set_attr("x", std::to_string(box.left));
  off.set_attr("y", std::to_string(box.top));
  auto& ext = ensure_child(*xfrm, "a:ext", {"a:off"});
  ext.set_attr("cx", std::to_string(box.width));
  ext.set_attr("cy", std::to_string(box.height));
}

NodePtr build_paragraph(const Paragraph& para) {
  auto p = Node::element("a:p");
  if (!para.props_xml.empty()) p->append(parse_fragment(para.props_xml));
  for (const auto& run : para.runs) {
    if (run.is_break) {
      auto br = Node::element("a:br");
      if (!run.style_xml.empty()) br->append(parse_fragment(run.style_xml));
      p->append(std::move(br));
      continue;
    }
    auto r = Node::element("a:r");
    if (!run.style_xml.empty()) r->append(parse_fragment(run.style_xml));
    auto t = Node::element("a:t");
    t->append(Node::text(run.text));
    r->append(std::move(t));
    p->append(std::move(r));
  }
  return p;
}

void write_text(Node& sp, const std::vector<Paragraph>& paragraphs) {
  Node* body = sp.child("p:txBody");
  if (!body) {
    auto fresh = Node::element("p:txBody");
    fresh->append(Node::element("a:bodyPr"));
    fresh->append(Node::element("a:lstStyle"));
    body = &insert_after(sp, std::move(fresh), {"p:nvSpPr", "p:spPr", "p:style"});
  }
  std::erase_if(body->children, [](const NodePtr& c) { return c->is_element() && c->name == "a:p"; });
  if (!body->child("a:bodyPr")) insert_after(*body, Node::element("a:bodyPr"), {});
  for (const auto& para : paragraphs) body->append(build_paragraph(para));
  if (paragraphs.empty()) body->append(Node::element("a:p"));
}

NodePtr picture_from_placeholder(const Node& sp) {
  auto pic = Node::element("p:pic");
  auto nv = Node::element("p:nvPicPr");
  const auto* nvsp = sp.child("p:nvSpPr");
  if (const auto* c = nvsp ? nvsp->child("p:cNvPr") : nullptr) {
    nv->append(c->clone());
  } else {
    nv->append(Node::element("p:cNvPr"));
  }
  auto cnv = Node::element("p:cNvPicPr");
  auto locks = Node::element("a:picLocks");
  locks->set_attr("noGrp", "1");
  locks->set_attr("noChangeAspect", "1");
  cnv->append(std::move(locks));
  nv->append(std::move(cnv));
  if (const auto* nvpr = nvsp ? nvsp->child("p:nvPr") : nullptr) {
    nv->append(nvpr->clone());
  } else {
    nv->append(Node::element("p:nvPr"));
  }
  pic->append(std::move(nv));

  auto fill = Node::element("p:blipFill");
  fill->append(Node::element("a:blip"));
  auto stretch = Node::element("a:stretch");
  stretch->append(Node::element("a:fillRect"));
  fill->append(std::move(stretch));
  pic->append(std::move(fill));

  auto pr = Node::element("p:spPr");
  auto geom = Node::element("a:prstGeom");
  geom->set_attr("prst", "rect");
  geom->append(Node::element("a:avLst"));
  pr->append(std::move(geom));
  pic->append(std::move(pr));
  return pic;
}

std::string image_rel_id(std::vector<Relationship>& rels, const std::string& source_part, const std::string& image) {
  for (const auto& r : rels) {
    if (r.type == rel_type::kImage && !r.external && resolve_target(source_part, r.target) == image) return r.id;
  }
  Relationship rel{next_rel_id(rels), std::string(rel_type::kImage), relative_target(source_part, image), false};
  rels.push_back(rel);
  return rel.id;
}

void check_unique_ids(const std::vector<Relationship>& rels, const std::string& part) {
  std::set<std::string> seen;
  for (const auto& r : rels) {
    if (!seen.insert(r.id).second) {
      throw Error(Errc::RelationshipConflict, rels_part_for(part) + ": duplicate relationship id " + r.id);
    }
  }
}

struct SlideOutput {
  std::string xml;
  std::vector<Relationship> rels;  // relative to the source part
};

SlideOutput sync_slide(const SlideModel& slide) {
  const auto& src = *slide.source;
  SlideOutput out{src.xml, src.rels};
  if (slide.shapes == src.baseline_shapes) return out;

  auto doc = xml::parse(src.xml, src.part_name);
  auto* csld = doc.root->child("p:cSld");
  auto* tree = csld ? csld->child("p:spTree") : nullptr;
  if (!tree) throw Error(Errc::MalformedXML, src.part_name + ": slide has no shape tree");

  std::map<int, const ShapeModel*> wanted;
  for (const auto& s : slide.shapes) wanted[s.shape_id] = &s;
  std::map<int, const ShapeModel*> baseline;
  for (const auto& s : src.baseline_shapes) baseline[s.shape_id] = &s;

  std::erase_if(tree->children, [&](const NodePtr& c) {
    if (!is_shape_element(*c)) return false;
    auto id = shape_element_id(*c);
    return id && baseline.count(*id) && !wanted.count(*id);
  });

  std::map<int, NodePtr*> elements;
  for (auto& c : tree->children) {
    if (!is_shape_element(*c)) continue;
    if (auto id = shape_element_id(*c)) elements.emplace(*id, &c);
  }

  for (const auto& shape : slide.shapes) {
    auto it = elements.find(shape.shape_id);
    if (it == elements.end()) {
      throw Error(Errc::IllegalAction,
                  src.part_name + ": model shape " + std::to_string(shape.shape_id) + " has no XML counterpart");
    }
    NodePtr& el = *it->second;
    const ShapeModel* before = baseline.count(shape.shape_id) ? baseline.at(shape.shape_id) : nullptr;
    if (before && *before == shape) continue;

    bool converted = false;
    if (shape.element == "pic" && el->name == "p:sp") {
      el = picture_from_placeholder(*el);
      converted = true;
    }
    if (converted || !before || before->bbox != shape.bbox) write_xfrm(*el, shape.bbox);
    if (el->name == "p:sp" && (!before || before->paragraphs != shape.paragraphs)) write_text(*el, shape.paragraphs);
    if (shape.image_ref && (converted || !before || before->image_ref != shape.image_ref) && el->name == "p:pic") {
      auto id = image_rel_id(out.rels, src.part_name, *shape.image_ref);
      auto& fill = ensure_child(*el, "p:blipFill", {"p:nvPicPr"});
      auto& blip = ensure_child(fill, "a:blip", {});
      blip.set_attr("r:embed", id);
      std::erase_if(fill.children, [](const NodePtr& c) { return c->is_element() && c->name == "a:srcRect"; });
    }
  }
  out.xml = xml::serialize(doc);
  return out;
}

// Rewrites internal targets from `from_part`'s directory to `to_part`'s.
std::vector<Relationship> rebase(const std::vector<Relationship>& rels, const std::string& from_part,
                                 const std::string& to_part) {
  auto out = rels;
  for (auto& r : out) {
    if (!r.external) r.target = relative_target(to_part, resolve_target(from_part, r.target));
  }
  return out;
}

std::string extension_of(const std::string& part) {
  auto slash = part.rfind('/');
  auto dot = part.rfind('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return "";
  std::string ext = part.substr(dot + 1);
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return ext;
}

std::string default_content_type(const std::string& ext) {
  static const std::map<std::string, std::string> known{
      {"png", "image/png"},   {"jpeg", "image/jpeg"},     {"jpg", "image/jpeg"},
      {"gif", "image/gif"},   {"emf", "image/x-emf"},     {"wmf", "image/x-wmf"},
      {"xml", "application/xml"}, {"rels", std::string(content_type::kRels)}};
  auto it = known.find(ext);
  return it == known.end() ? "application/octet-stream" : it->second;
}

}  // namespace

std::string serialize_deck(const DeckModel& model) {
  if (!model.package) throw Error(Errc::IllegalAction, "deck model has no source package to serialize against");
  const auto& pkg = *model.package;

  std::map<std::string, std::string> parts = model.preserved_parts;
  std::map<std::string, std::string> overrides;
  for (const auto& [name, type] : pkg.ct_overrides) {
    if (parts.count(name)) overrides[name] = type;
  }
  auto add_part = [&](const std::string& name, std::string data) {
    if (!parts.emplace(name, std::move(data)).second) {
      throw Error(Errc::RelationshipConflict, "generated part " + name + " collides with an existing part");
    }
  };

  for (std::size_t i = 0; i < model.slides.size(); ++i) {
    for (const auto& shape : model.slides[i].shapes) {
      if (shape.image_ref && !parts.count(*shape.image_ref)) {
        throw Error(Errc::DanglingImageRef, "slide " + std::to_string(i) + " shape " +
                                                std::to_string(shape.shape_id) + " references missing part " +
                                                *shape.image_ref);
      }
    }
  }

  const std::string& pres_part = pkg.presentation_part;
  auto pres_rels = pkg.presentation_rels;
  auto pres_doc = xml::parse(pkg.presentation_xml, pres_part);
  auto& pres_root = *pres_doc.root;

  bool any_notes = std::any_of(model.slides.begin(), model.slides.end(), [](const auto& s) { return s.notes; });
  std::optional<std::string> notes_master = pkg.notes_master_part;
  if (any_notes && !notes_master) {
    notes_master = "ppt/notesMasters/notesMaster1.xml";
    add_part(*notes_master, notes_master_xml());
    overrides[*notes_master] = content_type::kNotesMaster;
    std::vector<Relationship> master_rels;
    std::string theme;
    for (const auto& [name, data] : model.preserved_parts) {
      if (name.rfind("ppt/theme/theme", 0) == 0 && extension_of(name) == "xml") {
        theme = name;
        break;
      }
    }
    if (!theme.empty()) {
      int n = 1;
      std::string fresh;
      do {
        fresh = "ppt/theme/theme" + std::to_string(n++) + ".xml";
      } while (parts.count(fresh));
      add_part(fresh, model.preserved_parts.at(theme));
      overrides[fresh] = content_type::kTheme;
      master_rels.push_back({"rId1", std::string(rel_type::kTheme), relative_target(*notes_master, fresh), false});
    }
    add_part(rels_part_for(*notes_master), serialize_rels(master_rels));

    Relationship rel{next_rel_id(pres_rels), std::string(rel_type::kNotesMaster),
                     relative_target(pres_part, *notes_master), false};
    pres_rels.push_back(rel);
    auto lst = Node::element("p:notesMasterIdLst");
    auto id = Node::element("p:notesMasterId");
    id->set_attr("r:id", rel.id);
    lst->append(std::move(id));
    pres_root.children.erase(
        std::remove_if(pres_root.children.begin(), pres_root.children.end(),
                       [](const NodePtr& c) { return c->is_element() && c->name == "p:notesMasterIdLst"; }),
        pres_root.children.end());
    insert_after(pres_root, std::move(lst), {"p:sldMasterIdLst"});
  }

  auto sld_list = Node::element("p:sldIdLst");
  for (std::size_t i = 0; i < model.slides.size(); ++i) {
    const auto& slide = model.slides[i];
    if (!slide.source) {
      throw Error(Errc::IllegalAction, "slide " + std::to_string(i) + " was not parsed or cloned from a template");
    }
    const auto& src = *slide.source;
    std::string part = "ppt/slides/slide" + std::to_string(i + 1) + ".xml";
    auto synced = sync_slide(slide);

    auto strip_notes = [](std::vector<Relationship> rels) {
      std::erase_if(rels, [](const Relationship& r) { return r.type == rel_type::kNotesSlide; });
      return rels;
    };
    auto original = rebase(src.rels, src.part_name, part);
    auto rels = strip_notes(rebase(synced.rels, src.part_name, part));
    if (slide.notes) {
      std::string notes_part = "ppt/notesSlides/notesSlide" + std::to_string(i + 1) + ".xml";
      add_part(notes_part, notes_slide_xml(*slide.notes));
      overrides[notes_part] = content_type::kNotesSlide;
      std::vector<Relationship> notes_rels{
          {"rId1", std::string(rel_type::kNotesMaster), relative_target(notes_part, *notes_master), false},
          {"rId2", std::string(rel_type::kSlide), relative_target(notes_part, part), false}};
      add_part(rels_part_for(notes_part), serialize_rels(notes_rels));
      rels.push_back({next_rel_id(rels), std::string(rel_type::kNotesSlide), relative_target(part, notes_part), false});
    }
    check_unique_ids(rels, part);

    add_part(part, std::move(synced.xml));
    overrides[part] = content_type::kSlide;
    if (!src.rels_xml.empty() && rels == original) {
      add_part(rels_part_for(part), src.rels_xml);
    } else if (!rels.empty()) {
      add_part(rels_part_for(part), serialize_rels(rels));
    }

    Relationship pres_rel{next_rel_id(pres_rels), std::string(rel_type::kSlide), relative_target(pres_part, part),
                          false};
    pres_rels.push_back(pres_rel);
    auto sld = Node::element("p:sldId");
    sld->set_attr("id", std::to_string(256 + i));
    sld->set_attr("r:id", pres_rel.id);
    sld_list->append(std::move(sld));
  }
  check_unique_ids(pres_rels, pres_part);

  pres_root.children.erase(std::remove_if(pres_root.children.begin(), pres_root.children.end(),
                                          [](const NodePtr& c) { return c->is_element() && c->name == "p:sldIdLst"; }),
                           pres_root.children.end());
  if (!sld_list->children.empty()) {
    insert_after(pres_root, std::move(sld_list), {"p:sldMasterIdLst", "p:notesMasterIdLst", "p:handoutMasterIdLst"});
  }
  add_part(pres_part, xml::serialize(pres_doc));
  add_part(rels_part_for(pres_part), serialize_rels(pres_rels));
  overrides[pres_part] = pkg.presentation_content_type;

  auto types = Node::element("Types");
  types->set_attr("xmlns", std::string(kNsContentTypes));
  std::set<std::string> defaults;
  for (const auto& [ext, type] : pkg.ct_defaults) {
    auto d = Node::element("Default");
    d->set_attr("Extension", ext);
    d->set_attr("ContentType", type);
    types->append(std::move(d));
    std::string lower = ext;
    for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    defaults.insert(lower);
  }
  for (const auto& [name, data] : parts) {
    auto ext = extension_of(name);
    if (overrides.count(name) || defaults.count(ext) || ext.empty()) continue;
    auto d = Node::element("Default");
    d->set_attr("Extension", ext);
    d->set_attr("ContentType", default_content_type(ext));
    types->append(std::move(d));
    defaults.insert(ext);
  }
  for (const auto& [name, type] : overrides) {
    auto o = Node::element("Override");
    o->set_attr("PartName", "/" + name);
    o->set_attr("ContentType", type);
    types->append(std::move(o));
  }

  std::vector<ZipEntry> entries;
  entries.push_back({"[Content_Types].xml", xml::serialize(xml::Document{std::move(types)})});
  if (auto it = parts.find("_rels/.rels"); it != parts.end()) {
    entries.push_back({it->first, it->second});
    parts.erase(it);
  }
  for (auto& [name, data] : parts) entries.push_back({name, std::move(data)});
  return write_zip(entries);
}

}  // namespace slidetailor::deck
