#include "package.hpp"

#include <charconv>
#include <filesystem>

#include "slidetailor/error.hpp"

namespace slidetailor::deck {

namespace fs = std::filesystem;

std::string part_dir(std::string_view part) {
  auto slash = part.rfind('/');
  return slash == std::string_view::npos ? std::string() : std::string(part.substr(0, slash));
}

std::string rels_part_for(std::string_view part) {
  auto slash = part.rfind('/');
  if (slash == std::string_view::npos) return "_rels/" + std::string(part) + ".rels";
  return std::string(part.substr(0, slash)) + "/_rels/" + std::string(part.substr(slash + 1)) + ".rels";
}

std::string resolve_target(std::string_view source_part, std::string_view target) {
  if (!target.empty() && target.front() == '/') return std::string(target.substr(1));
  fs::path p = fs::path(part_dir(source_part)) / fs::path(target);
  return p.lexically_normal().generic_string();
}

std::string relative_target(std::string_view source_part, std::string_view target_part) {
  auto dir = part_dir(source_part);
  return fs::path(target_part).lexically_relative(dir.empty() ? fs::path(".") : fs::path(dir)).generic_string();
}

std::vector<Relationship> parse_rels(std::string_view bytes, std::string_view part_name) {
  auto doc = xml::parse(bytes, part_name);
  std::vector<Relationship> rels;
  for (const auto* r : doc.root->children_named("Relationship")) {
    Relationship rel;
    if (const auto* v = r->attr("Id")) rel.id = *v;
    if (const auto* v = r->attr("Type")) rel.type = *v;
    if (const auto* v = r->attr("Target")) rel.target = *v;
    if (const auto* v = r->attr("TargetMode")) rel.external = (*v == "External");
    rels.push_back(std::move(rel));
  }
  return rels;
}

std::string serialize_rels(const std::vector<Relationship>& rels) {
  auto root = xml::Node::element("Relationships");
  root->set_attr("xmlns", std::string(kNsRels));
  for (const auto& r : rels) {
    auto el = xml::Node::element("Relationship");
    el->set_attr("Id", r.id);
    el->set_attr("Type", r.type);
    el->set_attr("Target", r.target);
    if (r.external) el->set_attr("TargetMode", "External");
    root->append(std::move(el));
  }
  return xml::serialize(xml::Document{std::move(root)});
}

std::string next_rel_id(const std::vector<Relationship>& rels) {
  int max_id = 0;
  for (const auto& r : rels) {
    if (r.id.size() > 3 && r.id.compare(0, 3, "rId") == 0) {
      int n = 0;
      auto [p, ec] = std::from_chars(r.id.data() + 3, r.id.data() + r.id.size(), n);
      if (ec == std::errc() && p == r.id.data() + r.id.size()) max_id = std::max(max_id, n);
    }
  }
  return "rId" + std::to_string(max_id + 1);
}

std::string local_name(std::string_view qname) {
  auto colon = qname.find(':');
  return std::string(colon == std::string_view::npos ? qname : qname.substr(colon + 1));
}

std::string serialize_fragment(const xml::Node& node) {
  // Serialize via a throwaway document and drop the declaration line.
  xml::Document doc{node.clone()};
  std::string s = xml::serialize(doc);
  auto end = s.find("?>\r\n");
  return s.substr(end + 4);
}

xml::NodePtr parse_fragment(std::string_view fragment) {
  return xml::parse(fragment, "<fragment>").root;
}

const xml::Node* non_visual_props(const xml::Node& el) {
  for (const auto& c : el.children) {
    if (c->is_element() && c->name.rfind("p:nv", 0) == 0) return c.get();
  }
  return nullptr;
}

std::optional<int> shape_element_id(const xml::Node& el) {
  const auto* nv = non_visual_props(el);
  if (!nv) return std::nullopt;
  const auto* c = nv->child("p:cNvPr");
  if (!c) return std::nullopt;
  const auto* id = c->attr("id");
  if (!id) return std::nullopt;
  int v = 0;
  auto [p, ec] = std::from_chars(id->data(), id->data() + id->size(), v);
  if (ec != std::errc()) return std::nullopt;
  return v;
}

bool is_shape_element(const xml::Node& node) {
  if (!node.is_element()) return false;
  return node.name == "p:sp" || node.name == "p:pic" || node.name == "p:graphicFrame" ||
         node.name == "p:grpSp" || node.name == "p:cxnSp";
}

}  // namespace slidetailor::deck
