#include "slidetailor/deck/xml.hpp"

#include <expat.h>

#include "slidetailor/error.hpp"

namespace slidetailor::deck::xml {

NodePtr Node::element(std::string qname) {
  auto n = std::make_unique<Node>();
  n->kind = Kind::Element;
  n->name = std::move(qname);
  return n;
}

NodePtr Node::text(std::string content) {
  auto n = std::make_unique<Node>();
  n->kind = Kind::Text;
  n->name = std::move(content);
  return n;
}

const std::string* Node::attr(std::string_view key) const {
  for (const auto& [k, v] : attrs) {
    if (k == key) return &v;
  }
  return nullptr;
}

void Node::set_attr(std::string_view key, std::string value) {
  for (auto& [k, v] : attrs) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  attrs.emplace_back(std::string(key), std::move(value));
}

void Node::remove_attr(std::string_view key) {
  std::erase_if(attrs, [&](const auto& kv) { return kv.first == key; });
}

Node* Node::child(std::string_view qname) {
  for (auto& c : children) {
    if (c->is_element() && c->name == qname) return c.get();
  }
  return nullptr;
}

const Node* Node::child(std::string_view qname) const {
  return const_cast<Node*>(this)->child(qname);
}

std::vector<Node*> Node::children_named(std::string_view qname) {
  std::vector<Node*> out;
  for (auto& c : children) {
    if (c->is_element() && c->name == qname) out.push_back(c.get());
  }
  return out;
}

std::vector<const Node*> Node::children_named(std::string_view qname) const {
  std::vector<const Node*> out;
  for (const auto& c : children) {
    if (c->is_element() && c->name == qname) out.push_back(c.get());
  }
  return out;
}

Node* Node::find(std::string_view qname) {
  for (auto& c : children) {
    if (!c->is_element()) continue;
    if (c->name == qname) return c.get();
    if (auto* hit = c->find(qname)) return hit;
  }
  return nullptr;
}

const Node* Node::find(std::string_view qname) const {
  return const_cast<Node*>(this)->find(qname);
}

Node& Node::append(NodePtr node) {
  children.push_back(std::move(node));
  return *children.back();
}

std::string Node::inner_text() const {
  if (!is_element()) return name;
  std::string out;
  for (const auto& c : children) out += c->inner_text();
  return out;
}

NodePtr Node::clone() const {
  auto n = std::make_unique<Node>();
  n->kind = kind;
  n->name = name;
  n->attrs = attrs;
  n->children.reserve(children.size());
  for (const auto& c : children) n->children.push_back(c->clone());
  return n;
}

namespace {

struct Builder {
  NodePtr root;
  std::vector<Node*> stack;
};

void on_start(void* data, const XML_Char* name, const XML_Char** atts) {
  auto* b = static_cast<Builder*>(data);
  auto node = Node::element(name);
  for (int i = 0; atts[i] != nullptr; i += 2) node->attrs.emplace_back(atts[i], atts[i + 1]);
  Node* raw = node.get();
  if (b->stack.empty()) {
    b->root = std::move(node);
  } else {
    b->stack.back()->append(std::move(node));
  }
  b->stack.push_back(raw);
}

void on_end(void* data, const XML_Char*) {
  static_cast<Builder*>(data)->stack.pop_back();
}

void on_text(void* data, const XML_Char* s, int len) {
  auto* b = static_cast<Builder*>(data);
  if (b->stack.empty()) return;
  auto& kids = b->stack.back()->children;
  if (!kids.empty() && !kids.back()->is_element()) {
    kids.back()->name.append(s, static_cast<std::size_t>(len));
  } else {
    kids.push_back(Node::text(std::string(s, static_cast<std::size_t>(len))));
  }
}

void write_node(const Node& n, std::string& out) {
  if (!n.is_element()) {
    out += escape_text(n.name);
    return;
  }
  out += '<';
  out += n.name;
  for (const auto& [k, v] : n.attrs) {
    out += ' ';
    out += k;
    out += "=\"";
    out += escape_attr(v);
    out += '"';
  }
  if (n.children.empty()) {
    out += "/>";
    return;
  }
  out += '>';
  for (const auto& c : n.children) write_node(*c, out);
  out += "</";
  out += n.name;
  out += '>';
}

}  // namespace

Document parse(std::string_view bytes, std::string_view part_name) {
  Builder b;
  XML_Parser parser = XML_ParserCreate("UTF-8");
  XML_SetUserData(parser, &b);
  XML_SetElementHandler(parser, on_start, on_end);
  XML_SetCharacterDataHandler(parser, on_text);
  auto status = XML_Parse(parser, bytes.data(), static_cast<int>(bytes.size()), XML_TRUE);
  std::string err;
  if (status != XML_STATUS_OK) {
    err = std::string(XML_ErrorString(XML_GetErrorCode(parser))) + " at line " +
          std::to_string(XML_GetCurrentLineNumber(parser));
  }
  XML_ParserFree(parser);
  if (!err.empty()) throw Error(Errc::MalformedXML, std::string(part_name) + ": " + err);
  if (!b.root) throw Error(Errc::MalformedXML, std::string(part_name) + ": no root element");
  return Document{std::move(b.root)};
}

std::string serialize(const Document& doc) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\r\n";
  if (doc.root) write_node(*doc.root, out);
  return out;
}

std::string escape_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '\r': out += "&#13;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string escape_attr(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '"': out += "&quot;"; break;
      case '\n': out += "&#10;"; break;
      case '\r': out += "&#13;"; break;
      case '\t': out += "&#9;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace slidetailor::deck::xml
