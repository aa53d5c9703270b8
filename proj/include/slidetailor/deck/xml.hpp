#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace slidetailor::deck::xml {

struct Node;
using NodePtr = std::unique_ptr<Node>;

/// Minimal DOM: elements keep qualified names (prefix:local) and attribute
/// order exactly as written; text nodes keep whitespace.
struct Node {
  enum class Kind { Element, Text };

  Kind kind = Kind::Element;
  std::string name;  // qualified element name, or text content
  std::vector<std::pair<std::string, std::string>> attrs;
  std::vector<NodePtr> children;

  static NodePtr element(std::string qname);
  static NodePtr text(std::string content);

  bool is_element() const noexcept { return kind == Kind::Element; }
  const std::string* attr(std::string_view key) const;
  void set_attr(std::string_view key, std::string value);
  void remove_attr(std::string_view key);

  Node* child(std::string_view qname);
  const Node* child(std::string_view qname) const;
  std::vector<Node*> children_named(std::string_view qname);
  std::vector<const Node*> children_named(std::string_view qname) const;
  /// Depth-first search for the first descendant element with this name.
  const Node* find(std::string_view qname) const;
  Node* find(std::string_view qname);

  Node& append(NodePtr node);
  /// Concatenated character data of all descendant text nodes.
  std::string inner_text() const;
  NodePtr clone() const;
};

struct Document {
  NodePtr root;
};

/// Throws Errc::MalformedXML naming `part_name`.
Document parse(std::string_view bytes, std::string_view part_name);

/// Serializes with a standalone UTF-8 declaration, as Office writes it.
std::string serialize(const Document& doc);

std::string escape_text(std::string_view text);
std::string escape_attr(std::string_view text);

}  // namespace slidetailor::deck::xml
