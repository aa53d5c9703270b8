#include "slidetailor/gateway/prompt.hpp"

#include <algorithm>
#include <span>
#include <set>

#include "slidetailor/error.hpp"
#include "slidetailor/util.hpp"

namespace slidetailor::gateway {

namespace detail {
std::span<const PromptTemplate> prompt_table();
}  // namespace detail

const PromptTemplate& prompt_template(std::string_view name) {
  for (const auto& t : detail::prompt_table()) {
    if (t.name == name) return t;
  }
  throw Error(Errc::UnknownPlaceholder, "no prompt template named " + std::string(name));
}

std::vector<std::string_view> prompt_template_names() {
  std::vector<std::string_view> names;
  for (const auto& t : detail::prompt_table()) names.push_back(t.name);
  return names;
}

namespace {

struct Token {
  std::size_t begin;
  std::size_t end;  // one past the closing braces
  std::string name;
};

std::vector<Token> scan(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t pos = 0;
  while ((pos = text.find("{{", pos)) != std::string_view::npos) {
    auto close = text.find("}}", pos + 2);
    if (close == std::string_view::npos) break;
    auto inner = text.substr(pos + 2, close - pos - 2);
    if (inner.find('\n') != std::string_view::npos || inner.find('{') != std::string_view::npos) {
      pos += 2;
      continue;
    }
    tokens.push_back({pos, close + 2, trim(inner)});
    pos = close + 2;
  }
  return tokens;
}

}  // namespace

std::vector<std::string> placeholders(std::string_view text) {
  std::vector<std::string> names;
  for (auto& t : scan(text)) {
    if (std::find(names.begin(), names.end(), t.name) == names.end()) names.push_back(t.name);
  }
  return names;
}

std::string render_prompt(std::string_view text, const std::map<std::string, std::string>& values) {
  auto tokens = scan(text);
  std::set<std::string> used;
  std::string out;
  out.reserve(text.size());
  std::size_t cursor = 0;
  for (const auto& t : tokens) {
    auto it = values.find(t.name);
    if (it == values.end()) throw Error(Errc::UnknownPlaceholder, "no value for placeholder {{" + t.name + "}}");
    out.append(text.substr(cursor, t.begin - cursor));
    out.append(it->second);
    cursor = t.end;
    used.insert(t.name);
  }
  out.append(text.substr(cursor));
  for (const auto& [k, _] : values) {
    if (!used.count(k)) throw Error(Errc::UnknownPlaceholder, "template has no placeholder {{" + k + "}}");
  }
  return out;
}

}  // namespace slidetailor::gateway
