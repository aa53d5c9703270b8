#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace slidetailor::gateway {

struct PromptTemplate {
  std::string_view name;
  std::string_view version;
  std::string_view text;
};

/// Versioned templates compiled in from prompts/<name>.<version>.txt.
/// Throws Errc::UnknownPlaceholder for an unknown name.
const PromptTemplate& prompt_template(std::string_view name);
std::vector<std::string_view> prompt_template_names();

/// Names appearing as `{{ name }}` in the template, in first-seen order.
/// Whitespace inside the braces is not significant.
std::vector<std::string> placeholders(std::string_view text);

/// Single-pass substitution: substituted values are never rescanned.
/// Throws Errc::UnknownPlaceholder if the template names a placeholder that
/// has no value, or a value names a placeholder the template lacks.
std::string render_prompt(std::string_view text, const std::map<std::string, std::string>& values);

}  // namespace slidetailor::gateway
