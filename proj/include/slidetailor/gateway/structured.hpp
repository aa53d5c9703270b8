#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "slidetailor/error.hpp"
#include "slidetailor/json.hpp"

namespace slidetailor::gateway {

/// Validates (and may normalize in place) a parsed value. Returns one
/// diagnostic per violation; empty means valid.
using SchemaValidator = std::function<std::vector<Diagnostic>(Json&)>;

class SchemaCatalog {
 public:
  void add(std::string id, SchemaValidator validator);
  bool contains(std::string_view id) const;
  /// Throws Errc::UnknownSchema.
  SchemaValidator get(std::string_view id) const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, SchemaValidator, std::less<>> validators_;
};

/// Process-wide catalog, pre-populated with the gateway's built-in schemas.
SchemaCatalog& schema_catalog();

/// Removes a surrounding markdown code fence if present, else returns the
/// text unchanged.
std::string strip_code_fences(std::string_view text);

/// Returns the first balanced top-level `{...}` span, honoring JSON string
/// escapes. Empty when none exists.
std::string_view find_outermost_object(std::string_view text);

/// Strips fences, locates the outermost object, parses and validates it.
/// Throws NoObjectFound, ParseFailure, or SchemaViolation (with diagnostics).
Json extract_structured(std::string_view text, std::string_view schema_id);

// Small helpers shared by schema validators across modules.
namespace schema {
bool require_object(const Json& v, const std::string& path, std::vector<Diagnostic>& out);
bool require_string(const Json& obj, const std::string& key, const std::string& path,
                    std::vector<Diagnostic>& out, bool non_empty = false);
bool require_string_array(const Json& obj, const std::string& key, const std::string& path,
                          std::vector<Diagnostic>& out);
}  // namespace schema

}  // namespace slidetailor::gateway
