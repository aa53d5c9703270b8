#include "slidetailor/gateway/structured.hpp"

#include <charconv>
#include <cmath>

namespace slidetailor::gateway {

void SchemaCatalog::add(std::string id, SchemaValidator validator) {
  std::lock_guard lock(mutex_);
  validators_[std::move(id)] = std::move(validator);
}

bool SchemaCatalog::contains(std::string_view id) const {
  std::lock_guard lock(mutex_);
  return validators_.find(id) != validators_.end();
}

SchemaValidator SchemaCatalog::get(std::string_view id) const {
  std::lock_guard lock(mutex_);
  auto it = validators_.find(id);
  if (it == validators_.end()) throw Error(Errc::UnknownSchema, "schema not registered: " + std::string(id));
  return it->second;
}

namespace schema {

bool require_object(const Json& v, const std::string& path, std::vector<Diagnostic>& out) {
  if (v.is_object()) return true;
  out.push_back({"TypeMismatch", path.empty() ? "/" : path, "expected an object"});
  return false;
}

bool require_string(const Json& obj, const std::string& key, const std::string& path,
                    std::vector<Diagnostic>& out, bool non_empty) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    out.push_back({"MissingField", path + "/" + key, "required field is missing"});
    return false;
  }
  if (!it->is_string()) {
    out.push_back({"TypeMismatch", path + "/" + key, "expected a string"});
    return false;
  }
  if (non_empty && it->get_ref<const std::string&>().find_first_not_of(" \t\r\n") == std::string::npos) {
    out.push_back({"EmptyField", path + "/" + key, "must not be empty"});
    return false;
  }
  return true;
}

bool require_string_array(const Json& obj, const std::string& key, const std::string& path,
                          std::vector<Diagnostic>& out) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    out.push_back({"MissingField", path + "/" + key, "required field is missing"});
    return false;
  }
  if (!it->is_array()) {
    out.push_back({"TypeMismatch", path + "/" + key, "expected an array of strings"});
    return false;
  }
  bool ok = true;
  for (std::size_t i = 0; i < it->size(); ++i) {
    if (!(*it)[i].is_string()) {
      out.push_back({"TypeMismatch", path + "/" + key + "/" + std::to_string(i), "expected a string"});
      ok = false;
    }
  }
  return ok;
}

}  // namespace schema

namespace {

// Accepts integers, integral floats, and strings holding an integer. Rewrites
// `score` to an integer in place; the judge clamps afterwards.
std::vector<Diagnostic> validate_judge_lenient(Json& v) {
  std::vector<Diagnostic> out;
  if (!schema::require_object(v, "", out)) return out;
  schema::require_string(v, "reason", "", out, true);
  auto it = v.find("score");
  if (it == v.end()) {
    out.push_back({"MissingField", "/score", "required field is missing"});
    return out;
  }
  if (it->is_number_integer()) return out;
  if (it->is_number_float()) {
    double d = it->get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 1e9) {
      *it = static_cast<long long>(d);
    } else {
      out.push_back({"NonIntegerScore", "/score", "score must be an integer from 1 to 5"});
    }
    return out;
  }
  if (it->is_string()) {
    std::string s = it->get<std::string>();
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    long long value = 0;
    if (b != std::string::npos) {
      auto [p, ec] = std::from_chars(s.data() + b, s.data() + e + 1, value);
      if (ec == std::errc() && p == s.data() + e + 1) {
        *it = value;
        return out;
      }
    }
  }
  out.push_back({"NonIntegerScore", "/score", "score must be an integer from 1 to 5"});
  return out;
}

std::vector<Diagnostic> validate_judge_strict(Json& v) {
  std::vector<Diagnostic> out;
  if (!schema::require_object(v, "", out)) return out;
  schema::require_string(v, "reason", "", out, true);
  auto it = v.find("score");
  if (it == v.end()) {
    out.push_back({"MissingField", "/score", "required field is missing"});
  } else if (!it->is_number_integer()) {
    out.push_back({"TypeMismatch", "/score", "score must be an integer"});
  } else {
    auto s = it->get<long long>();
    if (s < 1 || s > 5) {
      out.push_back({"OutOfRange", "/score", "score " + std::to_string(s) + " is outside [1, 5]"});
    }
  }
  return out;
}

}  // namespace

SchemaCatalog& schema_catalog() {
  static SchemaCatalog catalog;
  static std::once_flag once;
  std::call_once(once, [] {
    catalog.add("judge", validate_judge_strict);
    catalog.add("judge_lenient", validate_judge_lenient);
  });
  return catalog;
}

std::string strip_code_fences(std::string_view text) {
  auto open = text.find("```");
  if (open == std::string_view::npos) return std::string(text);
  auto body_start = text.find('\n', open);
  if (body_start == std::string_view::npos) return std::string(text);
  ++body_start;
  auto close = text.find("```", body_start);
  if (close == std::string_view::npos) return std::string(text.substr(body_start));
  return std::string(text.substr(body_start, close - body_start));
}

std::string_view find_outermost_object(std::string_view text) {
  auto start = text.find('{');
  if (start == std::string_view::npos) return {};
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return text.substr(start, i - start + 1);
    }
  }
  // Unbalanced: hand the tail to the parser so the failure is reported as
  // a parse error rather than a missing object.
  return text.substr(start);
}

Json extract_structured(std::string_view text, std::string_view schema_id) {
  auto validator = schema_catalog().get(schema_id);
  std::string body = strip_code_fences(text);
  auto span = find_outermost_object(body);
  if (span.empty() && body.size() != text.size()) span = find_outermost_object(text);
  if (span.empty()) throw Error(Errc::NoObjectFound, "no JSON object in model output");
  Json value;
  try {
    value = Json::parse(span);
  } catch (const Json::parse_error& e) {
    throw Error(Errc::ParseFailure, e.what(), {{"ParseFailure", "", e.what()}});
  }
  auto diags = validator(value);
  if (!diags.empty()) {
    throw Error(Errc::SchemaViolation, "output violates schema " + std::string(schema_id), std::move(diags));
  }
  return value;
}

}  // namespace slidetailor::gateway
