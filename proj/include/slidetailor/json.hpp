#pragma once

#include <nlohmann/json.hpp>

namespace slidetailor {

/// Insertion-ordered JSON. Artifact files keep the field order the model
/// (or the schema) produced, e.g. outline keys "1_..", "2_..", .., "10_..".
using Json = nlohmann::ordered_json;

}  // namespace slidetailor
