#include "slidetailor/gateway/chat.hpp"

#include <nlohmann/json.hpp>

#include "slidetailor/error.hpp"
#include "slidetailor/util.hpp"

namespace slidetailor::gateway {

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

void validate_request(const ChatRequest& request) {
  if (request.messages.empty()) throw Error(Errc::InvalidRequest, "request has no messages");
  if (request.purpose_tag.empty()) throw Error(Errc::InvalidRequest, "purpose_tag is empty");
  if (request.temperature < 0.0) throw Error(Errc::InvalidRequest, "temperature must be >= 0");
  if (request.max_tokens <= 0) throw Error(Errc::InvalidRequest, "max_tokens must be positive");
  for (const auto& m : request.messages) {
    for (const auto& img : m.image_refs) {
      std::error_code ec;
      if (!fs::is_regular_file(img, ec)) {
        throw Error(Errc::InvalidRequest, "image reference does not resolve: " + img.string());
      }
    }
  }
}

std::string request_digest(const ChatRequest& request) {
  // Sorted-key JSON gives a canonical byte encoding.
  nlohmann::json canon;
  canon["v"] = 1;
  canon["model_id"] = request.model_id;
  canon["temperature"] = request.temperature;
  canon["purpose_tag"] = request.purpose_tag;
  auto& msgs = canon["messages"] = nlohmann::json::array();
  for (const auto& m : request.messages) {
    nlohmann::json entry;
    entry["role"] = std::string(to_string(m.role));
    entry["text"] = m.text;
    auto& images = entry["images"] = nlohmann::json::array();
    for (const auto& img : m.image_refs) images.push_back(sha256_hex(read_file(img)));
    msgs.push_back(std::move(entry));
  }
  return sha256_hex(canon.dump());
}

}  // namespace slidetailor::gateway
