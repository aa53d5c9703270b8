#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace slidetailor::gateway {

enum class Role { System, User, Assistant };

std::string_view to_string(Role role) noexcept;

struct ChatMessage {
  Role role = Role::User;
  std::string text;
  std::vector<std::filesystem::path> image_refs;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  std::string model_id;
  double temperature = 0.0;
  int max_tokens = 4096;
  /// Namespaces replay records; also part of the digest.
  std::string purpose_tag;
};

/// Throws Errc::InvalidRequest when a structural invariant is broken: no
/// messages, empty purpose tag, negative temperature, non-positive
/// max_tokens, or an image reference that does not resolve to a file.
void validate_request(const ChatRequest& request);

/// SHA-256 over a canonical encoding of role + text + image content digests
/// for every message in order, model id, temperature, and purpose tag.
/// max_tokens is not part of the key.
std::string request_digest(const ChatRequest& request);

}  // namespace slidetailor::gateway
