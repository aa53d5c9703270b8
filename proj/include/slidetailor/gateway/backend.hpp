#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <string>

#include "slidetailor/gateway/chat.hpp"
#include "slidetailor/json.hpp"

namespace slidetailor::gateway {

/// A chat-completion transport. Implementations return the assistant text
/// verbatim or throw Errc::TransportFailure.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string send(const ChatRequest& request) = 0;
};

struct HttpBackendConfig {
  /// Base URL up to and including the API version, e.g.
  /// "https://api.openai.com/v1". "/chat/completions" is appended.
  std::string endpoint = "https://api.openai.com/v1";
  std::string api_key_env = "OPENAI_API_KEY";
  int timeout_seconds = 300;
  int max_retries = 3;
  /// Minimum spacing between requests from this backend instance.
  int min_interval_ms = 0;
};

/// OpenAI-compatible request body for `request`. Images are inlined as
/// base64 data URLs inside a content-part array.
Json build_chat_payload(const ChatRequest& request);

/// Extracts choices[0].message.content from a chat-completions response.
std::string parse_chat_response(const std::string& body);

class HttpChatBackend final : public ChatBackend {
 public:
  /// Throws Errc::CredentialMissing when the credential variable is unset
  /// or empty.
  explicit HttpChatBackend(HttpBackendConfig config);

  std::string send(const ChatRequest& request) override;

 private:
  void pace();

  HttpBackendConfig config_;
  std::string api_key_;
  std::mutex pace_mutex_;
  std::chrono::steady_clock::time_point last_request_{};
};

}  // namespace slidetailor::gateway
