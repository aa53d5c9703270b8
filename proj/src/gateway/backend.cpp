#include "slidetailor/gateway/backend.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <thread>

#include "slidetailor/error.hpp"
#include "slidetailor/util.hpp"

namespace slidetailor::gateway {

namespace {

std::string mime_for(const std::string& bytes) {
  ImageInfo info;
  if (probe_image(bytes, info) && info.format == "jpeg") return "image/jpeg";
  return "image/png";
}

struct SplitUrl {
  std::string scheme_host_port;
  std::string base_path;
};

SplitUrl split_endpoint(const std::string& endpoint) {
  auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(Errc::ConfigError, "endpoint must include a scheme: " + endpoint);
  }
  auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {endpoint, ""};
  std::string path = endpoint.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {endpoint.substr(0, path_start), path};
}

}  // namespace

Json build_chat_payload(const ChatRequest& request) {
  Json body;
  body["model"] = request.model_id;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  auto& messages = body["messages"] = Json::array();
  for (const auto& m : request.messages) {
    Json msg;
    msg["role"] = std::string(to_string(m.role));
    if (m.image_refs.empty()) {
      msg["content"] = m.text;
    } else {
      Json parts = Json::array();
      parts.push_back({{"type", "text"}, {"text", m.text}});
      for (const auto& img : m.image_refs) {
        std::string bytes = read_file(img);
        std::string url = "data:" + mime_for(bytes) + ";base64," + base64_encode(bytes);
        parts.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
      }
      msg["content"] = std::move(parts);
    }
    messages.push_back(std::move(msg));
  }
  return body;
}

std::string parse_chat_response(const std::string& body) {
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::parse_error& e) {
    throw Error(Errc::TransportFailure, std::string("response is not JSON: ") + e.what());
  }
  try {
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    // Some servers return content parts even for text-only answers.
    std::string out;
    for (const auto& part : content) {
      if (part.value("type", "") == "text") out += part.value("text", "");
    }
    return out;
  } catch (const Json::exception& e) {
    throw Error(Errc::TransportFailure, std::string("unexpected response shape: ") + e.what());
  }
}

HttpChatBackend::HttpChatBackend(HttpBackendConfig config) : config_(std::move(config)) {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw Error(Errc::CredentialMissing, "environment variable " + config_.api_key_env + " is not set");
  }
  api_key_ = key;
}

void HttpChatBackend::pace() {
  if (config_.min_interval_ms <= 0) return;
  std::lock_guard lock(pace_mutex_);
  auto next = last_request_ + std::chrono::milliseconds(config_.min_interval_ms);
  auto now = std::chrono::steady_clock::now();
  if (now < next) std::this_thread::sleep_for(next - now);
  last_request_ = std::chrono::steady_clock::now();
}

std::string HttpChatBackend::send(const ChatRequest& request) {
  auto url = split_endpoint(config_.endpoint);
  std::string payload = build_chat_payload(request).dump();
  httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(500 << (attempt - 1)));
    pace();
    httplib::Client client(url.scheme_host_port);
    client.set_connection_timeout(30);
    client.set_read_timeout(config_.timeout_seconds);
    client.set_write_timeout(60);
    auto res = client.Post(url.base_path + "/chat/completions", headers, payload, "application/json");
    if (!res) {
      last_error = "network error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return parse_chat_response(res->body);
    last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500);
    bool retryable = res->status == 429 || res->status >= 500;
    if (!retryable) break;
  }
  throw Error(Errc::TransportFailure, last_error);
}

}  // namespace slidetailor::gateway
