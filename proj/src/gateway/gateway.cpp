#include "slidetailor/gateway/gateway.hpp"

#include "slidetailor/error.hpp"

namespace slidetailor::gateway {

std::string_view to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::Live: return "live";
    case Mode::Record: return "record";
    case Mode::Replay: return "replay";
  }
  return "live";
}

Mode parse_mode(std::string_view text) {
  if (text == "live") return Mode::Live;
  if (text == "record") return Mode::Record;
  if (text == "replay") return Mode::Replay;
  throw Error(Errc::ConfigError, "unknown mode '" + std::string(text) + "' (expected live|record|replay)");
}

ModelGateway::ModelGateway(Mode mode, std::shared_ptr<TranscriptStore> store,
                           std::shared_ptr<ChatBackend> backend)
    : mode_(mode), store_(std::move(store)), backend_(std::move(backend)) {
  if ((mode_ == Mode::Replay || mode_ == Mode::Record) && !store_) {
    throw Error(Errc::ConfigError, std::string(to_string(mode_)) + " mode requires a transcript store");
  }
}

std::string ModelGateway::complete(const ChatRequest& request) {
  validate_request(request);
  const std::string digest = request_digest(request);
  std::string response;
  if (mode_ == Mode::Replay) {
    auto record = store_->find(digest);
    if (!record) {
      throw Error(Errc::ReplayMiss, "no transcript for " + request.purpose_tag + " request " + digest);
    }
    response = std::move(record->response_text);
  } else {
    if (!backend_) throw Error(Errc::CredentialMissing, "no model backend configured");
    response = backend_->send(request);
    if (mode_ == Mode::Record) store_->put({digest, request.purpose_tag, "", response});
  }
  ++calls_;
  if (observer_) observer_(request, digest, response);
  return response;
}

ChatRequest make_request(std::string prompt, const ModelOptions& options, std::string purpose_tag,
                         std::vector<std::filesystem::path> images) {
  ChatRequest request;
  request.messages.push_back({Role::User, std::move(prompt), std::move(images)});
  request.model_id = options.model_id;
  request.temperature = options.temperature;
  request.max_tokens = options.max_tokens;
  request.purpose_tag = std::move(purpose_tag);
  return request;
}

std::string repair_message(const std::vector<Diagnostic>& diagnostics) {
  std::string msg =
      "Your previous response could not be accepted for the following reasons:\n";
  msg += format_diagnostics(diagnostics);
  msg += "Reply again with only the corrected JSON, keeping everything else unchanged.";
  return msg;
}

StructuredOutcome ModelGateway::complete_structured(ChatRequest request, std::string_view schema_id,
                                                    int max_repairs, const ExtraCheck& extra) {
  if (max_repairs < 0) throw Error(Errc::InvalidRequest, "max_repairs must be >= 0");
  // Fail on an unknown schema before spending a call.
  (void)schema_catalog().get(schema_id);

  std::vector<Diagnostic> last;
  for (int attempt = 0; attempt <= max_repairs; ++attempt) {
    std::string text = complete(request);
    try {
      Json value = extract_structured(text, schema_id);
      if (extra) last = extra(value);
      else last.clear();
      if (last.empty()) return {std::move(value), attempt + 1};
    } catch (const Error& e) {
      switch (e.code()) {
        case Errc::NoObjectFound:
          last = {{"NoObjectFound", "", "the response did not contain a JSON object"}};
          break;
        case Errc::ParseFailure:
        case Errc::SchemaViolation:
          last = e.diagnostics();
          if (last.empty()) last = {{std::string(to_string(e.code())), "", e.what()}};
          break;
        default:
          throw;
      }
    }
    if (attempt == max_repairs) break;
    request.messages.push_back({Role::Assistant, text, {}});
    request.messages.push_back({Role::User, repair_message(last), {}});
  }
  throw Error(Errc::ExhaustedRepairs,
              request.purpose_tag + ": no valid output after " + std::to_string(max_repairs + 1) + " attempt(s)",
              last);
}

}  // namespace slidetailor::gateway
