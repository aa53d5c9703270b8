#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "slidetailor/gateway/backend.hpp"
#include "slidetailor/gateway/chat.hpp"
#include "slidetailor/gateway/structured.hpp"
#include "slidetailor/gateway/transcript_store.hpp"
#include "slidetailor/json.hpp"

namespace slidetailor::gateway {

enum class Mode { Live, Record, Replay };

std::string_view to_string(Mode mode) noexcept;
/// Accepts "live", "record", "replay". Throws Errc::ConfigError otherwise.
Mode parse_mode(std::string_view text);

/// Context-dependent checks layered on top of a schema (slide counts, key
/// coverage, shape ids). Violations feed the repair loop like schema ones.
using ExtraCheck = std::function<std::vector<Diagnostic>(const Json&)>;

/// Called once per completed exchange, in call order.
using ExchangeObserver =
    std::function<void(const ChatRequest&, const std::string& digest, const std::string& response)>;

struct StructuredOutcome {
  Json value;
  int attempts = 0;
};

inline constexpr int kDefaultMaxRepairs = 3;

/// Per-stage model settings shared by every pipeline module.
struct ModelOptions {
  std::string model_id = "gpt-4.1";
  double temperature = 0.0;
  int max_tokens = 4096;
};

/// One user message carrying `prompt` and optional images.
ChatRequest make_request(std::string prompt, const ModelOptions& options, std::string purpose_tag,
                         std::vector<std::filesystem::path> images = {});

class ModelGateway {
 public:
  /// `store` is required for record and replay; `backend` for live and
  /// record. A missing backend in live/record raises CredentialMissing at
  /// call time.
  ModelGateway(Mode mode, std::shared_ptr<TranscriptStore> store,
               std::shared_ptr<ChatBackend> backend);

  Mode mode() const noexcept { return mode_; }

  std::string complete(const ChatRequest& request);

  /// Calls complete(); on extraction or check failure appends the rejected
  /// answer plus a repair message and retries, at most `max_repairs` times.
  /// Throws ExhaustedRepairs carrying the last attempt's diagnostics.
  StructuredOutcome complete_structured(ChatRequest request, std::string_view schema_id,
                                        int max_repairs = kDefaultMaxRepairs,
                                        const ExtraCheck& extra = {});

  void set_observer(ExchangeObserver observer) { observer_ = std::move(observer); }

  /// Number of complete() calls that returned a response.
  std::size_t call_count() const noexcept { return calls_.load(); }

 private:
  Mode mode_;
  std::shared_ptr<TranscriptStore> store_;
  std::shared_ptr<ChatBackend> backend_;
  ExchangeObserver observer_;
  std::atomic<std::size_t> calls_{0};
};

/// Builds the user-facing repair message for a rejected answer.
std::string repair_message(const std::vector<Diagnostic>& diagnostics);

}  // namespace slidetailor::gateway
