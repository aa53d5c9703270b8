#pragma once

#include <deque>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "slidetailor/gateway/backend.hpp"

namespace slidetailor::testing {

/// A deterministic stand-in for the chat model. It reads the rendered
/// prompt of each pipeline stage and answers with well-formed JSON built
/// from the prompt's own inputs. Canned responses queued per purpose tag are
/// served first, which lets tests inject malformed or adversarial answers.
class ScriptedModel final : public gateway::ChatBackend {
 public:
  std::string send(const gateway::ChatRequest& request) override;

  void enqueue(const std::string& purpose_tag, std::string response);
  std::size_t calls(const std::string& purpose_tag) const;
  std::vector<gateway::ChatRequest> requests() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::deque<std::string>> queued_;
  std::map<std::string, std::size_t> calls_;
  std::vector<gateway::ChatRequest> log_;
};

/// The scripted answer for a request, ignoring any queue.
std::string scripted_response(const gateway::ChatRequest& request);

}  // namespace slidetailor::testing
