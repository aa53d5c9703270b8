#pragma once

#include <doctest.h>

#include <filesystem>
#include <memory>
#include <string>

#include "fixture_inputs.hpp"
#include "scripted_model.hpp"
#include "slidetailor/error.hpp"
#include "slidetailor/gateway/gateway.hpp"

namespace slidetailor::testing {

inline FixturePaths fixtures() { return FixturePaths{SLIDETAILOR_FIXTURE_DIR}; }

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("slidetailor_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

/// Runs `fn` and returns the code of the slidetailor::Error it throws.
template <class Fn>
Errc error_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::IoError;
}

template <class Fn>
Error caught(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an error");
  return Error(Errc::IoError, "unreachable");
}

/// Live gateway over a fresh scripted model.
struct ScriptedGateway {
  std::shared_ptr<ScriptedModel> model = std::make_shared<ScriptedModel>();
  gateway::ModelGateway gw{gateway::Mode::Live, nullptr, model};
};

/// Replay gateway over the shipped pipeline transcripts.
inline gateway::ModelGateway replay_gateway(const std::filesystem::path& dir = fixtures().transcripts()) {
  return gateway::ModelGateway(gateway::Mode::Replay, std::make_shared<gateway::TranscriptStore>(dir), nullptr);
}

}  // namespace slidetailor::testing
