#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace slidetailor {

/// Error codes surfaced by every module. Names follow the failure they
/// describe so callers can branch on them without parsing messages.
enum class Errc {
  // model gateway
  InvalidRequest,
  ReplayMiss,
  TransportFailure,
  CredentialMissing,
  NoObjectFound,
  ParseFailure,
  SchemaViolation,
  UnknownSchema,
  ExhaustedRepairs,
  UnknownPlaceholder,
  // deck engine
  NotAZip,
  MissingPresentationPart,
  MalformedXML,
  DanglingImageRef,
  RelationshipConflict,
  UnknownShapeId,
  UnknownTemplateIndex,
  AssetUnreadable,
  IndexOutOfRange,
  IllegalAction,
  RendererUnavailable,
  RendererFailed,
  // paper ingest
  MissingBody,
  MissingManifest,
  BadAsset,
  ExtractorUnavailable,
  ExtractorFailed,
  // distiller / planner / realizer
  KeyCoverageViolation,
  EmptySections,
  SlideCountMismatch,
  DuplicateImageUse,
  UnknownAssetId,
  LayoutOutOfRange,
  ContentMutated,
  MissingSpeech,
  // evaluator
  EmptyDeck,
  MissingRender,
  PreconditionFailed,
  OutOfRange,
  WrongArity,
  ArityMismatch,
  ZeroVariance,
  // bench
  MissingPath,
  EmptyList,
  NotEnoughPapers,
  NoEvaluatedRecords,
  ConfigError,
  IoError,
};

std::string_view to_string(Errc code) noexcept;

/// A single validation finding. `code` is stable and machine-readable,
/// `path` points at the offending field (JSON-pointer style).
struct Diagnostic {
  std::string code;
  std::string path;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

std::string format_diagnostics(const std::vector<Diagnostic>& diags);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message,
        std::vector<Diagnostic> diagnostics = {});

  Errc code() const noexcept { return code_; }
  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  Errc code_;
  std::vector<Diagnostic> diagnostics_;
};

}  // namespace slidetailor
