#include "slidetailor/error.hpp"

namespace slidetailor {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidRequest: return "InvalidRequest";
    case Errc::ReplayMiss: return "ReplayMiss";
    case Errc::TransportFailure: return "TransportFailure";
    case Errc::CredentialMissing: return "CredentialMissing";
    case Errc::NoObjectFound: return "NoObjectFound";
    case Errc::ParseFailure: return "ParseFailure";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::UnknownSchema: return "UnknownSchema";
    case Errc::ExhaustedRepairs: return "ExhaustedRepairs";
    case Errc::UnknownPlaceholder: return "UnknownPlaceholder";
    case Errc::NotAZip: return "NotAZip";
    case Errc::MissingPresentationPart: return "MissingPresentationPart";
    case Errc::MalformedXML: return "MalformedXML";
    case Errc::DanglingImageRef: return "DanglingImageRef";
    case Errc::RelationshipConflict: return "RelationshipConflict";
    case Errc::UnknownShapeId: return "UnknownShapeId";
    case Errc::UnknownTemplateIndex: return "UnknownTemplateIndex";
    case Errc::AssetUnreadable: return "AssetUnreadable";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::IllegalAction: return "IllegalAction";
    case Errc::RendererUnavailable: return "RendererUnavailable";
    case Errc::RendererFailed: return "RendererFailed";
    case Errc::MissingBody: return "MissingBody";
    case Errc::MissingManifest: return "MissingManifest";
    case Errc::BadAsset: return "BadAsset";
    case Errc::ExtractorUnavailable: return "ExtractorUnavailable";
    case Errc::ExtractorFailed: return "ExtractorFailed";
    case Errc::KeyCoverageViolation: return "KeyCoverageViolation";
    case Errc::EmptySections: return "EmptySections";
    case Errc::SlideCountMismatch: return "SlideCountMismatch";
    case Errc::DuplicateImageUse: return "DuplicateImageUse";
    case Errc::UnknownAssetId: return "UnknownAssetId";
    case Errc::LayoutOutOfRange: return "LayoutOutOfRange";
    case Errc::ContentMutated: return "ContentMutated";
    case Errc::MissingSpeech: return "MissingSpeech";
    case Errc::EmptyDeck: return "EmptyDeck";
    case Errc::MissingRender: return "MissingRender";
    case Errc::PreconditionFailed: return "PreconditionFailed";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::WrongArity: return "WrongArity";
    case Errc::ArityMismatch: return "ArityMismatch";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::MissingPath: return "MissingPath";
    case Errc::EmptyList: return "EmptyList";
    case Errc::NotEnoughPapers: return "NotEnoughPapers";
    case Errc::NoEvaluatedRecords: return "NoEvaluatedRecords";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

std::string format_diagnostics(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) {
    out += "- [";
    out += d.code;
    out += "] ";
    if (!d.path.empty()) {
      out += d.path;
      out += ": ";
    }
    out += d.message;
    out += '\n';
  }
  return out;
}

namespace {
std::string compose(Errc code, const std::string& message,
                    const std::vector<Diagnostic>& diags) {
  std::string what(to_string(code));
  if (!message.empty()) what += ": " + message;
  if (!diags.empty()) what += "\n" + format_diagnostics(diags);
  return what;
}
}  // namespace

Error::Error(Errc code, const std::string& message, std::vector<Diagnostic> diagnostics)
    : std::runtime_error(compose(code, message, diagnostics)),
      code_(code),
      diagnostics_(std::move(diagnostics)) {}

}  // namespace slidetailor
