#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "slidetailor/deck/deck.hpp"
#include "slidetailor/error.hpp"
#include "slidetailor/json.hpp"

namespace slidetailor::ingest {

enum class AssetKind { Figure, Table };

std::string_view to_string(AssetKind kind) noexcept;

struct AssetRecord {
  std::string asset_id;
  AssetKind kind = AssetKind::Figure;
  /// Absolute path of the raster file.
  std::filesystem::path file_path;
  std::string caption;
  std::string source_locator;

  bool operator==(const AssetRecord&) const = default;
};

struct PaperMetadata {
  std::string title;
  std::string authors;
  std::string venue;
  std::string organization;

  bool operator==(const PaperMetadata&) const = default;
};

struct Section {
  std::string heading;
  std::string text;

  bool operator==(const Section&) const = default;
};

struct PaperBundle {
  PaperMetadata metadata;
  std::vector<Section> sections;
  std::vector<AssetRecord> assets;

  /// Markdown rendering of the sections, used as prompt input.
  std::string body_text() const;
  const AssetRecord* find_asset(std::string_view asset_id) const;

  bool operator==(const PaperBundle&) const = default;
};

/// Splits markdown into sections at headings of any level. Text before the
/// first heading becomes a "Preamble" section when non-blank.
std::vector<Section> split_sections(std::string_view markdown);

/// Reads `paper.md` (or `paper.txt`), `assets/manifest.json` and optional
/// `metadata.json`. Headings that collide after canonicalization get a
/// " (2)", " (3)", ... suffix. Throws MissingBody, MissingManifest,
/// BadAsset.
PaperBundle load_bundle(const std::filesystem::path& directory);

/// Runs `<command> <pdf> <out_dir>` and loads the bundle it writes. Throws
/// ExtractorUnavailable, ExtractorFailed, plus load_bundle errors.
PaperBundle extract_pdf(const std::filesystem::path& pdf, const std::string& command,
                        const std::filesystem::path& out_dir);

/// One diagnostic per broken invariant; empty when the bundle is valid.
std::vector<Diagnostic> validate_bundle(const PaperBundle& bundle);

/// Text-only bundle of a slide deck: one section per slide, headed
/// "Slide <n>" plus the slide title when it has one.
PaperBundle bundle_from_deck(const deck::DeckModel& deck);

/// Directory bundle, `.pptx` deck, or `.pdf` through the extractor.
PaperBundle load_any(const std::filesystem::path& path, const std::string& extractor_command,
                     const std::filesystem::path& scratch_dir);

Json to_json(const PaperBundle& bundle);

}  // namespace slidetailor::ingest
