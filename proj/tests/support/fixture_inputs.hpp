#pragma once

#include <filesystem>

namespace slidetailor::testing {

// Inputs of the two-turn repair transcript: the first answer has no JSON,
// the second is valid.
inline constexpr const char* kRepairRefStructure =
    "Subtopic sequence: title -> motivation -> method -> results -> conclusion\n";
inline constexpr const char* kRepairGenStructure =
    "Subtopic sequence: title -> method -> motivation -> results -> conclusion\n";
inline constexpr const char* kRepairFirstAnswer = "I would rate this a four because the ordering mostly matches.";

struct FixturePaths {
  std::filesystem::path root;

  std::filesystem::path target() const { return root / "papers" / "target"; }
  std::filesystem::path ref_paper() const { return root / "papers" / "reference"; }
  std::filesystem::path ref_slides() const { return root / "papers" / "reference" / "slides.pptx"; }
  std::filesystem::path template_deck() const { return root / "templates" / "academic.pptx"; }
  std::filesystem::path transcripts() const { return root / "transcripts"; }
  std::filesystem::path repair_transcripts() const { return root / "transcripts_repair"; }
};

}  // namespace slidetailor::testing
