#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

namespace slidetailor::gateway {

struct TranscriptRecord {
  std::string digest;
  std::string purpose_tag;
  std::string timestamp;  // ISO-8601 UTC, informational only
  std::string response_text;
};

/// Directory of `<digest>.json` records. Lookups are exact-match on digest.
class TranscriptStore {
 public:
  explicit TranscriptStore(std::filesystem::path directory);

  const std::filesystem::path& directory() const noexcept { return dir_; }

  std::optional<TranscriptRecord> find(const std::string& digest) const;
  void put(const TranscriptRecord& record);
  std::size_t size() const;

 private:
  std::filesystem::path path_for(const std::string& digest) const;

  std::filesystem::path dir_;
  mutable std::mutex write_mutex_;
};

}  // namespace slidetailor::gateway
