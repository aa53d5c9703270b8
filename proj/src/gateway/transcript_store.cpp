#include "slidetailor/gateway/transcript_store.hpp"

#include <chrono>
#include <ctime>

#include "slidetailor/error.hpp"
#include "slidetailor/json.hpp"
#include "slidetailor/util.hpp"

namespace slidetailor::gateway {

TranscriptStore::TranscriptStore(std::filesystem::path directory) : dir_(std::move(directory)) {}

std::filesystem::path TranscriptStore::path_for(const std::string& digest) const {
  return dir_ / (digest + ".json");
}

std::optional<TranscriptRecord> TranscriptStore::find(const std::string& digest) const {
  auto path = path_for(digest);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) return std::nullopt;
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw Error(Errc::IoError, "corrupt transcript record " + path.string() + ": " + e.what());
  }
  TranscriptRecord r;
  r.digest = j.value("digest", digest);
  r.purpose_tag = j.value("purpose_tag", "");
  r.timestamp = j.value("timestamp", "");
  r.response_text = j.at("response_text").get<std::string>();
  if (r.digest != digest) return std::nullopt;
  return r;
}

void TranscriptStore::put(const TranscriptRecord& record) {
  TranscriptRecord r = record;
  if (r.timestamp.empty()) {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    r.timestamp = buf;
  }
  Json j;
  j["digest"] = r.digest;
  j["purpose_tag"] = r.purpose_tag;
  j["timestamp"] = r.timestamp;
  j["response_text"] = r.response_text;
  std::lock_guard lock(write_mutex_);
  std::filesystem::create_directories(dir_);
  write_file_atomic(path_for(r.digest), j.dump(2) + "\n");
}

std::size_t TranscriptStore::size() const {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir_, ec)) return 0;
  std::size_t n = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir_)) {
    if (e.path().extension() == ".json") ++n;
  }
  return n;
}

}  // namespace slidetailor::gateway
