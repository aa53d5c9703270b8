#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace slidetailor::deck {

struct ZipEntry {
  std::string name;
  std::string data;
};

/// Reads every file entry of a zip archive (stored or deflated). Throws
/// Errc::NotAZip for anything that is not a readable archive.
std::vector<ZipEntry> read_zip(std::string_view bytes);

/// Writes a deflated archive with entries in the given order. Timestamps are
/// pinned to 1980-01-01 00:00 so equal inputs give byte-identical output.
std::string write_zip(const std::vector<ZipEntry>& entries);

}  // namespace slidetailor::deck
