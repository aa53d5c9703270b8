#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace slidetailor {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, std::string_view data);
/// Writes through a sibling temp file and renames, so readers never see a
/// partial file.
void write_file_atomic(const fs::path& path, std::string_view data);

std::string sha256_hex(std::string_view data);
std::string base64_encode(std::string_view data);

/// Trim, collapse internal whitespace runs to one space, ASCII casefold.
std::string canonicalize_label(std::string_view text);
std::string trim(std::string_view text);
std::vector<std::string> split_lines(std::string_view text);

struct ProcessResult {
  int exit_code = -1;
  std::string stdout_text;
  std::string stderr_text;
};

/// Runs `argv[0]` with arguments, without a shell. Returns exit code 127 when
/// the program cannot be executed.
ProcessResult run_process(const std::vector<std::string>& argv);

/// Runs a user-configured command string through /bin/sh with extra
/// positional arguments appended as "$1" "$2" ..., quoted safely.
ProcessResult run_shell_command(const std::string& command,
                                const std::vector<std::string>& args);

struct ImageInfo {
  std::string format;  // "png" or "jpeg"
  std::uint32_t width = 0;
  std::uint32_t height = 0;
};

/// Reads dimensions from PNG or JPEG bytes. Returns false for anything else.
bool probe_image(std::string_view bytes, ImageInfo& info);

}  // namespace slidetailor
