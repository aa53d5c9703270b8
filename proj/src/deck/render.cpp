#include <filesystem>

#include "slidetailor/deck/deck.hpp"
#include "slidetailor/error.hpp"
#include "slidetailor/util.hpp"

namespace slidetailor::deck {

namespace {

std::vector<fs::path> expected_images(const fs::path& dir, std::size_t count, const std::string& origin) {
  std::vector<fs::path> out;
  for (std::size_t i = 1; i <= count; ++i) {
    auto p = dir / ("slide-" + std::to_string(i) + ".png");
    if (!fs::is_regular_file(p)) {
      throw Error(Errc::RendererFailed, origin + " produced no " + p.filename().string() + " for a " +
                                            std::to_string(count) + "-slide deck");
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace

std::vector<fs::path> render_slides(std::string_view deck_bytes, const RenderOptions& options,
                                    const fs::path& work_dir) {
  std::size_t count = parse_deck(deck_bytes).slides.size();

  if (!options.prerendered_dir.empty()) {
    return expected_images(options.prerendered_dir, count, "pre-rendered directory " + options.prerendered_dir.string());
  }
  if (options.command.empty()) {
    throw Error(Errc::RendererUnavailable, "no renderer command configured and no pre-rendered directory supplied");
  }

  fs::create_directories(work_dir);
  auto pptx = work_dir / "deck.pptx";
  auto out_dir = work_dir / "render";
  fs::remove_all(out_dir);
  fs::create_directories(out_dir);
  write_file(pptx, deck_bytes);

  auto result = run_shell_command(options.command, {pptx.string(), out_dir.string()});
  if (result.exit_code == 127) {
    throw Error(Errc::RendererUnavailable, "renderer command could not be run: " + result.stderr_text);
  }
  if (result.exit_code != 0) {
    throw Error(Errc::RendererFailed,
                "renderer exited with status " + std::to_string(result.exit_code) + ": " + result.stderr_text);
  }
  return expected_images(out_dir, count, "renderer");
}

}  // namespace slidetailor::deck
