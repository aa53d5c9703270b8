// Stand-in slide renderer for tests: `fixture_render <deck.pptx> <out_dir>`
// writes out_dir/slide-<i>.png, one flat image per slide whose colors are a
// function of the slide's shapes and text, so equal decks give equal bytes.

#include <zlib.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "slidetailor/deck/deck.hpp"
#include "slidetailor/util.hpp"

namespace fs = std::filesystem;
using namespace slidetailor;

namespace {

void put32(std::string& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out += static_cast<char>((v >> s) & 0xFF);
}

void chunk(std::string& out, const char* type, const std::string& data) {
  put32(out, static_cast<std::uint32_t>(data.size()));
  std::string body = std::string(type, 4) + data;
  out += body;
  put32(out, static_cast<std::uint32_t>(crc32(0, reinterpret_cast<const Bytef*>(body.data()),
                                              static_cast<uInt>(body.size()))));
}

std::string encode_png(int w, int h, const std::vector<std::uint8_t>& rgb) {
  std::string raw;
  for (int y = 0; y < h; ++y) {
    raw += '\0';
    raw.append(reinterpret_cast<const char*>(&rgb[static_cast<std::size_t>(y * w * 3)]), static_cast<std::size_t>(w * 3));
  }
  uLongf len = compressBound(static_cast<uLong>(raw.size()));
  std::string z(len, '\0');
  compress2(reinterpret_cast<Bytef*>(z.data()), &len, reinterpret_cast<const Bytef*>(raw.data()),
            static_cast<uLong>(raw.size()), 9);
  z.resize(len);
  std::string ihdr;
  put32(ihdr, static_cast<std::uint32_t>(w));
  put32(ihdr, static_cast<std::uint32_t>(h));
  ihdr += std::string("\x08\x02\x00\x00\x00", 5);
  std::string out("\x89PNG\r\n\x1a\n", 8);
  chunk(out, "IHDR", ihdr);
  chunk(out, "IDAT", z);
  chunk(out, "IEND", "");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: fixture_render <deck.pptx> <out_dir>\n");
    return 2;
  }
  try {
    auto deck = deck::parse_deck_file(argv[1]);
    fs::create_directories(argv[2]);
    const int w = 64, h = 36;
    for (std::size_t i = 0; i < deck.slides.size(); ++i) {
      const auto& slide = deck.slides[i];
      auto digest = sha256_hex(slide.text() + "|" + std::to_string(slide.shapes.size()));
      auto byte = [&](int k) { return static_cast<std::uint8_t>(std::stoi(digest.substr(static_cast<std::size_t>(k) * 2, 2), nullptr, 16)); };
      std::vector<std::uint8_t> rgb(static_cast<std::size_t>(w * h * 3));
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          // One band per shape across a background color.
          int band = static_cast<int>(slide.shapes.size()) > 0 ? y * static_cast<int>(slide.shapes.size()) / h : 0;
          bool ink = (x + band * 7) % 16 < 10 && band % 2 == 1;
          auto* px = &rgb[static_cast<std::size_t>((y * w + x) * 3)];
          px[0] = ink ? byte(3) : byte(0);
          px[1] = ink ? byte(4) : byte(1);
          px[2] = ink ? byte(5) : byte(2);
        }
      }
      write_file(fs::path(argv[2]) / ("slide-" + std::to_string(i + 1) + ".png"), encode_png(w, h, rgb));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fixture_render: %s\n", e.what());
    return 1;
  }
  return 0;
}
