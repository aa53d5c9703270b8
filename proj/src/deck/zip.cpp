#include "slidetailor/deck/zip.hpp"

#include <zlib.h>

#include <cstdint>

#include "slidetailor/error.hpp"

namespace slidetailor::deck {

namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;
constexpr std::uint16_t kDosDate1980 = (0 << 9) | (1 << 5) | 1;

std::uint16_t le16(std::string_view b, std::size_t at) {
  if (at + 2 > b.size()) throw Error(Errc::NotAZip, "truncated archive");
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    (static_cast<unsigned char>(b[at + 1]) << 8));
}

std::uint32_t le32(std::string_view b, std::size_t at) {
  return static_cast<std::uint32_t>(le16(b, at)) | (static_cast<std::uint32_t>(le16(b, at + 2)) << 16);
}

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& out, std::uint32_t v) {
  put16(out, static_cast<std::uint16_t>(v & 0xFFFF));
  put16(out, static_cast<std::uint16_t>(v >> 16));
}

std::string inflate_raw(std::string_view in, std::size_t expected) {
  std::string out(expected, '\0');
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw Error(Errc::NotAZip, "inflateInit failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || zs.total_out != expected) throw Error(Errc::NotAZip, "corrupt deflate stream");
  return out;
}

std::string deflate_raw(std::string_view in) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw Error(Errc::IoError, "deflateInit failed");
  }
  std::string out(deflateBound(&zs, static_cast<uLong>(in.size())), '\0');
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  int rc = deflate(&zs, Z_FINISH);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw Error(Errc::IoError, "deflate failed");
  out.resize(zs.total_out);
  return out;
}

}  // namespace

std::vector<ZipEntry> read_zip(std::string_view bytes) {
  if (bytes.size() < 22) throw Error(Errc::NotAZip, "input too small to be a zip archive");
  std::size_t eocd = std::string_view::npos;
  std::size_t lowest = bytes.size() > 22 + 0xFFFF ? bytes.size() - 22 - 0xFFFF : 0;
  for (std::size_t pos = bytes.size() - 22 + 1; pos-- > lowest;) {
    if (le32(bytes, pos) == kEndSig) {
      eocd = pos;
      break;
    }
  }
  if (eocd == std::string_view::npos) throw Error(Errc::NotAZip, "end of central directory not found");

  std::uint16_t count = le16(bytes, eocd + 10);
  std::size_t cd = le32(bytes, eocd + 16);
  std::vector<ZipEntry> entries;
  entries.reserve(count);
  for (std::uint16_t i = 0; i < count; ++i) {
    if (le32(bytes, cd) != kCentralSig) throw Error(Errc::NotAZip, "bad central directory entry");
    std::uint16_t method = le16(bytes, cd + 10);
    std::uint32_t crc = le32(bytes, cd + 16);
    std::uint32_t csize = le32(bytes, cd + 20);
    std::uint32_t usize = le32(bytes, cd + 24);
    std::uint16_t nlen = le16(bytes, cd + 28);
    std::uint16_t xlen = le16(bytes, cd + 30);
    std::uint16_t clen = le16(bytes, cd + 32);
    std::size_t local = le32(bytes, cd + 42);
    if (cd + 46 + nlen > bytes.size()) throw Error(Errc::NotAZip, "truncated central directory");
    std::string name(bytes.substr(cd + 46, nlen));
    cd += 46 + nlen + xlen + clen;
    if (csize == 0xFFFFFFFF || usize == 0xFFFFFFFF) throw Error(Errc::NotAZip, "zip64 archives are not supported");

    if (le32(bytes, local) != kLocalSig) throw Error(Errc::NotAZip, "bad local header for " + name);
    std::size_t data = local + 30 + le16(bytes, local + 26) + le16(bytes, local + 28);
    if (data + csize > bytes.size()) throw Error(Errc::NotAZip, "truncated data for " + name);
    if (!name.empty() && name.back() == '/') continue;

    auto raw = bytes.substr(data, csize);
    std::string content;
    if (method == 0) {
      content.assign(raw);
    } else if (method == 8) {
      content = inflate_raw(raw, usize);
    } else {
      throw Error(Errc::NotAZip, "unsupported compression method for " + name);
    }
    auto actual = crc32(0L, reinterpret_cast<const Bytef*>(content.data()), static_cast<uInt>(content.size()));
    if (actual != crc) throw Error(Errc::NotAZip, "CRC mismatch for " + name);
    entries.push_back({std::move(name), std::move(content)});
  }
  return entries;
}

std::string write_zip(const std::vector<ZipEntry>& entries) {
  std::string out;
  std::string central;
  for (const auto& e : entries) {
    auto crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(e.data.data()), static_cast<uInt>(e.data.size())));
    std::string payload = e.data.empty() ? std::string() : deflate_raw(e.data);
    std::uint16_t method = e.data.empty() ? 0 : 8;
    auto offset = static_cast<std::uint32_t>(out.size());

    put32(out, kLocalSig);
    put16(out, 20);
    put16(out, 0);
    put16(out, method);
    put16(out, 0);
    put16(out, kDosDate1980);
    put32(out, crc);
    put32(out, static_cast<std::uint32_t>(payload.size()));
    put32(out, static_cast<std::uint32_t>(e.data.size()));
    put16(out, static_cast<std::uint16_t>(e.name.size()));
    put16(out, 0);
    out += e.name;
    out += payload;

    put32(central, kCentralSig);
    put16(central, 20);
    put16(central, 20);
    put16(central, 0);
    put16(central, method);
    put16(central, 0);
    put16(central, kDosDate1980);
    put32(central, crc);
    put32(central, static_cast<std::uint32_t>(payload.size()));
    put32(central, static_cast<std::uint32_t>(e.data.size()));
    put16(central, static_cast<std::uint16_t>(e.name.size()));
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put32(central, 0);
    put32(central, offset);
    central += e.name;
  }
  auto cd_offset = static_cast<std::uint32_t>(out.size());
  out += central;
  put32(out, kEndSig);
  put16(out, 0);
  put16(out, 0);
  put16(out, static_cast<std::uint16_t>(entries.size()));
  put16(out, static_cast<std::uint16_t>(entries.size()));
  put32(out, static_cast<std::uint32_t>(central.size()));
  put32(out, cd_offset);
  put16(out, 0);
  return out;
}

}  // namespace slidetailor::deck
