#include "usv/png.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <zlib.h>

#include "usv/error.hpp"

namespace usv {
namespace {

void put_u32be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_chunk(std::vector<std::uint8_t>& out, const char type[4],
               std::span<const std::uint8_t> data) {
  put_u32be(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t type_at = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const uLong crc =
      crc32(0L, out.data() + type_at, static_cast<uInt>(4 + data.size()));
  put_u32be(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

std::vector<std::uint8_t> encode_png_rgb(int width, int height,
                                         std::span<const std::uint8_t> rgb) {
  const std::size_t row_bytes = static_cast<std::size_t>(width) * 3;
  if (width < 1 || height < 1 || rgb.size() != row_bytes * static_cast<std::size_t>(height)) {
    throw ContractViolation("encode_png_rgb: buffer size mismatch");
  }

  // Raw scanline stream: filter byte 0 per row.
  std::vector<std::uint8_t> raw;
  raw.reserve((row_bytes + 1) * static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    raw.push_back(0);
    const std::uint8_t* row = rgb.data() + static_cast<std::size_t>(y) * row_bytes;
    raw.insert(raw.end(), row, row + row_bytes);
  }

  // zlib stream with stored (uncompressed) deflate blocks: byte-deterministic
  // regardless of the zlib version, which keeps golden-file tests stable.
  std::vector<std::uint8_t> z;
  z.push_back(0x78);
  z.push_back(0x01);
  std::size_t off = 0;
  while (off < raw.size()) {
    const std::size_t blk = std::min<std::size_t>(65535, raw.size() - off);
    const bool final = off + blk == raw.size();
    z.push_back(final ? 0x01 : 0x00);
    z.push_back(static_cast<std::uint8_t>(blk & 0xff));
    z.push_back(static_cast<std::uint8_t>(blk >> 8));
    z.push_back(static_cast<std::uint8_t>(~blk & 0xff));
    z.push_back(static_cast<std::uint8_t>((~blk >> 8) & 0xff));
    z.insert(z.end(), raw.begin() + static_cast<std::ptrdiff_t>(off),
             raw.begin() + static_cast<std::ptrdiff_t>(off + blk));
    off += blk;
  }
  const uLong adler = adler32(adler32(0L, nullptr, 0), raw.data(), static_cast<uInt>(raw.size()));
  put_u32be(z, static_cast<std::uint32_t>(adler));

  std::vector<std::uint8_t> png = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  std::vector<std::uint8_t> ihdr;
  put_u32be(ihdr, static_cast<std::uint32_t>(width));
  put_u32be(ihdr, static_cast<std::uint32_t>(height));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // truecolor
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // no interlace
  put_chunk(png, "IHDR", ihdr);
  put_chunk(png, "IDAT", z);
  put_chunk(png, "IEND", {});
  return png;
}

void write_png_rgb(const std::string& path, int width, int height,
                   std::span<const std::uint8_t> rgb) {
  const auto bytes = encode_png_rgb(width, height, rgb);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write: " + path);
}

void render_channel_png(const Scalogram& s, int channel, const std::string& path) {
  if (channel < 0 || channel >= Scalogram::kChannels) {
    throw ContractViolation("channel out of range");
  }
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(Scalogram::kWidth) *
                                Scalogram::kHeight * 3);
  std::size_t i = 0;
  for (int y = 0; y < Scalogram::kHeight; ++y) {
    const int row = Scalogram::kHeight - 1 - y;  // frequency increases upward
    for (int x = 0; x < Scalogram::kWidth; ++x) {
      const float v = std::min(1.0f, std::max(0.0f, s.at(channel, row, x)));
      const auto g = static_cast<std::uint8_t>(std::lround(255.0f * v));
      rgb[i++] = g;
      rgb[i++] = g;
      rgb[i++] = g;
    }
  }
  write_png_rgb(path, Scalogram::kWidth, Scalogram::kHeight, rgb);
}

}  // namespace usv
