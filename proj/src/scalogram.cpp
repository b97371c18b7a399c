#include "usv/scalogram.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "usv/digest.hpp"
#include "usv/error.hpp"

namespace usv {

CwtMatrix pool_columns(const CwtMatrix& m, int out_cols) {
  if (out_cols < 1 || out_cols > m.cols) {
    throw ContractViolation("pool_columns: bad output width");
  }
  CwtMatrix out(m.rows, out_cols);
  for (int j = 0; j < out_cols; ++j) {
    const int lo = static_cast<int>(std::llround(static_cast<double>(j) * m.cols / out_cols));
    const int hi = static_cast<int>(std::llround(static_cast<double>(j + 1) * m.cols / out_cols));
    const double inv_w = 1.0 / (hi - lo);
    for (int r = 0; r < m.rows; ++r) {
      double acc = 0.0;
      for (int c = lo; c < hi; ++c) acc += m.at(r, c);
      out.at(r, j) = acc * inv_w;
    }
  }
  return out;
}

Scalogram to_scalogram(const std::array<CwtMatrix, Scalogram::kChannels>& channels) {
  for (const auto& m : channels) {
    if (m.rows != Scalogram::kHeight || m.cols != channels[0].cols || m.cols < Scalogram::kWidth) {
      throw ContractViolation("to_scalogram: channel shape mismatch");
    }
  }

  Scalogram s;
  for (int c = 0; c < Scalogram::kChannels; ++c) {
    const CwtMatrix pooled = pool_columns(channels[static_cast<std::size_t>(c)], Scalogram::kWidth);
    double peak = 0.0;
    for (const double x : pooled.v) peak = std::max(peak, x);
    if (peak <= 0.0) continue;  // all-zero channel stays all-zero
    const double inv = 1.0 / peak;
    for (int r = 0; r < Scalogram::kHeight; ++r) {
      for (int x = 0; x < Scalogram::kWidth; ++x) {
        s.at(c, r, x) = static_cast<float>(pooled.at(r, x) * inv);
      }
    }
  }
  return s;
}

namespace {

constexpr char kScgMagic[4] = {'S', 'C', 'G', '1'};

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

std::uint32_t get_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::vector<std::uint8_t> scg_bytes(const Scalogram& s) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + s.v.size() * 4);
  out.insert(out.end(), kScgMagic, kScgMagic + 4);
  put_u32le(out, Scalogram::kChannels);
  put_u32le(out, Scalogram::kHeight);
  put_u32le(out, Scalogram::kWidth);
  for (const float f : s.v) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32le(out, bits);
  }
  return out;
}

void save_scg(const std::string& path, const Scalogram& s) {
  const auto bytes = scg_bytes(s);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write scalogram file: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write: " + path);
}

Scalogram load_scg(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scalogram file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kScgMagic, 4) != 0) {
    throw ParseError("bad scalogram magic", 1);
  }
  const std::uint32_t c = get_u32le(bytes.data() + 4);
  const std::uint32_t h = get_u32le(bytes.data() + 8);
  const std::uint32_t w = get_u32le(bytes.data() + 12);
  if (c != Scalogram::kChannels || h != Scalogram::kHeight || w != Scalogram::kWidth) {
    throw ParseError("unexpected scalogram dimensions", 1);
  }
  const std::size_t n = static_cast<std::size_t>(c) * h * w;
  if (bytes.size() != 16 + n * 4) throw ParseError("truncated scalogram file", 1);

  Scalogram s;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t bits = get_u32le(bytes.data() + 16 + i * 4);
    std::memcpy(&s.v[i], &bits, 4);
  }
  return s;
}

std::string scalogram_digest(const Scalogram& s) { return sha256_hex(scg_bytes(s)); }

}  // namespace usv
