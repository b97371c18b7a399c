#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "usv/cwt.hpp"
#include "usv/digest.hpp"
#include "usv/error.hpp"
#include "usv/png.hpp"
#include "usv/rng.hpp"
#include "usv/scalogram.hpp"
#include "usv/synth.hpp"
#include "usv/windowing.hpp"

using namespace usv;

namespace {

// Independent oracle: the defining zero-padded direct summation, evaluated
// term by term with no FFT machinery.
CwtMatrix brute_cwt(std::span<const double> x, const FrequencyGrid& g, double rate) {
  const int n = static_cast<int>(x.size());
  CwtMatrix m(g.n_bins, n);
  for (int k = 0; k < g.n_bins; ++k) {
    const double f = g.frequency(k);
    const double s = kMorletOmega0 * rate / (2.0 * M_PI * f);
    const double norm = std::pow(M_PI, -0.25) / std::sqrt(s);
    for (int nn = 0; nn < n; ++nn) {
      double re = 0.0, im = 0.0;
      for (int mm = 0; mm < n; ++mm) {
        const double t = (mm - nn) / s;
        const double env = norm * std::exp(-0.5 * t * t);
        re += x[static_cast<std::size_t>(mm)] * env * std::cos(kMorletOmega0 * t);
        im -= x[static_cast<std::size_t>(mm)] * env * std::sin(kMorletOmega0 * t);
      }
      m.at(k, nn) = std::hypot(re, im);
    }
  }
  return m;
}

std::vector<double> channel_signal(const std::vector<ImuSample>& samples, int c) {
  std::vector<double> x(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) x[i] = samples[i].axis(c);
  return x;
}

// Decodes the stored-deflate PNGs this project writes (filter 0, RGB8).
struct DecodedPng {
  int w = 0, h = 0;
  std::vector<std::uint8_t> rgb;
};

std::uint32_t be32(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | p[3];
}

DecodedPng decode_stored_png(const std::vector<std::uint8_t>& png) {
  DecodedPng out;
  REQUIRE(png.size() > 8);
  std::vector<std::uint8_t> idat;
  std::size_t pos = 8;
  while (pos + 8 <= png.size()) {
    const std::uint32_t len = be32(&png[pos]);
    const std::string type(reinterpret_cast<const char*>(&png[pos + 4]), 4);
    const std::uint8_t* data = &png[pos + 8];
    if (type == "IHDR") {
      out.w = static_cast<int>(be32(data));
      out.h = static_cast<int>(be32(data + 4));
      REQUIRE(data[8] == 8);
      REQUIRE(data[9] == 2);
    } else if (type == "IDAT") {
      idat.insert(idat.end(), data, data + len);
    }
    pos += 12 + len;
  }
  // Strip the zlib wrapper and reassemble stored blocks.
  std::vector<std::uint8_t> raw;
  std::size_t zp = 2;
  while (zp < idat.size() - 4) {
    const std::uint8_t hdr = idat[zp];
    const std::size_t blen = idat[zp + 1] | (static_cast<std::size_t>(idat[zp + 2]) << 8);
    REQUIRE((hdr & 0x06) == 0);  // stored block
    raw.insert(raw.end(), idat.begin() + static_cast<std::ptrdiff_t>(zp + 5),
               idat.begin() + static_cast<std::ptrdiff_t>(zp + 5 + blen));
    zp += 5 + blen;
    if (hdr & 0x01) break;
  }
  const std::size_t row_bytes = static_cast<std::size_t>(out.w) * 3;
  REQUIRE(raw.size() == (row_bytes + 1) * static_cast<std::size_t>(out.h));
  for (int y = 0; y < out.h; ++y) {
    const std::uint8_t* row = raw.data() + static_cast<std::size_t>(y) * (row_bytes + 1);
    REQUIRE(row[0] == 0);
    out.rgb.insert(out.rgb.end(), row + 1, row + 1 + row_bytes);
  }
  return out;
}

}  // namespace

TEST_CASE("zero signal transforms to exact zeros") {
  const auto grid = FrequencyGrid::make(12, 0.5, 9.0);
  MorletCwt cwt(grid, kRateHz, 200);
  const std::vector<double> x(200, 0.0);
  const auto m = cwt.transform(x);
  for (const double v : m.v) CHECK(v == 0.0);
}

TEST_CASE("production transform matches the brute-force oracle") {
  const auto grid = FrequencyGrid::make(10, 0.5, 9.5);
  MorletCwt cwt(grid, kRateHz, 50);
  GaussianRng rng(41);
  for (int trial = 0; trial < 12; ++trial) {
    std::vector<double> x(50);
    for (auto& v : x) v = 3.0 * rng.normal();
    const auto prod = cwt.transform(x);
    const auto ref = brute_cwt(x, grid, kRateHz);
    double max_abs = 0.0;
    for (std::size_t i = 0; i < prod.v.size(); ++i) {
      max_abs = std::max(max_abs, std::abs(prod.v[i] - ref.v[i]));
    }
    CHECK(max_abs < 1e-6);
  }
}

TEST_CASE("unit impulse concentrates every row at the impulse column") {
  const auto grid = FrequencyGrid::standard();
  MorletCwt cwt(grid, kRateHz, kWindowSamples);
  std::vector<double> x(kWindowSamples, 0.0);
  x[250] = 1.0;
  const auto m = cwt.transform(x);
  for (int k = 0; k < m.rows; ++k) {
    int argmax = 0;
    for (int c = 1; c < m.cols; ++c) {
      if (m.at(k, c) > m.at(k, argmax)) argmax = c;
    }
    CHECK(argmax == 250);
  }
}

TEST_CASE("sinusoid peak bin agrees with the oracle argmax") {
  const auto grid = FrequencyGrid::standard();
  MorletCwt cwt(grid, kRateHz, kWindowSamples);
  GaussianRng rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const double f = rng.uniform_in(0.5, 9.5);
    std::vector<double> x(kWindowSamples);
    for (int i = 0; i < kWindowSamples; ++i) {
      x[static_cast<std::size_t>(i)] = std::sin(2.0 * M_PI * f * i / kRateHz);
    }
    const auto prod = cwt.transform(x);
    const auto ref = brute_cwt(x, grid, kRateHz);
    const int center = kWindowSamples / 2;
    int prod_arg = 0, ref_arg = 0;
    for (int k = 1; k < grid.n_bins; ++k) {
      if (prod.at(k, center) > prod.at(prod_arg, center)) prod_arg = k;
      if (ref.at(k, center) > ref.at(ref_arg, center)) ref_arg = k;
    }
    CHECK(prod_arg == ref_arg);
    CHECK(std::abs(prod_arg - grid.nearest_bin(f)) <= 1);
  }
}

TEST_CASE("magnitude is 1-homogeneous in the input") {
  const auto grid = FrequencyGrid::make(20, 0.5, 9.0);
  MorletCwt cwt(grid, kRateHz, 120);
  GaussianRng rng(5);
  std::vector<double> x(120), xs(120);
  for (auto& v : x) v = rng.normal();
  const double alpha = -2.75;
  for (std::size_t i = 0; i < x.size(); ++i) xs[i] = alpha * x[i];
  const auto a = cwt.transform(x);
  const auto b = cwt.transform(xs);
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    if (a.v[i] > 1e-12) {
      CHECK(b.v[i] / a.v[i] == doctest::Approx(std::abs(alpha)).epsilon(1e-9));
    }
  }
}

TEST_CASE("interior impulse shift moves every row argmax by the shift") {
  const auto grid = FrequencyGrid::make(8, 2.0, 9.0);
  MorletCwt cwt(grid, kRateHz, kWindowSamples);
  std::vector<double> x(kWindowSamples, 0.0);
  x[220] = 1.0;
  std::vector<double> y(kWindowSamples, 0.0);
  y[220 + 37] = 1.0;
  const auto mx = cwt.transform(x);
  const auto my = cwt.transform(y);
  for (int k = 0; k < mx.rows; ++k) {
    int ax = 0, ay = 0;
    for (int c = 1; c < mx.cols; ++c) {
      if (mx.at(k, c) > mx.at(k, ax)) ax = c;
      if (my.at(k, c) > my.at(k, ay)) ay = c;
    }
    CHECK(ay - ax == 37);
  }
}

TEST_CASE("transform rejects bad input") {
  MorletCwt cwt(FrequencyGrid::make(4, 1.0, 8.0), kRateHz, 50);
  std::vector<double> wrong(49, 0.0);
  CHECK_THROWS_AS(cwt.transform(wrong), ContractViolation);
  std::vector<double> nan(50, 0.0);
  nan[7] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(cwt.transform(nan), ContractViolation);
  CHECK_THROWS_AS(FrequencyGrid::make(1, 1.0, 8.0), ContractViolation);
  CHECK_THROWS_AS(MorletCwt(FrequencyGrid::make(4, 1.0, 60.0), kRateHz, 50),
                  ContractViolation);
}

TEST_CASE("column pooling averages hand-computed ranges") {
  // Boundaries for 500 -> 192 start 0, 3, 5, 8: range 1 is [3, 5).
  CwtMatrix m(1, 500);
  m.at(0, 3) = 2.0;
  m.at(0, 4) = 4.0;
  const auto pooled = pool_columns(m, 192);
  CHECK(pooled.cols == 192);
  CHECK(pooled.at(0, 0) == 0.0);
  CHECK(pooled.at(0, 1) == doctest::Approx(3.0));
  for (int j = 2; j < 192; ++j) CHECK(pooled.at(0, j) == 0.0);

  // Every pooling range must be non-empty and the edges must tile [0, 500).
  int total = 0;
  for (int j = 0; j < 192; ++j) {
    const int lo = static_cast<int>(std::llround(j * 500.0 / 192.0));
    const int hi = static_cast<int>(std::llround((j + 1) * 500.0 / 192.0));
    CHECK(hi > lo);
    total += hi - lo;
  }
  CHECK(total == 500);
}

TEST_CASE("constant positive channels normalize to exactly one") {
  std::array<CwtMatrix, 6> chans;
  for (auto& m : chans) {
    m = CwtMatrix(Scalogram::kHeight, 500);
    std::fill(m.v.begin(), m.v.end(), 0.37);
  }
  const auto s = to_scalogram(chans);
  for (const float v : s.v) CHECK(v == 1.0f);
}

TEST_CASE("all-zero channel stays all-zero, nonzero channels attain 1") {
  std::array<CwtMatrix, 6> chans;
  GaussianRng rng(3);
  for (std::size_t c = 0; c < 6; ++c) {
    chans[c] = CwtMatrix(Scalogram::kHeight, 500);
    if (c == 2) continue;  // leave channel 2 all-zero
    for (auto& v : chans[c].v) v = std::abs(rng.normal());
  }
  const auto s = to_scalogram(chans);
  for (int c = 0; c < 6; ++c) {
    float peak = 0.0f;
    for (int r = 0; r < Scalogram::kHeight; ++r) {
      for (int x = 0; x < Scalogram::kWidth; ++x) {
        const float v = s.at(c, r, x);
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
        peak = std::max(peak, v);
      }
    }
    if (c == 2) {
      CHECK(peak == 0.0f);
    } else {
      CHECK(peak == 1.0f);
    }
  }
}

TEST_CASE("scalogram binary fixture round trip preserves bytes and digest") {
  std::array<CwtMatrix, 6> chans;
  GaussianRng rng(11);
  for (auto& m : chans) {
    m = CwtMatrix(Scalogram::kHeight, 500);
    for (auto& v : m.v) v = std::abs(rng.normal());
  }
  const auto s = to_scalogram(chans);
  const auto path = std::filesystem::temp_directory_path() / "usv_test.scg";
  save_scg(path.string(), s);
  const auto back = load_scg(path.string());
  CHECK(back.v == s.v);
  CHECK(scalogram_digest(back) == scalogram_digest(s));
  CHECK(scalogram_digest(s).size() == 64);
  std::filesystem::remove(path);

  // Truncated file is rejected.
  const auto bytes = scg_bytes(s);
  const auto bad = std::filesystem::temp_directory_path() / "usv_test_bad.scg";
  std::ofstream out(bad, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size() / 2));
  out.close();
  CHECK_THROWS_AS(load_scg(bad.string()), ParseError);
  std::filesystem::remove(bad);
}

TEST_CASE("png rendering maps zero to black and one to white, bottom-up") {
  Scalogram s;
  s.at(1, 0, 5) = 1.0f;  // lowest frequency row -> bottom image row
  const auto path = std::filesystem::temp_directory_path() / "usv_test.png";
  render_channel_png(s, 1, path.string());
  std::ifstream in(path, std::ios::binary);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  const auto img = decode_stored_png(bytes);
  CHECK(img.w == Scalogram::kWidth);
  CHECK(img.h == Scalogram::kHeight);
  const std::size_t bottom_row = static_cast<std::size_t>(img.h - 1) * img.w * 3;
  CHECK(img.rgb[bottom_row + 5 * 3] == 255);
  CHECK(img.rgb[bottom_row + 5 * 3 + 1] == 255);
  CHECK(img.rgb[bottom_row + 5 * 3 + 2] == 255);
  std::size_t nonzero = 0;
  for (const auto b : img.rgb) nonzero += b != 0;
  CHECK(nonzero == 3);  // everything else black
  std::filesystem::remove(path);

  CHECK_THROWS_AS(render_channel_png(s, 6, "/tmp/nope.png"), ContractViolation);
}

TEST_CASE("fixture scalogram renders byte-identical to the golden image") {
  // Deterministic fixture: seeded Bow impact window through the real path.
  ImpactScenario sc;
  sc.label = ImpactLabel::Bow;
  sc.impact_t_s = 2.5;
  sc.sea_state_sigma = 0.3;
  sc.duration_s = 5.0;
  sc.rng_seed = 2024;
  const auto v = synthesize_voyage(sc);
  const auto grid = FrequencyGrid::standard();
  MorletCwt cwt(grid, kRateHz, kWindowSamples);
  std::array<CwtMatrix, 6> chans;
  for (int c = 0; c < 6; ++c) chans[static_cast<std::size_t>(c)] = cwt.transform(channel_signal(v.samples, c));
  const auto s = to_scalogram(chans);

  const auto tmp = std::filesystem::temp_directory_path() / "usv_golden_check.png";
  render_channel_png(s, 0, tmp.string());
  std::ifstream in(tmp, std::ios::binary);
  std::vector<char> got((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::filesystem::remove(tmp);

  const std::filesystem::path golden = std::filesystem::path(USV_TESTS_DATA_DIR) /
                                       "golden_scalogram_ch0.png";
  if (std::getenv("USV_UPDATE_GOLDEN") != nullptr) {
    std::ofstream out(golden, std::ios::binary);
    out.write(got.data(), static_cast<std::streamsize>(got.size()));
    MESSAGE("golden file regenerated");
    return;
  }
  REQUIRE(std::filesystem::exists(golden));
  std::ifstream gin(golden, std::ios::binary);
  std::vector<char> want((std::istreambuf_iterator<char>(gin)), std::istreambuf_iterator<char>());
  CHECK(got == want);
}
