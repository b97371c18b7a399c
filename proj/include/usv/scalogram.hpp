#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "usv/cwt.hpp"

namespace usv {

// Fixed-size normalized CWT magnitude tensor, the classifier input.
// Channel order: lin_acc x,y,z then ang_vel x,y,z. Row 0 is the lowest
// frequency. Values lie in [0, 1].
struct Scalogram {
  static constexpr int kChannels = 6;
  static constexpr int kHeight = 150;
  static constexpr int kWidth = 192;

  std::vector<float> v;

  Scalogram() : v(static_cast<std::size_t>(kChannels) * kHeight * kWidth, 0.0f) {}

  float at(int c, int r, int x) const {
    return v[(static_cast<std::size_t>(c) * kHeight + static_cast<std::size_t>(r)) * kWidth +
             static_cast<std::size_t>(x)];
  }
  float& at(int c, int r, int x) {
    return v[(static_cast<std::size_t>(c) * kHeight + static_cast<std::size_t>(r)) * kWidth +
             static_cast<std::size_t>(x)];
  }
};

// Mean-pools matrix columns into out_cols equal-width ranges with boundaries
// at round(j * cols / out_cols).
CwtMatrix pool_columns(const CwtMatrix& m, int out_cols);

// Pools each channel's time axis to kWidth columns, then max-normalizes each
// channel independently (an all-zero channel stays all-zero).
Scalogram to_scalogram(const std::array<CwtMatrix, Scalogram::kChannels>& channels);

// Binary fixture format "SCG1": magic, u32 dims (channels, height, width,
// little-endian), then little-endian f32 data, channel-major then row-major.
std::vector<std::uint8_t> scg_bytes(const Scalogram& s);
void save_scg(const std::string& path, const Scalogram& s);
Scalogram load_scg(const std::string& path);

// SHA-256 hex digest of the SCG1 serialization.
std::string scalogram_digest(const Scalogram& s);

}  // namespace usv
