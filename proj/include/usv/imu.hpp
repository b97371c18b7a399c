#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace usv {

inline constexpr int kRateHz = 100;
inline constexpr int kWindowSeconds = 5;
inline constexpr int kWindowOffsetSeconds = 3;
inline constexpr int kWindowSamples = kWindowSeconds * kRateHz;          // 500
inline constexpr int kWindowStrideSamples = kWindowOffsetSeconds * kRateHz;  // 300
inline constexpr std::int64_t kSamplePeriodNs = 1'000'000'000LL / kRateHz;

// One 6-axis proprioceptive reading: lin_acc in m/s^2, ang_vel in rad/s.
struct ImuSample {
  std::int64_t t_ns = 0;
  std::array<double, 3> lin_acc{};
  std::array<double, 3> ang_vel{};

  // Channels 0..2 = lin_acc xyz, 3..5 = ang_vel xyz.
  double axis(int i) const { return i < 3 ? lin_acc[i] : ang_vel[i - 3]; }
  double& axis(int i) { return i < 3 ? lin_acc[i] : ang_vel[i - 3]; }
  bool finite() const;

  bool operator==(const ImuSample&) const = default;
};

inline constexpr int kImuChannels = 6;

// Impact classification target. The integer encoding is stable across all
// modules and file formats.
enum class ImpactLabel : int { Bow = 0, Port = 1, Starboard = 2, None = 3 };
inline constexpr int kNumLabels = 4;

const char* to_string(ImpactLabel label);
std::optional<ImpactLabel> label_from_string(const std::string& name);
inline ImpactLabel label_from_index(int i) { return static_cast<ImpactLabel>(i); }
inline int label_index(ImpactLabel l) { return static_cast<int>(l); }

// Fixed-length slice of one device's stream; the unit of transport and
// classification.
struct SampleWindow {
  std::uint32_t device_id = 0;
  std::uint64_t window_seq = 0;
  std::int64_t start_t_ns = 0;
  std::uint16_t rate_hz = kRateHz;
  std::vector<ImuSample> samples;
};

}  // namespace usv
