#include "usv/imu.hpp"

#include <cmath>

namespace usv {

bool ImuSample::finite() const {
  for (int i = 0; i < kImuChannels; ++i) {
    if (!std::isfinite(axis(i))) return false;
  }
  return true;
}

const char* to_string(ImpactLabel label) {
  switch (label) {
    case ImpactLabel::Bow:
      return "Bow";
    case ImpactLabel::Port:
      return "Port";
    case ImpactLabel::Starboard:
      return "Starboard";
    case ImpactLabel::None:
      return "None";
  }
  return "?";
}

std::optional<ImpactLabel> label_from_string(const std::string& name) {
  for (int i = 0; i < kNumLabels; ++i) {
    const auto l = label_from_index(i);
    if (name == to_string(l)) return l;
  }
  return std::nullopt;
}

}  // namespace usv
