#include "usv/synth.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "usv/error.hpp"
#include "usv/rng.hpp"
#include "usv/windowing.hpp"

namespace usv {
namespace {

// One second-order low-pass section (RBJ biquad), direct form 2 transposed.
class Biquad {
 public:
  Biquad(double fc, double fs, double q) {
    const double w0 = 2.0 * M_PI * fc / fs;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double c = std::cos(w0);
    const double a0 = 1.0 + alpha;
    b0_ = (1.0 - c) / 2.0 / a0;
    b1_ = (1.0 - c) / a0;
    b2_ = b0_;
    a1_ = -2.0 * c / a0;
    a2_ = (1.0 - alpha) / a0;
  }

  double step(double x) {
    const double y = b0_ * x + z1_;
    z1_ = b1_ * x - a1_ * y + z2_;
    z2_ = b2_ * x - a2_ * y;
    return y;
  }

 private:
  double b0_, b1_, b2_, a1_, a2_;
  double z1_ = 0.0, z2_ = 0.0;
};

// 4th-order Butterworth low-pass at fc: two cascaded biquads with the
// standard section Q values.
class LowPass4 {
 public:
  LowPass4(double fc, double fs) : s1_(fc, fs, 0.54119610), s2_(fc, fs, 1.30656296) {}
  double step(double x) { return s2_.step(s1_.step(x)); }

 private:
  Biquad s1_, s2_;
};

constexpr double kNoiseBandHz = 10.0;

}  // namespace

void ImpactScenario::validate() const {
  if (!(carrier_hz > 0.0 && carrier_hz < 10.0)) {
    throw ContractViolation("carrier_hz must lie in (0, 10)");
  }
  if (!(amplitude >= 0.0)) throw ContractViolation("amplitude must be >= 0");
  if (!(duration_s >= 5.0)) throw ContractViolation("duration_s must be >= 5");
  if (!(decay_s > 0.0)) throw ContractViolation("decay_s must be > 0");
  if (!(sea_state_sigma >= 0.0)) throw ContractViolation("sea_state_sigma must be >= 0");
  if (label != ImpactLabel::None && !(impact_t_s >= 0.0 && impact_t_s < duration_s)) {
    throw ContractViolation("impact_t_s must lie inside the stream");
  }
}

Voyage synthesize_voyage(const ImpactScenario& sc) {
  sc.validate();
  const std::size_t n = static_cast<std::size_t>(std::llround(sc.duration_s * kRateHz));

  Voyage v;
  v.samples.resize(n);

  GaussianRng rng(sc.rng_seed);
  std::array<LowPass4, kImuChannels> shapers{
      LowPass4(kNoiseBandHz, kRateHz), LowPass4(kNoiseBandHz, kRateHz),
      LowPass4(kNoiseBandHz, kRateHz), LowPass4(kNoiseBandHz, kRateHz),
      LowPass4(kNoiseBandHz, kRateHz), LowPass4(kNoiseBandHz, kRateHz)};

  const bool impact = sc.label != ImpactLabel::None && sc.amplitude > 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    ImuSample& s = v.samples[i];
    s.t_ns = static_cast<std::int64_t>(i) * kSamplePeriodNs;

    if (sc.sea_state_sigma > 0.0) {
      for (int c = 0; c < kImuChannels; ++c) {
        const double sigma = c < 3 ? sc.sea_state_sigma : kAngNoiseRatio * sc.sea_state_sigma;
        s.axis(c) = shapers[static_cast<std::size_t>(c)].step(sigma * rng.normal());
      }
    }

    if (impact) {
      const double tau = static_cast<double>(i) / kRateHz - sc.impact_t_s;
      if (tau >= 0.0) {
        // Decaying oscillation whose peak sits on the impact sample itself.
        const double g = sc.amplitude * std::exp(-tau / sc.decay_s) *
                         std::cos(2.0 * M_PI * sc.carrier_hz * tau);
        switch (sc.label) {
          case ImpactLabel::Bow:
            s.lin_acc[0] -= g;
            break;
          case ImpactLabel::Port:
            s.lin_acc[1] += g;
            s.ang_vel[0] += kRollCoupling * g;
            break;
          case ImpactLabel::Starboard:
            s.lin_acc[1] -= g;
            s.ang_vel[0] -= kRollCoupling * g;
            break;
          case ImpactLabel::None:
            break;
        }
      }
    }
  }

  const std::uint64_t n_windows = expected_window_count(n);
  v.window_labels.assign(n_windows, ImpactLabel::None);
  if (sc.label != ImpactLabel::None) {
    for (std::uint64_t k = 0; k < n_windows; ++k) {
      const double w_start = static_cast<double>(k) * kWindowOffsetSeconds;
      if (sc.impact_t_s >= w_start && sc.impact_t_s < w_start + kWindowSeconds) {
        v.window_labels[k] = sc.label;
      }
    }
  }
  return v;
}

ImpactScenario scenario_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario JSON: ") + e.what(), 1);
  }
  ImpactScenario sc;
  try {
    const auto name = j.at("label").get<std::string>();
    const auto label = label_from_string(name);
    if (!label) throw ContractViolation("unknown label '" + name + "'");
    sc.label = *label;
    if (j.contains("impact_t_s")) sc.impact_t_s = j.at("impact_t_s").get<double>();
    if (j.contains("amplitude")) sc.amplitude = j.at("amplitude").get<double>();
    if (j.contains("decay_s")) sc.decay_s = j.at("decay_s").get<double>();
    if (j.contains("carrier_hz")) sc.carrier_hz = j.at("carrier_hz").get<double>();
    if (j.contains("sea_state_sigma")) sc.sea_state_sigma = j.at("sea_state_sigma").get<double>();
    if (j.contains("duration_s")) sc.duration_s = j.at("duration_s").get<double>();
    if (j.contains("rng_seed")) sc.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario JSON: ") + e.what(), 1);
  }
  sc.validate();
  return sc;
}

ImpactScenario scenario_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json_text(ss.str());
}

std::string scenario_to_json_text(const ImpactScenario& s) {
  nlohmann::json j{{"label", to_string(s.label)},
                   {"impact_t_s", s.impact_t_s},
                   {"amplitude", s.amplitude},
                   {"decay_s", s.decay_s},
                   {"carrier_hz", s.carrier_hz},
                   {"sea_state_sigma", s.sea_state_sigma},
                   {"duration_s", s.duration_s},
                   {"rng_seed", s.rng_seed}};
  return j.dump(2);
}

}  // namespace usv
