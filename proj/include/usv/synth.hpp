#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "usv/imu.hpp"

namespace usv {

// Parameterized synthetic voyage: shaped sea-state noise plus an optional
// impact transient. Stands in for the physical test basin.
struct ImpactScenario {
  ImpactLabel label = ImpactLabel::None;
  double impact_t_s = 2.5;      // seconds from stream start
  double amplitude = 8.0;       // m/s^2 peak
  double decay_s = 0.5;         // exponential decay constant
  double carrier_hz = 4.0;      // transient oscillation frequency, < 10 Hz
  double sea_state_sigma = 0.3; // std-dev of baseline motion noise, m/s^2
  double duration_s = 30.0;     // total stream length
  std::uint64_t rng_seed = 1;

  void validate() const;  // throws ContractViolation
};

ImpactScenario scenario_from_json_text(const std::string& text);
ImpactScenario scenario_from_json_file(const std::string& path);
std::string scenario_to_json_text(const ImpactScenario& s);

struct Voyage {
  std::vector<ImuSample> samples;
  // Ground truth per complete window: the scenario label iff impact_t_s lies
  // inside [k*offset, k*offset + window), else None.
  std::vector<ImpactLabel> window_labels;
};

// Pure function of the scenario (identical seeds give bit-identical streams).
Voyage synthesize_voyage(const ImpactScenario& scenario);

// Angular-velocity couplings used by the generator.
inline constexpr double kAngNoiseRatio = 0.2;   // rad/s of noise per m/s^2 of sigma
inline constexpr double kRollCoupling = 0.35;   // rad/s of roll per m/s^2 of impact

}  // namespace usv
