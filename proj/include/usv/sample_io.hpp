#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "usv/imu.hpp"

namespace usv {

// Sample file format: one record per line, comma-separated
// t_ns, ax, ay, az, gx, gy, gz (decimal text).
std::vector<ImuSample> load_sample_csv(const std::string& path);
void save_sample_csv(const std::string& path, std::span<const ImuSample> samples);

// Emission pacing for replay/synthetic sources. factor N means the nominal
// 10 ms inter-sample gap shrinks to 10 ms / N; max() disables pacing.
struct Pacing {
  double factor = 1.0;

  static Pacing realtime() { return {1.0}; }
  static Pacing accelerated(double n) { return {n}; }
  static Pacing max() { return {std::numeric_limits<double>::infinity()}; }

  bool unpaced() const { return !std::isfinite(factor); }
  // Parses "realtime" | "xN" | "max"; throws ContractViolation otherwise.
  static Pacing parse(const std::string& text);
  std::string str() const;
};

using SampleSink = std::function<void(const ImuSample&)>;

// Feeds samples to the sink on the pacing schedule (absolute deadlines, so
// pacing does not drift).
void replay_samples(std::span<const ImuSample> samples, Pacing pacing,
                    const SampleSink& sink);

// Loads the CSV then replays it.
void replay_file(const std::string& path, Pacing pacing, const SampleSink& sink);

}  // namespace usv
