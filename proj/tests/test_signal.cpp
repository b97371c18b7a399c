#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <filesystem>

#include "usv/error.hpp"
#include "usv/rng.hpp"
#include "usv/sample_io.hpp"
#include "usv/synth.hpp"
#include "usv/windowing.hpp"

using namespace usv;

namespace {

std::vector<ImuSample> ramp_stream(std::size_t n) {
  std::vector<ImuSample> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i].t_ns = static_cast<std::int64_t>(i) * kSamplePeriodNs;
    v[i].lin_acc[0] = static_cast<double>(i);
  }
  return v;
}

std::filesystem::path tmp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("window_stream emits complete windows only") {
  auto ws = window_stream(ramp_stream(1100));
  REQUIRE(ws.size() == 3);
  CHECK(ws[0].samples.front().lin_acc[0] == 0.0);
  CHECK(ws[1].samples.front().lin_acc[0] == 300.0);
  CHECK(ws[2].samples.front().lin_acc[0] == 600.0);
  for (const auto& w : ws) CHECK(w.samples.size() == kWindowSamples);
  CHECK(ws[0].window_seq == 0);
  CHECK(ws[2].window_seq == 2);

  CHECK(window_stream(ramp_stream(499)).empty());
  auto one = window_stream(ramp_stream(500));
  REQUIRE(one.size() == 1);
  CHECK(one[0].samples.size() == kWindowSamples);
}

TEST_CASE("consecutive windows advance by the offset and share 200 samples") {
  auto ws = window_stream(ramp_stream(1400));
  REQUIRE(ws.size() >= 2);
  for (std::size_t k = 0; k + 1 < ws.size(); ++k) {
    CHECK(ws[k + 1].start_t_ns - ws[k].start_t_ns ==
          kWindowOffsetSeconds * 1'000'000'000LL);
    int shared = 0;
    for (int i = 0; i < kWindowSamples; ++i) {
      const auto& a = ws[k].samples[static_cast<std::size_t>(i)];
      if (i >= kWindowStrideSamples) {
        CHECK(a == ws[k + 1].samples[static_cast<std::size_t>(i - kWindowStrideSamples)]);
        ++shared;
      }
    }
    CHECK(shared == kWindowSamples - kWindowStrideSamples);
  }
}

TEST_CASE("window count matches the closed form over random lengths") {
  GaussianRng rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const auto n = static_cast<std::size_t>(rng.index_below(2500));
    CHECK(window_stream(ramp_stream(n)).size() == expected_window_count(n));
  }
}

TEST_CASE("non-monotonic timestamps are a stream integrity error") {
  auto s = ramp_stream(600);
  s[10].t_ns = s[9].t_ns;  // duplicate timestamp
  CHECK_THROWS_AS(window_stream(s), StreamIntegrityError);

  auto s2 = ramp_stream(600);
  s2[20].lin_acc[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(window_stream(s2), StreamIntegrityError);
}

TEST_CASE("quiet scenario with zero sigma is exactly zero") {
  ImpactScenario sc;
  sc.label = ImpactLabel::None;
  sc.sea_state_sigma = 0.0;
  sc.duration_s = 6.0;
  const auto v = synthesize_voyage(sc);
  REQUIRE(v.samples.size() == 600);
  for (const auto& s : v.samples) {
    for (int c = 0; c < kImuChannels; ++c) CHECK(s.axis(c) == 0.0);
  }
  for (const auto l : v.window_labels) CHECK(l == ImpactLabel::None);
}

TEST_CASE("bow impact peak lands on the impact sample") {
  ImpactScenario sc;
  sc.label = ImpactLabel::Bow;
  sc.impact_t_s = 2.5;
  sc.amplitude = 5.0;
  sc.sea_state_sigma = 0.0;
  sc.duration_s = 8.0;
  const auto v = synthesize_voyage(sc);
  std::size_t argmax = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < v.samples.size(); ++i) {
    const double m = std::abs(v.samples[i].lin_acc[0]);
    if (m > best) {
      best = m;
      argmax = i;
    }
  }
  CHECK(argmax == 250);
  CHECK(best == doctest::Approx(5.0));
  // Bow pattern: -x dominant, y and roll untouched.
  CHECK(v.samples[250].lin_acc[0] < 0.0);
  CHECK(v.samples[250].lin_acc[1] == 0.0);
  CHECK(v.samples[250].ang_vel[0] == 0.0);
}

TEST_CASE("port and starboard follow the stated axis patterns") {
  ImpactScenario sc;
  sc.impact_t_s = 2.5;
  sc.amplitude = 6.0;
  sc.sea_state_sigma = 0.0;
  sc.duration_s = 6.0;

  sc.label = ImpactLabel::Port;
  const auto port = synthesize_voyage(sc);
  CHECK(port.samples[250].lin_acc[1] > 0.0);
  CHECK(port.samples[250].ang_vel[0] > 0.0);

  sc.label = ImpactLabel::Starboard;
  const auto stbd = synthesize_voyage(sc);
  CHECK(stbd.samples[250].lin_acc[1] < 0.0);
  CHECK(stbd.samples[250].ang_vel[0] < 0.0);
}

TEST_CASE("generator is deterministic in the seed") {
  ImpactScenario sc;
  sc.label = ImpactLabel::Port;
  sc.impact_t_s = 3.25;
  sc.sea_state_sigma = 0.4;
  sc.duration_s = 12.0;
  sc.rng_seed = 99;
  const auto a = synthesize_voyage(sc);
  const auto b = synthesize_voyage(sc);
  REQUIRE(a.samples.size() == b.samples.size());
  CHECK(a.samples == b.samples);

  sc.rng_seed = 100;
  const auto c = synthesize_voyage(sc);
  CHECK(a.samples != c.samples);
}

TEST_CASE("exactly the windows containing the impact are labeled") {
  ImpactScenario sc;
  sc.label = ImpactLabel::Starboard;
  sc.impact_t_s = 4.0;  // inside [0,5) and [3,8)
  sc.duration_s = 14.0;
  sc.sea_state_sigma = 0.1;
  const auto v = synthesize_voyage(sc);
  REQUIRE(v.window_labels.size() == expected_window_count(1400));
  CHECK(v.window_labels[0] == ImpactLabel::Starboard);
  CHECK(v.window_labels[1] == ImpactLabel::Starboard);
  for (std::size_t k = 2; k < v.window_labels.size(); ++k) {
    CHECK(v.window_labels[k] == ImpactLabel::None);
  }
}

TEST_CASE("scenario validation rejects bad parameters") {
  ImpactScenario sc;
  sc.carrier_hz = 12.0;
  CHECK_THROWS_AS(sc.validate(), ContractViolation);
  sc.carrier_hz = 4.0;
  sc.duration_s = 3.0;
  CHECK_THROWS_AS(sc.validate(), ContractViolation);
  sc.duration_s = 5.0;
  sc.amplitude = -1.0;
  CHECK_THROWS_AS(sc.validate(), ContractViolation);
}

TEST_CASE("scenario JSON round trip") {
  ImpactScenario sc;
  sc.label = ImpactLabel::Port;
  sc.impact_t_s = 2.25;
  sc.amplitude = 9.5;
  sc.rng_seed = 1234;
  const auto text = scenario_to_json_text(sc);
  const auto back = scenario_from_json_text(text);
  CHECK(back.label == sc.label);
  CHECK(back.impact_t_s == sc.impact_t_s);
  CHECK(back.amplitude == sc.amplitude);
  CHECK(back.rng_seed == sc.rng_seed);

  CHECK_THROWS_AS(scenario_from_json_text("{\"label\": \"Stern\"}"), Error);
  CHECK_THROWS_AS(scenario_from_json_text("not json"), ParseError);
}

TEST_CASE("sample CSV round trip and parse errors") {
  const auto path = tmp_file("usv_test_samples.csv");
  ImpactScenario sc;
  sc.label = ImpactLabel::Bow;
  sc.duration_s = 6.0;
  sc.sea_state_sigma = 0.2;
  const auto v = synthesize_voyage(sc);
  save_sample_csv(path.string(), v.samples);
  const auto back = load_sample_csv(path.string());
  REQUIRE(back.size() == v.samples.size());
  CHECK(back == v.samples);
  std::filesystem::remove(path);

  const auto bad = tmp_file("usv_test_bad.csv");
  {
    std::FILE* f = std::fopen(bad.string().c_str(), "w");
    std::fputs("0,0,0,0,0,0,0\n10000000,1,2,oops,4,5,6\n", f);
    std::fclose(f);
  }
  try {
    load_sample_csv(bad.string());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
  std::filesystem::remove(bad);
}

TEST_CASE("empty file replays to an empty sequence") {
  const auto path = tmp_file("usv_test_empty.csv");
  {
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    std::fclose(f);
  }
  std::vector<ImuSample> got;
  replay_file(path.string(), Pacing::max(), [&](const ImuSample& s) { got.push_back(s); });
  CHECK(got.empty());
  std::filesystem::remove(path);
}

TEST_CASE("pacing parses and paces") {
  CHECK(Pacing::parse("realtime").factor == 1.0);
  CHECK(Pacing::parse("max").unpaced());
  CHECK(Pacing::parse("x8").factor == 8.0);
  CHECK_THROWS_AS(Pacing::parse("x0"), ContractViolation);
  CHECK_THROWS_AS(Pacing::parse("slow"), ContractViolation);

  // 100 samples at x10 should take ~99 ms of schedule.
  const auto samples = ramp_stream(100);
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t n = 0;
  replay_samples(samples, Pacing::accelerated(10.0), [&](const ImuSample&) { ++n; });
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  CHECK(n == 100);
  CHECK(ms > 80.0);
  CHECK(ms < 220.0);
}

TEST_CASE("realtime replay of 500 records takes about five seconds") {
  const auto samples = ramp_stream(500);
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t n = 0;
  replay_samples(samples, Pacing::realtime(), [&](const ImuSample&) { ++n; });
  const double s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(n == 500);
  CHECK(s == doctest::Approx(4.99).epsilon(0.05));  // 499 gaps of 10 ms
}
