#include "usv/sample_io.hpp"

#include <cerrno>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "usv/error.hpp"

namespace usv {
namespace {

double parse_double_field(const std::string& line, std::size_t& pos, std::size_t line_no,
                          bool last) {
  while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
  const char* begin = line.data() + pos;
  const char* end = line.data() + line.size();
  double value = 0.0;
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc()) throw ParseError("malformed numeric field", line_no);
  pos = static_cast<std::size_t>(res.ptr - line.data());
  while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
  if (last) {
    if (pos != line.size()) throw ParseError("trailing characters after record", line_no);
  } else {
    if (pos >= line.size() || line[pos] != ',') throw ParseError("expected ','", line_no);
    ++pos;
  }
  return value;
}

}  // namespace

std::vector<ImuSample> load_sample_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sample file: " + path);

  std::vector<ImuSample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::size_t pos = 0;
    ImuSample s;
    const double t = parse_double_field(line, pos, line_no, false);
    if (!std::isfinite(t)) throw ParseError("non-finite timestamp", line_no);
    s.t_ns = static_cast<std::int64_t>(std::llround(t));
    for (int c = 0; c < kImuChannels; ++c) {
      const double v = parse_double_field(line, pos, line_no, c == kImuChannels - 1);
      if (!std::isfinite(v)) throw ParseError("non-finite sample value", line_no);
      s.axis(c) = v;
    }
    out.push_back(s);
  }
  return out;
}

void save_sample_csv(const std::string& path, std::span<const ImuSample> samples) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot write sample file: " + path);
  for (const auto& s : samples) {
    std::fprintf(f, "%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                 static_cast<long long>(s.t_ns), s.lin_acc[0], s.lin_acc[1], s.lin_acc[2],
                 s.ang_vel[0], s.ang_vel[1], s.ang_vel[2]);
  }
  std::fclose(f);
}

Pacing Pacing::parse(const std::string& text) {
  if (text == "realtime") return realtime();
  if (text == "max") return max();
  if (text.size() > 1 && text[0] == 'x') {
    char* end = nullptr;
    const double n = std::strtod(text.c_str() + 1, &end);
    if (end && *end == '\0' && n > 0.0) return accelerated(n);
  }
  throw ContractViolation("bad pacing '" + text + "' (want realtime|xN|max)");
}

std::string Pacing::str() const {
  if (unpaced()) return "max";
  if (factor == 1.0) return "realtime";
  return "x" + std::to_string(factor);
}

void replay_samples(std::span<const ImuSample> samples, Pacing pacing,
                    const SampleSink& sink) {
  if (pacing.unpaced()) {
    for (const auto& s : samples) sink(s);
    return;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const double gap_ns = 1e9 / (kRateHz * pacing.factor);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i > 0) {
      const auto deadline =
          t0 + std::chrono::nanoseconds(static_cast<std::int64_t>(gap_ns * static_cast<double>(i)));
      std::this_thread::sleep_until(deadline);
    }
    sink(samples[i]);
  }
}

void replay_file(const std::string& path, Pacing pacing, const SampleSink& sink) {
  const auto samples = load_sample_csv(path);
  replay_samples(samples, pacing, sink);
}

}  // namespace usv
