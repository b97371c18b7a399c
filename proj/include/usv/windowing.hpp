#pragma once

#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "usv/imu.hpp"

namespace usv {

// Incremental sliding-window segmenter. Window k covers sample indices
// [k*stride, k*stride + window_samples); only complete windows are emitted,
// so a trailing partial window is dropped. Enforces strictly increasing
// timestamps and finite readings across the stream.
class StreamWindower {
 public:
  StreamWindower(std::uint32_t device_id = 0, int rate_hz = kRateHz,
                 int window_s = kWindowSeconds, int offset_s = kWindowOffsetSeconds);

  // Feeds one sample; returns a window when one completes.
  std::optional<SampleWindow> push(const ImuSample& s);

  std::uint64_t windows_emitted() const { return next_seq_; }
  std::uint64_t samples_seen() const { return n_seen_; }
  int window_samples() const { return window_samples_; }
  int stride_samples() const { return stride_samples_; }

 private:
  std::uint32_t device_id_;
  int rate_hz_;
  int window_samples_;
  int stride_samples_;
  std::deque<ImuSample> buf_;
  std::uint64_t buf_base_ = 0;  // stream index of buf_.front()
  std::uint64_t n_seen_ = 0;
  std::uint64_t next_seq_ = 0;
  bool have_last_t_ = false;
  std::int64_t last_t_ns_ = 0;
};

// Batch form over a complete stream.
std::vector<SampleWindow> window_stream(std::span<const ImuSample> samples,
                                        std::uint32_t device_id = 0,
                                        int rate_hz = kRateHz,
                                        int window_s = kWindowSeconds,
                                        int offset_s = kWindowOffsetSeconds);

// Number of complete windows a stream of n samples yields.
std::uint64_t expected_window_count(std::uint64_t n_samples,
                                    int window_samples = kWindowSamples,
                                    int stride_samples = kWindowStrideSamples);

}  // namespace usv
