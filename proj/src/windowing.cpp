#include "usv/windowing.hpp"

#include "usv/error.hpp"

namespace usv {

StreamWindower::StreamWindower(std::uint32_t device_id, int rate_hz, int window_s,
                               int offset_s)
    : device_id_(device_id),
      rate_hz_(rate_hz),
      window_samples_(window_s * rate_hz),
      stride_samples_(offset_s * rate_hz) {
  if (rate_hz <= 0 || window_s <= 0 || offset_s <= 0) {
    throw ContractViolation("windower requires positive rate/window/offset");
  }
}

std::optional<SampleWindow> StreamWindower::push(const ImuSample& s) {
  if (!s.finite()) {
    throw StreamIntegrityError("non-finite sample at stream index " +
                               std::to_string(n_seen_));
  }
  if (have_last_t_ && s.t_ns <= last_t_ns_) {
    throw StreamIntegrityError("non-monotonic timestamp at stream index " +
                               std::to_string(n_seen_));
  }
  last_t_ns_ = s.t_ns;
  have_last_t_ = true;
  buf_.push_back(s);
  ++n_seen_;

  const std::uint64_t next_start = next_seq_ * static_cast<std::uint64_t>(stride_samples_);
  if (n_seen_ < next_start + static_cast<std::uint64_t>(window_samples_)) {
    return std::nullopt;
  }

  SampleWindow w;
  w.device_id = device_id_;
  w.window_seq = next_seq_;
  w.rate_hz = static_cast<std::uint16_t>(rate_hz_);
  const std::size_t off = static_cast<std::size_t>(next_start - buf_base_);
  w.samples.assign(buf_.begin() + static_cast<std::ptrdiff_t>(off),
                   buf_.begin() + static_cast<std::ptrdiff_t>(off) + window_samples_);
  w.start_t_ns = w.samples.front().t_ns;
  ++next_seq_;

  // Drop samples that can no longer appear in a future window.
  const std::uint64_t keep_from = next_seq_ * static_cast<std::uint64_t>(stride_samples_);
  while (buf_base_ < keep_from && !buf_.empty()) {
    buf_.pop_front();
    ++buf_base_;
  }
  return w;
}

std::vector<SampleWindow> window_stream(std::span<const ImuSample> samples,
                                        std::uint32_t device_id, int rate_hz,
                                        int window_s, int offset_s) {
  StreamWindower wr(device_id, rate_hz, window_s, offset_s);
  std::vector<SampleWindow> out;
  for (const auto& s : samples) {
    if (auto w = wr.push(s)) out.push_back(std::move(*w));
  }
  return out;
}

std::uint64_t expected_window_count(std::uint64_t n_samples, int window_samples,
                                    int stride_samples) {
  if (n_samples < static_cast<std::uint64_t>(window_samples)) return 0;
  return (n_samples - static_cast<std::uint64_t>(window_samples)) /
             static_cast<std::uint64_t>(stride_samples) +
         1;
}

}  // namespace usv
