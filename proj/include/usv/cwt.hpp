#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace usv {

inline constexpr double kMorletOmega0 = 6.0;

// Logarithmically spaced analysis frequencies.
struct FrequencyGrid {
  int n_bins = 0;
  double f_min = 0.0;
  double f_max = 0.0;

  double frequency(int k) const;
  int nearest_bin(double f) const;  // nearest in log spacing, clamped

  static FrequencyGrid make(int n_bins, double f_min, double f_max);
  static FrequencyGrid standard() { return make(150, 0.25, 10.0); }
};

// Dense row-major magnitude matrix (rows = frequency bins, cols = time).
struct CwtMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  CwtMatrix() = default;
  CwtMatrix(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}
  double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
  double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
};

// Morlet continuous wavelet transform of fixed-length signals.
//
// Entry (k, n) = |sum_m x[m] * conj(psi((m-n)/s_k)) * s_k^(-1/2)| with
// psi(t) = pi^(-1/4) * exp(i*w0*t) * exp(-t^2/2), w0 = 6, and scale
// s_k = w0 * rate / (2*pi*f_k) in samples. The sum runs over the whole
// window with zero-padded boundaries; it is evaluated through a circular
// FFT convolution sized so the result equals the direct summation to
// floating-point rounding.
//
// Construction is not thread-safe (FFTW planning); transform() is const and
// reentrant, one call per thread is fine.
class MorletCwt {
 public:
  MorletCwt(FrequencyGrid grid, double rate_hz, int n_samples);
  ~MorletCwt();
  MorletCwt(const MorletCwt&) = delete;
  MorletCwt& operator=(const MorletCwt&) = delete;

  // signal must hold exactly n_samples finite values.
  CwtMatrix transform(std::span<const double> signal) const;

  const FrequencyGrid& grid() const { return grid_; }
  int n_samples() const { return n_; }
  double scale(int k) const;

 private:
  struct Impl;
  FrequencyGrid grid_;
  double rate_hz_;
  int n_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace usv
