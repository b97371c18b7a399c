#include "usv/cwt.hpp"

#include <cmath>

#include <fftw3.h>

#include "usv/error.hpp"

namespace usv {

double FrequencyGrid::frequency(int k) const {
  if (n_bins == 1) return f_min;
  return f_min * std::pow(f_max / f_min, static_cast<double>(k) / (n_bins - 1));
}

int FrequencyGrid::nearest_bin(double f) const {
  const double pos = (n_bins - 1) * std::log(f / f_min) / std::log(f_max / f_min);
  const int k = static_cast<int>(std::lround(pos));
  return std::min(std::max(k, 0), n_bins - 1);
}

FrequencyGrid FrequencyGrid::make(int n_bins, double f_min, double f_max) {
  if (n_bins < 2 || !(f_min > 0.0) || !(f_max > f_min)) {
    throw ContractViolation("frequency grid requires n_bins >= 2 and 0 < f_min < f_max");
  }
  return FrequencyGrid{n_bins, f_min, f_max};
}

namespace {

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

struct FftwBuf {
  explicit FftwBuf(int n)
      : p(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(n)))) {}
  ~FftwBuf() { fftw_free(p); }
  FftwBuf(const FftwBuf&) = delete;
  FftwBuf& operator=(const FftwBuf&) = delete;
  fftw_complex* p;
};

}  // namespace

struct MorletCwt::Impl {
  int len = 0;  // FFT length, power of two >= 2n-1
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
  std::vector<double> scales;
  // Kernel spectra, one length-len row per scale.
  std::vector<std::complex<double>> spectra;

  ~Impl() {
    if (fwd) fftw_destroy_plan(fwd);
    if (inv) fftw_destroy_plan(inv);
  }
};

MorletCwt::MorletCwt(FrequencyGrid grid, double rate_hz, int n_samples)
    : grid_(grid), rate_hz_(rate_hz), n_(n_samples), impl_(std::make_unique<Impl>()) {
  if (n_samples < 1) throw ContractViolation("n_samples must be positive");
  if (!(rate_hz > 0.0)) throw ContractViolation("rate_hz must be positive");
  if (!(grid_.f_max <= rate_hz / 2.0)) {
    throw ContractViolation("grid exceeds Nyquist frequency");
  }

  const int len = next_pow2(2 * n_ - 1);
  impl_->len = len;

  FftwBuf a(len), b(len);
  impl_->fwd = fftw_plan_dft_1d(len, a.p, b.p, FFTW_FORWARD, FFTW_ESTIMATE);
  impl_->inv = fftw_plan_dft_1d(len, a.p, b.p, FFTW_BACKWARD, FFTW_ESTIMATE);

  impl_->scales.resize(static_cast<std::size_t>(grid_.n_bins));
  impl_->spectra.resize(static_cast<std::size_t>(grid_.n_bins) * len);

  const double pi_quarter = std::pow(M_PI, -0.25);
  std::vector<std::complex<double>> kernel(static_cast<std::size_t>(len));
  for (int k = 0; k < grid_.n_bins; ++k) {
    const double f = grid_.frequency(k);
    const double s = kMorletOmega0 * rate_hz_ / (2.0 * M_PI * f);
    impl_->scales[static_cast<std::size_t>(k)] = s;

    std::fill(kernel.begin(), kernel.end(), std::complex<double>{});
    const double norm = pi_quarter / std::sqrt(s);
    for (int d = -(n_ - 1); d <= n_ - 1; ++d) {
      const double t = static_cast<double>(d) / s;
      const double env = norm * std::exp(-0.5 * t * t);
      // conj(psi), and the kernel is stored time-reversed so that the
      // circular convolution realizes a correlation.
      const int idx = (len - d) % len;
      kernel[static_cast<std::size_t>(idx)] =
          std::complex<double>(env * std::cos(kMorletOmega0 * t), -env * std::sin(kMorletOmega0 * t));
    }
    fftw_execute_dft(impl_->fwd, reinterpret_cast<fftw_complex*>(kernel.data()),
                     reinterpret_cast<fftw_complex*>(impl_->spectra.data() +
                                                     static_cast<std::size_t>(k) * len));
  }
}

MorletCwt::~MorletCwt() = default;

double MorletCwt::scale(int k) const { return impl_->scales[static_cast<std::size_t>(k)]; }

CwtMatrix MorletCwt::transform(std::span<const double> signal) const {
  if (static_cast<int>(signal.size()) != n_) {
    throw ContractViolation("signal length mismatch: want " + std::to_string(n_) +
                            ", got " + std::to_string(signal.size()));
  }
  for (const double x : signal) {
    if (!std::isfinite(x)) throw ContractViolation("non-finite signal value");
  }

  const int len = impl_->len;
  FftwBuf in(len), spec(len), prod(len), out(len);

  for (int i = 0; i < len; ++i) {
    in.p[i][0] = i < n_ ? signal[static_cast<std::size_t>(i)] : 0.0;
    in.p[i][1] = 0.0;
  }
  fftw_execute_dft(impl_->fwd, in.p, spec.p);

  CwtMatrix m(grid_.n_bins, n_);
  const double inv_len = 1.0 / len;
  for (int k = 0; k < grid_.n_bins; ++k) {
    const std::complex<double>* h = impl_->spectra.data() + static_cast<std::size_t>(k) * len;
    for (int j = 0; j < len; ++j) {
      const double xr = spec.p[j][0], xi = spec.p[j][1];
      const double hr = h[j].real(), hi = h[j].imag();
      prod.p[j][0] = xr * hr - xi * hi;
      prod.p[j][1] = xr * hi + xi * hr;
    }
    fftw_execute_dft(impl_->inv, prod.p, out.p);
    double* row = m.v.data() + static_cast<std::size_t>(k) * n_;
    for (int nn = 0; nn < n_; ++nn) {
      row[nn] = std::hypot(out.p[nn][0], out.p[nn][1]) * inv_len;
    }
  }
  return m;
}

}  // namespace usv
