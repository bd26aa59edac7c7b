#include "moodpipe/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "moodpipe/common.hpp"

namespace moodpipe::dsp {

namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    in_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    out_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), out_, in_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  double* input() { return in_; }
  fftw_complex* output() { return out_; }
  void forward() { fftw_execute(forward_); }
  // c2r destroys its input; callers refill before reuse.
  void inverse() { fftw_execute(inverse_); }

 private:
  std::size_t n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

RealFft& fft_for(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<RealFft>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFft>(n);
  return *slot;
}

}  // namespace

WindowKind parse_window(std::string_view name) {
  if (name == "hann") return WindowKind::kHann;
  if (name == "hamming") return WindowKind::kHamming;
  if (name == "rectangular" || name == "none") return WindowKind::kRectangular;
  throw InputError("unknown window function '" + std::string(name) + "'");
}

std::string_view window_name(WindowKind kind) {
  switch (kind) {
    case WindowKind::kHann: return "hann";
    case WindowKind::kHamming: return "hamming";
    case WindowKind::kRectangular: return "rectangular";
  }
  return "hann";
}

std::vector<double> make_window(WindowKind kind, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2 || kind == WindowKind::kRectangular) return w;
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / denom);
    w[i] = kind == WindowKind::kHann ? 0.5 - 0.5 * c : 0.54 - 0.46 * c;
  }
  return w;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> magnitude_spectrum(std::span<const double> frame, std::span<const double> window,
                                       std::size_t nfft) {
  RealFft& fft = fft_for(nfft);
  double* in = fft.input();
  const std::size_t n = std::min(frame.size(), nfft);
  for (std::size_t i = 0; i < n; ++i) in[i] = frame[i] * window[i];
  std::fill(in + n, in + nfft, 0.0);
  fft.forward();
  std::vector<double> mag(nfft / 2 + 1);
  const fftw_complex* out = fft.output();
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::hypot(out[k][0], out[k][1]);
  return mag;
}

std::vector<double> autocorrelation(std::span<const double> frame, std::size_t max_lag) {
  const std::size_t nfft = next_pow2(2 * frame.size());
  RealFft& fft = fft_for(nfft);
  double* in = fft.input();
  std::copy(frame.begin(), frame.end(), in);
  std::fill(in + frame.size(), in + nfft, 0.0);
  fft.forward();
  fftw_complex* out = fft.output();
  for (std::size_t k = 0; k <= nfft / 2; ++k) {
    out[k][0] = out[k][0] * out[k][0] + out[k][1] * out[k][1];
    out[k][1] = 0.0;
  }
  fft.inverse();
  const std::size_t lags = std::min(max_lag + 1, frame.size());
  std::vector<double> r(lags);
  const double scale = 1.0 / (static_cast<double>(nfft) * static_cast<double>(frame.size()));
  for (std::size_t i = 0; i < lags; ++i) r[i] = in[i] * scale;
  return r;
}

namespace {
double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }
}  // namespace

std::vector<std::vector<double>> mel_filterbank(std::size_t bands, std::size_t nfft, double sample_rate) {
  const std::size_t bins = nfft / 2 + 1;
  const double max_mel = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(bands + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(max_mel * static_cast<double>(i) / static_cast<double>(bands + 1));
  std::vector<std::vector<double>> fb(bands, std::vector<double>(bins, 0.0));
  for (std::size_t b = 0; b < bands; ++b) {
    const double lo = edges[b], mid = edges[b + 1], hi = edges[b + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(nfft);
      if (f > lo && f < hi) fb[b][k] = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
    }
  }
  return fb;
}

double a_weight(double f) {
  const auto ra = [](double x) {
    const double f2 = x * x;
    return (12194.0 * 12194.0 * f2 * f2) /
           ((f2 + 20.6 * 20.6) * std::sqrt((f2 + 107.7 * 107.7) * (f2 + 737.9 * 737.9)) * (f2 + 12194.0 * 12194.0));
  };
  static const double ref = ra(1000.0);
  return ra(f) / ref;
}

}  // namespace moodpipe::dsp
