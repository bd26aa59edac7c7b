#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace moodpipe::dsp {

enum class WindowKind { kHann, kHamming, kRectangular };

WindowKind parse_window(std::string_view name);
std::string_view window_name(WindowKind kind);
std::vector<double> make_window(WindowKind kind, std::size_t n);

std::size_t next_pow2(std::size_t n);

/// Magnitude spectrum |X_k|, k = 0..nfft/2, of `frame` multiplied by
/// `window` and zero-padded to `nfft`. Plans are cached per thread.
std::vector<double> magnitude_spectrum(std::span<const double> frame, std::span<const double> window,
                                       std::size_t nfft);

/// Biased autocorrelation r[0..max_lag] computed through the FFT.
std::vector<double> autocorrelation(std::span<const double> frame, std::size_t max_lag);

/// Triangular mel filterbank (HTK mel scale) spanning 0..sr/2, one row per band.
std::vector<std::vector<double>> mel_filterbank(std::size_t bands, std::size_t nfft, double sample_rate);

/// A-weighting gain (linear), normalised to 1 at 1 kHz.
double a_weight(double freq_hz);

}  // namespace moodpipe::dsp
