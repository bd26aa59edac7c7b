#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moodpipe/common.hpp"
#include "moodpipe/corpus.hpp"
#include "moodpipe/dsp.hpp"

namespace moodpipe {

struct FrameSpec {
  double window_seconds = 0.5;
  double hop_seconds = 0.25;
  dsp::WindowKind window = dsp::WindowKind::kHann;

  void validate() const;
  std::size_t window_samples(std::uint32_t sample_rate) const;
  std::size_t hop_samples(std::uint32_t sample_rate) const;
  /// Canonical text form; hashed for cache keys.
  std::string canonical() const;
  std::string hash() const;
};

/// Per-frame extractors. The declaration order is the canonical order.
enum class BaseFeature : std::uint8_t {
  kRms,
  kZcr,
  kSpectralCentroid,
  kSpectralSpread,
  kSpectralRolloff,
  kSpectralFlux,
  kSpectralFlatness,
  kSpectralEntropy,
  kSpectralCrest,
  kSpectralSlope,
  kLowEnergyRatio,
  kMfcc1, kMfcc2, kMfcc3, kMfcc4, kMfcc5, kMfcc6, kMfcc7,
  kMfcc8, kMfcc9, kMfcc10, kMfcc11, kMfcc12, kMfcc13,
  kF0,
  kLoudness,
};

inline constexpr std::size_t kBaseFeatureCount = 26;

std::string_view base_feature_name(BaseFeature f);

class BaseFeatureSet {
 public:
  /// All 26 extractors in canonical order.
  static BaseFeatureSet canonical();
  static BaseFeatureSet from_names(const std::vector<std::string>& names);

  const std::vector<BaseFeature>& features() const { return features_; }
  std::size_t size() const { return features_.size(); }
  std::vector<std::string> names() const;
  std::string hash() const;

 private:
  std::vector<BaseFeature> features_;
};

/// Splits a clip into frames of window_samples every hop_samples; the
/// trailing partial window is dropped.
std::vector<std::span<const double>> frame_signal(const AudioClip& clip, const FrameSpec& spec);

/// Per-frame feature computation with reusable scratch state for one
/// (frame length, sample rate, window) combination.
class FrameAnalyzer {
 public:
  FrameAnalyzer(std::size_t frame_length, std::uint32_t sample_rate, dsp::WindowKind window);

  /// All 26 base features in canonical order.
  std::array<double, kBaseFeatureCount> analyze(std::span<const double> frame) const;
  std::vector<double> analyze(std::span<const double> frame, const BaseFeatureSet& set) const;

  std::size_t fft_size() const { return nfft_; }

 private:
  std::size_t frame_length_;
  std::uint32_t sample_rate_;
  std::size_t nfft_;
  std::size_t half_length_;
  std::size_t half_nfft_;
  std::vector<double> window_;
  std::vector<double> half_window_;
  std::vector<std::vector<double>> mel_;
  std::vector<double> a_weights_;
};

std::vector<double> frame_features(std::span<const double> frame, std::uint32_t sample_rate,
                                   const BaseFeatureSet& set,
                                   dsp::WindowKind window = dsp::WindowKind::kHann);

struct Moments {
  double mean = 0.0;
  double std = 0.0;
  double skew = 0.0;
  double kurt = 0.0;
};

/// Sample mean, sample standard deviation (n-1), and the bias-adjusted
/// skewness and excess kurtosis. Zero spread maps skew and kurt to 0.
Moments aggregate(std::span<const double> series);

inline constexpr std::array<std::string_view, 4> kStatisticNames = {"mean", "std", "skew", "kurt"};

struct FeatureMatrix {
  std::vector<std::uint32_t> track_ids;
  std::vector<std::string> columns;
  Matrix values;
  std::string spec_hash;
  std::string set_hash;
  std::string corpus_hash;

  std::size_t column_index(std::string_view name) const;
  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

std::vector<std::string> feature_column_names(const BaseFeatureSet& set);

/// Aggregated row for one clip (already truncated).
std::vector<double> extract_row(const AudioClip& clip, const FrameSpec& spec, const BaseFeatureSet& set);

struct TrackSource {
  std::uint32_t track_id;
  std::filesystem::path path;
};

/// Loads, truncates to the shortest clip, frames and aggregates every track.
/// Tracks run in parallel; rows come back in the order given.
FeatureMatrix extract_matrix(std::span<const TrackSource> tracks, const FrameSpec& spec, const BaseFeatureSet& set);
FeatureMatrix extract_matrix(std::span<const std::uint32_t> track_ids, std::span<const AudioClip> clips,
                             const FrameSpec& spec, const BaseFeatureSet& set);

/// Columns whose value is identical on every row.
std::vector<std::string> constant_columns(const FeatureMatrix& m);

void write_feature_csv(std::ostream& out, const FeatureMatrix& m);
FeatureMatrix read_feature_csv(std::istream& in);

void write_feature_cache(const std::filesystem::path& path, const FeatureMatrix& m);
FeatureMatrix read_feature_cache(const std::filesystem::path& path);

}  // namespace moodpipe
