#include "moodpipe/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>

namespace moodpipe {

namespace {

constexpr std::array<std::string_view, kBaseFeatureCount> kFeatureNames = {
    "rms",           "zcr",           "spectral_centroid", "spectral_spread", "spectral_rolloff",
    "spectral_flux", "spectral_flatness", "spectral_entropy", "spectral_crest", "spectral_slope",
    "low_energy_ratio", "mfcc_1",     "mfcc_2",            "mfcc_3",          "mfcc_4",
    "mfcc_5",        "mfcc_6",        "mfcc_7",            "mfcc_8",          "mfcc_9",
    "mfcc_10",       "mfcc_11",       "mfcc_12",           "mfcc_13",         "f0",
    "loudness",
};

constexpr std::size_t kMelBands = 26;
constexpr std::size_t kMfccCount = 13;
constexpr std::size_t kLowEnergyBlocks = 10;
constexpr double kRolloffFraction = 0.85;
constexpr double kF0MinHz = 50.0;
constexpr double kF0MaxHz = 1500.0;
constexpr double kVoicingThreshold = 0.3;
constexpr double kLogFloor = 1e-10;

std::size_t seconds_to_samples(double seconds, std::uint32_t sr) {
  return static_cast<std::size_t>(std::floor(seconds * sr + 1e-9));
}

}  // namespace

void FrameSpec::validate() const {
  if (!(window_seconds > 0.0)) throw InputError("frame window must be positive");
  if (!(hop_seconds > 0.0 && hop_seconds <= window_seconds)) {
    throw InputError("frame hop must satisfy 0 < hop <= window");
  }
}

std::size_t FrameSpec::window_samples(std::uint32_t sr) const { return seconds_to_samples(window_seconds, sr); }
std::size_t FrameSpec::hop_samples(std::uint32_t sr) const { return seconds_to_samples(hop_seconds, sr); }

std::string FrameSpec::canonical() const {
  return "frame:v1;window=" + format_double(window_seconds) + ";hop=" + format_double(hop_seconds) +
         ";fn=" + std::string(dsp::window_name(window));
}

std::string FrameSpec::hash() const { return sha256_hex(canonical()).substr(0, 16); }

std::string_view base_feature_name(BaseFeature f) { return kFeatureNames[static_cast<std::size_t>(f)]; }

BaseFeatureSet BaseFeatureSet::canonical() {
  BaseFeatureSet s;
  for (std::size_t i = 0; i < kBaseFeatureCount; ++i) s.features_.push_back(static_cast<BaseFeature>(i));
  return s;
}

BaseFeatureSet BaseFeatureSet::from_names(const std::vector<std::string>& names) {
  BaseFeatureSet s;
  for (const auto& n : names) {
    auto it = std::find(kFeatureNames.begin(), kFeatureNames.end(), n);
    if (it == kFeatureNames.end()) throw InputError("unknown base feature '" + n + "'");
    const auto f = static_cast<BaseFeature>(it - kFeatureNames.begin());
    if (std::find(s.features_.begin(), s.features_.end(), f) != s.features_.end()) {
      throw InputError("duplicate base feature '" + n + "'");
    }
    s.features_.push_back(f);
  }
  if (s.features_.empty()) throw InputError("feature set is empty");
  return s;
}

std::vector<std::string> BaseFeatureSet::names() const {
  std::vector<std::string> out;
  for (auto f : features_) out.emplace_back(base_feature_name(f));
  return out;
}

std::string BaseFeatureSet::hash() const {
  std::string s = "features:v1";
  for (auto f : features_) {
    s += ';';
    s += base_feature_name(f);
  }
  return sha256_hex(s).substr(0, 16);
}

std::vector<std::span<const double>> frame_signal(const AudioClip& clip, const FrameSpec& spec) {
  spec.validate();
  const std::size_t win = spec.window_samples(clip.sample_rate);
  const std::size_t hop = spec.hop_samples(clip.sample_rate);
  if (win == 0 || hop == 0) throw InputError("frame spec yields empty windows at this sample rate");
  if (clip.samples.size() < win) {
    throw InputError("clip of " + std::to_string(clip.samples.size()) + " samples is shorter than one window (" +
                     std::to_string(win) + ")");
  }
  const std::size_t count = (clip.samples.size() - win) / hop + 1;
  std::vector<std::span<const double>> frames;
  frames.reserve(count);
  for (std::size_t i = 0; i < count; ++i) frames.emplace_back(clip.samples.data() + i * hop, win);
  return frames;
}

FrameAnalyzer::FrameAnalyzer(std::size_t frame_length, std::uint32_t sample_rate, dsp::WindowKind window)
    : frame_length_(frame_length),
      sample_rate_(sample_rate),
      nfft_(dsp::next_pow2(frame_length)),
      half_length_(frame_length / 2),
      half_nfft_(dsp::next_pow2(std::max<std::size_t>(frame_length / 2, 1))),
      window_(dsp::make_window(window, frame_length)),
      half_window_(dsp::make_window(window, frame_length / 2)),
      mel_(dsp::mel_filterbank(kMelBands, nfft_, sample_rate)) {
  if (frame_length == 0) throw InputError("frame is empty");
  if (sample_rate == 0) throw InputError("sample rate must be positive");
  a_weights_.resize(nfft_ / 2 + 1);
  for (std::size_t k = 0; k < a_weights_.size(); ++k) {
    const double w = dsp::a_weight(static_cast<double>(k) * sample_rate_ / static_cast<double>(nfft_));
    a_weights_[k] = w * w;
  }
}

namespace {

double rms_of(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double ss = 0.0;
  for (double v : x) ss += v * v;
  return std::sqrt(ss / static_cast<double>(x.size()));
}

double estimate_f0(std::span<const double> frame, std::uint32_t sr) {
  const std::size_t min_lag = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(sr / kF0MaxHz)));
  const std::size_t max_lag = std::min<std::size_t>(static_cast<std::size_t>(std::ceil(sr / kF0MinHz)),
                                                    frame.size() / 2);
  if (max_lag <= min_lag + 1) return 0.0;
  const std::vector<double> r = dsp::autocorrelation(frame, max_lag + 1);
  if (!(r[0] > 0.0)) return 0.0;
  // Skip the main lobe around lag 0: search only after r first dips below zero.
  std::size_t start = 1;
  while (start < r.size() && r[start] > 0.0) ++start;
  start = std::max(start, min_lag);
  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t lag = start; lag <= max_lag && lag + 1 < r.size(); ++lag) {
    if (r[lag] > best_val) {
      best_val = r[lag];
      best = lag;
    }
  }
  if (best == 0 || best_val / r[0] < kVoicingThreshold) return 0.0;
  double lag = static_cast<double>(best);
  const double a = r[best - 1], b = r[best], c = r[best + 1];
  const double denom = a - 2.0 * b + c;
  if (denom < 0.0) lag += 0.5 * (a - c) / denom;
  return static_cast<double>(sr) / lag;
}

}  // namespace

std::array<double, kBaseFeatureCount> FrameAnalyzer::analyze(std::span<const double> frame) const {
  if (frame.size() != frame_length_) throw InputError("frame length does not match analyzer");
  std::array<double, kBaseFeatureCount> out{};
  const auto set = [&](BaseFeature f, double v) { out[static_cast<std::size_t>(f)] = v; };
  const double sr = static_cast<double>(sample_rate_);

  const double rms = rms_of(frame);
  set(BaseFeature::kRms, rms);

  std::size_t crossings = 0;
  for (std::size_t i = 1; i < frame.size(); ++i)
    if ((frame[i - 1] >= 0.0) != (frame[i] >= 0.0)) ++crossings;
  set(BaseFeature::kZcr, static_cast<double>(crossings) * sr / static_cast<double>(frame.size()));

  // Low-energy ratio over equal sub-blocks.
  {
    const std::size_t block = frame.size() / kLowEnergyBlocks;
    double ratio = 0.0;
    if (block > 0) {
      std::array<double, kLowEnergyBlocks> e{};
      double mean = 0.0;
      for (std::size_t b = 0; b < kLowEnergyBlocks; ++b) {
        e[b] = rms_of(frame.subspan(b * block, block));
        mean += e[b];
      }
      mean /= kLowEnergyBlocks;
      ratio = static_cast<double>(std::count_if(e.begin(), e.end(), [&](double v) { return v < mean; })) /
              kLowEnergyBlocks;
    }
    set(BaseFeature::kLowEnergyRatio, ratio);
  }

  const std::vector<double> mag = dsp::magnitude_spectrum(frame, window_, nfft_);
  const std::size_t bins = mag.size();
  const double bin_hz = sr / static_cast<double>(nfft_);
  double total = 0.0, weighted = 0.0, peak = 0.0, power = 0.0, a_power = 0.0;
  for (std::size_t k = 0; k < bins; ++k) {
    total += mag[k];
    weighted += static_cast<double>(k) * bin_hz * mag[k];
    peak = std::max(peak, mag[k]);
    power += mag[k] * mag[k];
    a_power += mag[k] * mag[k] * a_weights_[k];
  }

  if (total > 0.0) {
    const double centroid = weighted / total;
    double var = 0.0, cum = 0.0, rolloff = 0.0, entropy = 0.0, log_sum = 0.0;
    bool rolled = false;
    const double floor = 1e-12 * peak;
    double sf = 0.0, sff = 0.0, sm = 0.0, sfm = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      var += (f - centroid) * (f - centroid) * mag[k];
      cum += mag[k];
      if (!rolled && cum >= kRolloffFraction * total) {
        rolloff = f;
        rolled = true;
      }
      const double p = mag[k] / total;
      if (p > 0.0) entropy -= p * std::log2(p);
      log_sum += std::log(mag[k] + floor);
      sf += f;
      sff += f * f;
      sm += mag[k];
      sfm += f * mag[k];
    }
    const double n = static_cast<double>(bins);
    const double mean_mag = total / n;
    set(BaseFeature::kSpectralCentroid, centroid);
    set(BaseFeature::kSpectralSpread, std::sqrt(var / total));
    set(BaseFeature::kSpectralRolloff, rolloff);
    set(BaseFeature::kSpectralFlatness, std::exp(log_sum / n) / mean_mag);
    set(BaseFeature::kSpectralEntropy, entropy / std::log2(n));
    set(BaseFeature::kSpectralCrest, peak / mean_mag);
    const double slope = (n * sfm - sf * sm) / (n * sff - sf * sf);
    set(BaseFeature::kSpectralSlope, slope / mean_mag);
  } else {
    set(BaseFeature::kSpectralFlatness, 1.0);
    set(BaseFeature::kSpectralEntropy, 1.0);
    set(BaseFeature::kSpectralCrest, 1.0);
  }

  // Flux between the spectra of the two half-frames.
  if (half_length_ > 0) {
    const auto m1 = dsp::magnitude_spectrum(frame.subspan(0, half_length_), half_window_, half_nfft_);
    const auto m2 = dsp::magnitude_spectrum(frame.subspan(half_length_, half_length_), half_window_, half_nfft_);
    double ss = 0.0;
    for (std::size_t k = 0; k < m1.size(); ++k) ss += (m2[k] - m1[k]) * (m2[k] - m1[k]);
    set(BaseFeature::kSpectralFlux, std::sqrt(ss));
  }

  // MFCC 1..13: DCT-II (orthonormal) of log mel-band magnitudes.
  {
    std::array<double, kMelBands> logmel{};
    for (std::size_t b = 0; b < kMelBands; ++b) {
      double e = 0.0;
      const auto& w = mel_[b];
      for (std::size_t k = 0; k < bins; ++k) e += w[k] * mag[k];
      logmel[b] = std::log(e + kLogFloor);
    }
    const double scale = std::sqrt(2.0 / kMelBands);
    for (std::size_t c = 1; c <= kMfccCount; ++c) {
      double acc = 0.0;
      for (std::size_t b = 0; b < kMelBands; ++b)
        acc += logmel[b] * std::cos(std::numbers::pi * static_cast<double>(c) * (static_cast<double>(b) + 0.5) /
                                    kMelBands);
      out[static_cast<std::size_t>(BaseFeature::kMfcc1) + c - 1] = scale * acc;
    }
  }

  set(BaseFeature::kF0, estimate_f0(frame, sample_rate_));
  set(BaseFeature::kLoudness, power > 0.0 ? rms * std::sqrt(a_power / power) : 0.0);
  return out;
}

std::vector<double> FrameAnalyzer::analyze(std::span<const double> frame, const BaseFeatureSet& set) const {
  const auto all = analyze(frame);
  std::vector<double> out;
  out.reserve(set.size());
  for (auto f : set.features()) out.push_back(all[static_cast<std::size_t>(f)]);
  return out;
}

std::vector<double> frame_features(std::span<const double> frame, std::uint32_t sample_rate,
                                   const BaseFeatureSet& set, dsp::WindowKind window) {
  if (frame.empty()) throw InputError("frame is empty");
  return FrameAnalyzer(frame.size(), sample_rate, window).analyze(frame, set);
}

Moments aggregate(std::span<const double> series) {
  Moments m;
  const std::size_t n = series.size();
  if (n == 0) return m;
  double sum = 0.0;
  for (double v : series) sum += v;
  m.mean = sum / static_cast<double>(n);
  if (n < 2) return m;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : series) {
    const double d = v - m.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double nn = static_cast<double>(n);
  m.std = std::sqrt(m2 / (nn - 1.0));
  m2 /= nn;
  m3 /= nn;
  m4 /= nn;
  // Relative cutoff so that rounding noise on a constant series counts as zero spread.
  if (m2 <= 1e-30 * std::max(1.0, m.mean * m.mean)) {
    m.std = 0.0;
    return m;
  }
  const double g1 = m3 / std::pow(m2, 1.5);
  const double g2 = m4 / (m2 * m2) - 3.0;
  if (n >= 3) m.skew = g1 * std::sqrt(nn * (nn - 1.0)) / (nn - 2.0);
  if (n >= 4) m.kurt = ((nn + 1.0) * g2 + 6.0) * (nn - 1.0) / ((nn - 2.0) * (nn - 3.0));
  return m;
}

std::size_t FeatureMatrix::column_index(std::string_view name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw InputError("missing feature column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<std::string> feature_column_names(const BaseFeatureSet& set) {
  std::vector<std::string> out;
  for (const auto& n : set.names())
    for (auto s : kStatisticNames) out.push_back(n + "__" + std::string(s));
  return out;
}

std::vector<double> extract_row(const AudioClip& clip, const FrameSpec& spec, const BaseFeatureSet& set) {
  const auto frames = frame_signal(clip, spec);
  const FrameAnalyzer analyzer(frames.front().size(), clip.sample_rate, spec.window);
  std::vector<std::vector<double>> series(set.size(), std::vector<double>(frames.size()));
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto all = analyzer.analyze(frames[t]);
    for (std::size_t f = 0; f < set.size(); ++f) series[f][t] = all[static_cast<std::size_t>(set.features()[f])];
  }
  std::vector<double> row;
  row.reserve(4 * set.size());
  for (const auto& s : series) {
    const Moments m = aggregate(s);
    row.insert(row.end(), {m.mean, m.std, m.skew, m.kurt});
  }
  return row;
}

namespace {

FeatureMatrix empty_matrix(std::size_t rows, const FrameSpec& spec, const BaseFeatureSet& set) {
  FeatureMatrix m;
  m.columns = feature_column_names(set);
  m.values = Matrix(rows, m.columns.size());
  m.spec_hash = spec.hash();
  m.set_hash = set.hash();
  return m;
}

void rethrow_first(const std::vector<std::optional<std::string>>& errors) {
  for (const auto& e : errors)
    if (e) throw InputError(*e);
}

}  // namespace

FeatureMatrix extract_matrix(std::span<const TrackSource> tracks, const FrameSpec& spec, const BaseFeatureSet& set) {
  spec.validate();
  if (tracks.empty()) throw InputError("no tracks to extract");
  std::size_t min_samples = std::numeric_limits<std::size_t>::max();
  for (const auto& t : tracks) min_samples = std::min(min_samples, probe_audio(t.path).frames);

  FeatureMatrix m = empty_matrix(tracks.size(), spec, set);
  std::vector<std::optional<std::string>> errors(tracks.size());
  const auto n = static_cast<std::ptrdiff_t>(tracks.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& t = tracks[static_cast<std::size_t>(i)];
    try {
      AudioClip clip = load_audio(t.path);
      clip.samples.resize(min_samples);
      const auto row = extract_row(clip, spec, set);
      std::copy(row.begin(), row.end(), m.values.row(static_cast<std::size_t>(i)).begin());
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = "track " + std::to_string(t.track_id) + ": " + e.what();
    }
  }
  rethrow_first(errors);
  for (const auto& t : tracks) m.track_ids.push_back(t.track_id);
  return m;
}

FeatureMatrix extract_matrix(std::span<const std::uint32_t> track_ids, std::span<const AudioClip> clips,
                             const FrameSpec& spec, const BaseFeatureSet& set) {
  spec.validate();
  if (track_ids.size() != clips.size()) throw InputError("track id and clip counts differ");
  if (clips.empty()) throw InputError("no tracks to extract");
  std::size_t min_samples = std::numeric_limits<std::size_t>::max();
  for (const auto& c : clips) min_samples = std::min(min_samples, c.samples.size());

  FeatureMatrix m = empty_matrix(clips.size(), spec, set);
  std::vector<std::optional<std::string>> errors(clips.size());
  const auto n = static_cast<std::ptrdiff_t>(clips.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      AudioClip clip;
      clip.sample_rate = clips[idx].sample_rate;
      clip.samples.assign(clips[idx].samples.begin(), clips[idx].samples.begin() + static_cast<std::ptrdiff_t>(min_samples));
      const auto row = extract_row(clip, spec, set);
      std::copy(row.begin(), row.end(), m.values.row(idx).begin());
    } catch (const std::exception& e) {
      errors[idx] = "track " + std::to_string(track_ids[idx]) + ": " + e.what();
    }
  }
  rethrow_first(errors);
  m.track_ids.assign(track_ids.begin(), track_ids.end());
  return m;
}

std::vector<std::string> constant_columns(const FeatureMatrix& m) {
  std::vector<std::string> out;
  if (m.values.rows() < 2) return out;
  for (std::size_t c = 0; c < m.values.cols(); ++c) {
    bool constant = true;
    for (std::size_t r = 1; r < m.values.rows() && constant; ++r)
      constant = m.values(r, c) == m.values(0, c);
    if (constant) out.push_back(m.columns[c]);
  }
  return out;
}

void write_feature_csv(std::ostream& out, const FeatureMatrix& m) {
  out << "track_id";
  for (const auto& c : m.columns) out << ',' << c;
  out << '\n';
  for (std::size_t r = 0; r < m.values.rows(); ++r) {
    out << m.track_ids[r];
    for (double v : m.values.row(r)) out << ',' << format_double(v);
    out << '\n';
  }
}

FeatureMatrix read_feature_csv(std::istream& in) {
  FeatureMatrix m;
  std::string line;
  std::vector<double> data;
  bool header = false;
  while (std::getline(in, line)) {
    if (trim(line).empty() || line.front() == '#') continue;
    auto cells = split(line, ',');
    if (!header) {
      if (cells.empty() || trim(cells[0]) != "track_id") throw InputError("feature CSV must start with track_id");
      m.columns.assign(cells.begin() + 1, cells.end());
      header = true;
      continue;
    }
    if (cells.size() != m.columns.size() + 1) throw InputError("feature CSV row has wrong width");
    std::uint32_t id = 0;
    std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), id);
    m.track_ids.push_back(id);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      double v = 0.0;
      const auto t = trim(cells[c]);
      auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (ec != std::errc{}) throw InputError("feature CSV: bad number '" + std::string(t) + "'");
      data.push_back(v);
    }
  }
  if (!header) throw InputError("feature CSV is empty");
  m.values = Matrix(m.track_ids.size(), m.columns.size());
  m.values.data() = std::move(data);
  return m;
}

// Binary cache layout (little-endian):
//   "MPFM" u32 version | str spec_hash | str set_hash | str corpus_hash |
//   u64 rows | u64 cols | cols x str | rows x u32 track id | rows*cols x f64
namespace {

constexpr std::uint32_t kCacheVersion = 1;

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_str(std::string& out, const std::string& s) {
  put_u64(out, s.size());
  out += s;
}

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}
  std::uint64_t u64(int width = 8) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  std::string str() {
    const auto n = u64();
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string raw(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw InputError("feature cache is truncated");
  }
  std::string bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_feature_cache(const std::filesystem::path& path, const FeatureMatrix& m) {
  std::string out = "MPFM";
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((kCacheVersion >> (8 * i)) & 0xff));
  put_str(out, m.spec_hash);
  put_str(out, m.set_hash);
  put_str(out, m.corpus_hash);
  put_u64(out, m.values.rows());
  put_u64(out, m.values.cols());
  for (const auto& c : m.columns) put_str(out, c);
  for (auto id : m.track_ids)
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((id >> (8 * i)) & 0xff));
  for (double v : m.values.data()) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u64(out, bits);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

FeatureMatrix read_feature_cache(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open feature cache " + path.string());
  Reader r(std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>()));
  if (r.raw(4) != "MPFM") throw InputError("not a feature cache: " + path.string());
  if (r.u64(4) != kCacheVersion) throw InputError("unsupported feature cache version");
  FeatureMatrix m;
  m.spec_hash = r.str();
  m.set_hash = r.str();
  m.corpus_hash = r.str();
  const auto rows = r.u64();
  const auto cols = r.u64();
  for (std::uint64_t c = 0; c < cols; ++c) m.columns.push_back(r.str());
  for (std::uint64_t i = 0; i < rows; ++i) m.track_ids.push_back(static_cast<std::uint32_t>(r.u64(4)));
  m.values = Matrix(rows, cols);
  for (double& v : m.values.data()) {
    const std::uint64_t bits = r.u64();
    std::memcpy(&v, &bits, sizeof v);
  }
  return m;
}

}  // namespace moodpipe
