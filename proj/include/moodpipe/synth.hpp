#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "moodpipe/corpus.hpp"

namespace moodpipe {

/// Generator for a toy corpus whose audio encodes the nine labels: each
/// emotion switches one property of the signal (level, pitch, timbre,
/// modulation, noise, ...). Annotations are dealt so the label survives
/// both the 0.25 and 0.30 consensus thresholds.
struct SynthOptions {
  std::size_t tracks = 400;
  std::uint32_t sample_rate = 22050;
  double seconds = 5.0;
  /// Extra random length per track, in seconds (exercises truncation).
  double length_jitter = 0.25;
  /// Chance per (track, emotion) that the annotated label disagrees with the audio.
  double label_noise = 0.1;
  double prevalence = 0.3;
  std::size_t annotators = 30;
  std::uint64_t seed = 7;
};

using LabelBits = std::array<std::uint8_t, kEmotionCount>;

struct SynthTrack {
  std::uint32_t track_id = 0;
  Genre genre = Genre::kClassical;
  LabelBits audio_labels{};      // what the signal encodes
  LabelBits annotated_labels{};  // after label noise
  std::uint64_t seed = 0;
  std::size_t samples = 0;
};

struct SynthCorpus {
  SynthOptions options;
  std::vector<SynthTrack> tracks;
  AnnotationTable annotations;
};

/// Plans labels and annotations; audio is rendered on demand.
SynthCorpus plan_corpus(const SynthOptions& options);

AudioClip render_track(const SynthTrack& track, const SynthOptions& options);

/// Annotation sessions whose scores give exactly `labels` at both 0.25 and 0.30.
std::vector<AnnotationRecord> deal_annotations(std::uint32_t track_id, Genre genre, const LabelBits& labels,
                                               std::size_t annotators);

/// Writes annotations.csv and audio/<genre>/<id>.wav under `dir`; audio
/// rendering runs in parallel.
void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir);

}  // namespace moodpipe
