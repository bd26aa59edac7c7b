#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "moodpipe/common.hpp"

namespace moodpipe {

// GEMS-9 vocabulary. The order is part of every file format.
enum class Emotion : std::uint8_t {
  kAmazement,
  kSolemnity,
  kTenderness,
  kNostalgia,
  kCalmness,
  kPower,
  kJoyfulActivation,
  kTension,
  kSadness,
};

inline constexpr std::size_t kEmotionCount = 9;

inline constexpr std::array<Emotion, kEmotionCount> kAllEmotions = {
    Emotion::kAmazement, Emotion::kSolemnity,        Emotion::kTenderness,
    Emotion::kNostalgia, Emotion::kCalmness,         Emotion::kPower,
    Emotion::kJoyfulActivation, Emotion::kTension,   Emotion::kSadness,
};

std::string_view emotion_name(Emotion e);
std::optional<Emotion> parse_emotion(std::string_view name);
inline std::size_t index_of(Emotion e) { return static_cast<std::size_t>(e); }

enum class Genre : std::uint8_t { kClassical, kRock, kPop, kElectronic };

std::string_view genre_name(Genre g);
std::optional<Genre> parse_genre(std::string_view name);

using EmotionSet = std::bitset<kEmotionCount>;

/// One annotation session: a listener's selections for one track.
struct AnnotationRecord {
  std::uint32_t track_id = 0;
  Genre genre = Genre::kClassical;
  EmotionSet selections;

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

/// Maximum selections per annotation session.
inline constexpr std::size_t kMaxSelections = 3;

class AnnotationTable {
 public:
  AnnotationTable() = default;
  /// Validates records and derives the sorted track id list.
  explicit AnnotationTable(std::vector<AnnotationRecord> records);

  const std::vector<AnnotationRecord>& records() const { return records_; }
  const std::vector<std::uint32_t>& track_ids() const { return track_ids_; }

  /// Number of annotation sessions for a track (0 for unknown tracks).
  std::size_t annotation_count(std::uint32_t track_id) const;
  std::optional<Genre> genre_of(std::uint32_t track_id) const;
  bool contains(std::uint32_t track_id) const;

  friend bool operator==(const AnnotationTable& a, const AnnotationTable& b) {
    return a.records_ == b.records_;
  }

 private:
  std::vector<AnnotationRecord> records_;
  std::vector<std::uint32_t> track_ids_;
  std::map<std::uint32_t, std::size_t> counts_;
  std::map<std::uint32_t, Genre> genres_;
};

/// Parses the annotation CSV. Columns beyond the 11 recognised ones are
/// ignored and reported through `warnings` when given.
AnnotationTable parse_annotations(std::istream& in, std::vector<std::string>* warnings = nullptr);
AnnotationTable load_annotations(const std::filesystem::path& path,
                                 std::vector<std::string>* warnings = nullptr);
void write_annotations(std::ostream& out, const AnnotationTable& table);

/// Mono audio with samples in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  std::uint32_t sample_rate = 0;

  double duration_seconds() const {
    return sample_rate ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

enum class SampleFormat { kPcm16, kFloat32 };

struct AudioInfo {
  std::uint32_t sample_rate = 0;
  std::uint16_t channels = 0;
  SampleFormat format = SampleFormat::kPcm16;
  std::size_t frames = 0;  // samples per channel
};

/// Reads RIFF/WAVE headers without decoding samples.
AudioInfo probe_audio(const std::filesystem::path& path);
AudioClip load_audio(const std::filesystem::path& path);
/// Decodes WAV bytes already in memory; `name` is used in messages.
AudioClip decode_wav(std::string_view bytes, std::string_view name = "<memory>");

/// Writes an interleaved WAV file. `channels` holds one sample vector per channel.
void write_wav(const std::filesystem::path& path, const std::vector<std::vector<double>>& channels,
               std::uint32_t sample_rate, SampleFormat format);

/// Locates `<id>.wav` directly in `audio_dir` or in a genre subdirectory.
std::optional<std::filesystem::path> find_track_audio(const std::filesystem::path& audio_dir,
                                                      std::uint32_t track_id,
                                                      std::optional<Genre> genre = std::nullopt);

struct CorpusReport {
  std::vector<std::uint32_t> missing_audio;
  std::vector<std::uint32_t> audio_without_annotations;
  std::map<std::string, std::size_t> tracks_per_genre;
  std::size_t track_count = 0;
  std::size_t annotation_count = 0;
  std::size_t min_samples = 0;
  double min_duration_seconds = 0.0;
  double max_duration_seconds = 0.0;
  /// Track id -> audio path for tracks with both annotations and audio.
  std::map<std::uint32_t, std::string> audio_paths;
  std::vector<std::string> problems;
};

CorpusReport validate_corpus(const AnnotationTable& table, const std::filesystem::path& audio_dir);

nlohmann::json to_json(const CorpusReport& report);

}  // namespace moodpipe
