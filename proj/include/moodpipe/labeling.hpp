#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "moodpipe/corpus.hpp"

namespace moodpipe {

using EmotionRow = std::array<double, kEmotionCount>;

/// Fraction of a track's annotators that selected each emotion.
struct ScoreMatrix {
  std::vector<std::uint32_t> track_ids;
  std::vector<EmotionRow> values;
  std::vector<std::size_t> n_per_track;
};

/// Validated binary labels. `values[j][i]` is the label of emotion i on track j.
struct LabelMatrix {
  std::vector<std::uint32_t> track_ids;
  std::vector<std::array<std::uint8_t, kEmotionCount>> values;
  double threshold = 0.0;
  bool strict_greater = false;

  std::vector<int> column(Emotion e) const;
};

struct DistributionStats {
  double threshold = 0.0;
  double mean_labels_per_track = 0.0;
  double std_labels_per_track = 0.0;
  /// trend[r] = corpus mean of each track's (r+1)-th largest score.
  EmotionRow trend{};
};

/// Mean of a_k over the track's annotations.
double emotion_score(const AnnotationTable& table, std::uint32_t track_id, Emotion emotion);

ScoreMatrix build_score_matrix(const AnnotationTable& table);

/// Label is 1 when score >= threshold (or > with `strict_greater`).
LabelMatrix apply_consensus(const ScoreMatrix& scores, double threshold, bool strict_greater = false);

DistributionStats distribution_stats(const ScoreMatrix& scores, double threshold, bool strict_greater = false);

struct SweepPoint {
  double threshold;
  double mean_labels_per_track;
};

/// Mean validated labels per track for thresholds 0.05, 0.06, ..., 0.95.
std::vector<SweepPoint> threshold_sweep(const ScoreMatrix& scores, bool strict_greater = false);

inline constexpr double kDefaultFlatnessTol = 0.05;

/// Thresholds from the sweep whose mean label count varies by less than
/// `flatness_tol` over a window of three consecutive steps.
std::vector<double> plateau_candidates(const std::vector<SweepPoint>& sweep,
                                       double flatness_tol = kDefaultFlatnessTol);
std::vector<double> plateau_candidates(const ScoreMatrix& scores, double flatness_tol = kDefaultFlatnessTol,
                                       bool strict_greater = false);

void write_scores_csv(std::ostream& out, const ScoreMatrix& scores);
void write_labels_csv(std::ostream& out, const LabelMatrix& labels);
LabelMatrix read_labels_csv(std::istream& in);
void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& sweep);

nlohmann::json to_json(const ScoreMatrix& scores);
nlohmann::json to_json(const LabelMatrix& labels);
nlohmann::json to_json(const DistributionStats& stats);

}  // namespace moodpipe
