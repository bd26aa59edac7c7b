#include "moodpipe/labeling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <ostream>

namespace moodpipe {

namespace {

void check_threshold(double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw InputError("consensus threshold must lie in (0, 1), got " + format_double(threshold));
  }
}

bool passes(double score, double threshold, bool strict) {
  return strict ? score > threshold : score >= threshold;
}

}  // namespace

std::vector<int> LabelMatrix::column(Emotion e) const {
  std::vector<int> out(values.size());
  for (std::size_t j = 0; j < values.size(); ++j) out[j] = values[j][index_of(e)];
  return out;
}

double emotion_score(const AnnotationTable& table, std::uint32_t track_id, Emotion emotion) {
  if (!table.contains(track_id)) throw InputError("unknown track " + std::to_string(track_id));
  std::size_t n = 0;
  std::size_t positive = 0;
  for (const auto& r : table.records()) {
    if (r.track_id != track_id) continue;
    ++n;
    if (r.selections.test(index_of(emotion))) ++positive;
  }
  if (n == 0) throw InputError("track " + std::to_string(track_id) + " has no annotations");
  return static_cast<double>(positive) / static_cast<double>(n);
}

ScoreMatrix build_score_matrix(const AnnotationTable& table) {
  std::map<std::uint32_t, std::pair<std::size_t, std::array<std::size_t, kEmotionCount>>> tally;
  for (const auto& r : table.records()) {
    auto& [n, counts] = tally[r.track_id];
    ++n;
    for (std::size_t i = 0; i < kEmotionCount; ++i)
      if (r.selections.test(i)) ++counts[i];
  }
  ScoreMatrix out;
  for (const auto& [id, entry] : tally) {
    const auto& [n, counts] = entry;
    EmotionRow row{};
    for (std::size_t i = 0; i < kEmotionCount; ++i)
      row[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
    out.track_ids.push_back(id);
    out.values.push_back(row);
    out.n_per_track.push_back(n);
  }
  return out;
}

LabelMatrix apply_consensus(const ScoreMatrix& scores, double threshold, bool strict_greater) {
  check_threshold(threshold);
  LabelMatrix out;
  out.track_ids = scores.track_ids;
  out.threshold = threshold;
  out.strict_greater = strict_greater;
  out.values.resize(scores.values.size());
  for (std::size_t j = 0; j < scores.values.size(); ++j)
    for (std::size_t i = 0; i < kEmotionCount; ++i)
      out.values[j][i] = passes(scores.values[j][i], threshold, strict_greater) ? 1 : 0;
  return out;
}

namespace {

double mean_label_count(const ScoreMatrix& scores, double threshold, bool strict) {
  if (scores.values.empty()) return 0.0;
  std::size_t total = 0;
  for (const auto& row : scores.values)
    for (double s : row) total += passes(s, threshold, strict) ? 1 : 0;
  return static_cast<double>(total) / static_cast<double>(scores.values.size());
}

}  // namespace

DistributionStats distribution_stats(const ScoreMatrix& scores, double threshold, bool strict_greater) {
  check_threshold(threshold);
  DistributionStats st;
  st.threshold = threshold;
  const std::size_t n = scores.values.size();
  if (n == 0) return st;

  std::vector<double> counts(n);
  for (std::size_t j = 0; j < n; ++j) {
    EmotionRow sorted = scores.values[j];
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    for (std::size_t r = 0; r < kEmotionCount; ++r) st.trend[r] += sorted[r];
    counts[j] = static_cast<double>(
        std::count_if(sorted.begin(), sorted.end(), [&](double s) { return passes(s, threshold, strict_greater); }));
  }
  for (double& t : st.trend) t /= static_cast<double>(n);

  double sum = 0.0;
  for (double c : counts) sum += c;
  st.mean_labels_per_track = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double c : counts) ss += (c - st.mean_labels_per_track) * (c - st.mean_labels_per_track);
    st.std_labels_per_track = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return st;
}

std::vector<SweepPoint> threshold_sweep(const ScoreMatrix& scores, bool strict_greater) {
  std::vector<SweepPoint> out;
  for (int pct = 5; pct <= 95; ++pct) {
    const double t = pct / 100.0;
    out.push_back({t, mean_label_count(scores, t, strict_greater)});
  }
  return out;
}

std::vector<double> plateau_candidates(const std::vector<SweepPoint>& sweep, double flatness_tol) {
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < sweep.size(); ++i) {
    const double lo = std::min({sweep[i - 1].mean_labels_per_track, sweep[i].mean_labels_per_track,
                                sweep[i + 1].mean_labels_per_track});
    const double hi = std::max({sweep[i - 1].mean_labels_per_track, sweep[i].mean_labels_per_track,
                                sweep[i + 1].mean_labels_per_track});
    if (hi - lo < flatness_tol) out.push_back(sweep[i].threshold);
  }
  return out;
}

std::vector<double> plateau_candidates(const ScoreMatrix& scores, double flatness_tol, bool strict_greater) {
  return plateau_candidates(threshold_sweep(scores, strict_greater), flatness_tol);
}

void write_scores_csv(std::ostream& out, const ScoreMatrix& scores) {
  out << "track_id";
  for (Emotion e : kAllEmotions) out << ',' << emotion_name(e);
  out << '\n';
  for (std::size_t j = 0; j < scores.values.size(); ++j) {
    out << scores.track_ids[j];
    for (double v : scores.values[j]) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_labels_csv(std::ostream& out, const LabelMatrix& labels) {
  out << "track_id";
  for (Emotion e : kAllEmotions) out << ',' << emotion_name(e);
  out << '\n';
  for (std::size_t j = 0; j < labels.values.size(); ++j) {
    out << labels.track_ids[j];
    for (auto v : labels.values[j]) out << ',' << static_cast<int>(v);
    out << '\n';
  }
}

LabelMatrix read_labels_csv(std::istream& in) {
  LabelMatrix out;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (trim(line).empty() || line.front() == '#') continue;
    const auto cells = split(line, ',');
    if (!header) {
      if (cells.size() != kEmotionCount + 1) throw InputError("label CSV header must have 10 columns");
      for (std::size_t i = 0; i < kEmotionCount; ++i) {
        if (parse_emotion(cells[i + 1]) != kAllEmotions[i]) throw InputError("label CSV emotion columns out of order");
      }
      header = true;
      continue;
    }
    if (cells.size() != kEmotionCount + 1) throw InputError("label CSV row has wrong width");
    std::uint32_t id = 0;
    const auto t = trim(cells[0]);
    std::from_chars(t.data(), t.data() + t.size(), id);
    out.track_ids.push_back(id);
    std::array<std::uint8_t, kEmotionCount> row{};
    for (std::size_t i = 0; i < kEmotionCount; ++i) {
      const auto v = trim(cells[i + 1]);
      if (v != "0" && v != "1") throw InputError("label CSV cell must be 0 or 1");
      row[i] = v == "1" ? 1 : 0;
    }
    out.values.push_back(row);
  }
  if (!header) throw InputError("label CSV is empty");
  return out;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& sweep) {
  out << "threshold,mean_labels_per_track\n";
  for (const auto& p : sweep) out << format_double(p.threshold) << ',' << format_double(p.mean_labels_per_track) << '\n';
}

nlohmann::json to_json(const ScoreMatrix& scores) {
  nlohmann::json j;
  j["emotions"] = nlohmann::json::array();
  for (Emotion e : kAllEmotions) j["emotions"].push_back(emotion_name(e));
  j["track_ids"] = scores.track_ids;
  j["annotations_per_track"] = scores.n_per_track;
  j["values"] = scores.values;
  return j;
}

nlohmann::json to_json(const LabelMatrix& labels) {
  nlohmann::json j;
  j["emotions"] = nlohmann::json::array();
  for (Emotion e : kAllEmotions) j["emotions"].push_back(emotion_name(e));
  j["threshold"] = labels.threshold;
  j["strict_greater"] = labels.strict_greater;
  j["track_ids"] = labels.track_ids;
  j["values"] = labels.values;
  return j;
}

nlohmann::json to_json(const DistributionStats& st) {
  return {{"threshold", st.threshold},
          {"mean_labels_per_track", st.mean_labels_per_track},
          {"std_labels_per_track", st.std_labels_per_track},
          {"trend", st.trend}};
}

}  // namespace moodpipe
