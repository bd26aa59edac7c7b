#include "moodpipe/serial.hpp"

#include <algorithm>
#include <limits>

namespace moodpipe::serial {

FeatureMatrix extract_matrix(std::span<const std::uint32_t> track_ids, std::span<const AudioClip> clips,
                             const FrameSpec& spec, const BaseFeatureSet& set) {
  spec.validate();
  if (track_ids.size() != clips.size()) throw InputError("track id and clip counts differ");
  if (clips.empty()) throw InputError("no tracks to extract");
  std::size_t min_samples = std::numeric_limits<std::size_t>::max();
  for (const auto& c : clips) min_samples = std::min(min_samples, c.samples.size());

  FeatureMatrix m;
  m.columns = feature_column_names(set);
  m.values = Matrix(clips.size(), m.columns.size());
  m.spec_hash = spec.hash();
  m.set_hash = set.hash();
  for (std::size_t i = 0; i < clips.size(); ++i) {
    AudioClip clip;
    clip.sample_rate = clips[i].sample_rate;
    clip.samples.assign(clips[i].samples.begin(), clips[i].samples.begin() + static_cast<std::ptrdiff_t>(min_samples));
    std::vector<double> row;
    try {
      row = extract_row(clip, spec, set);
    } catch (const std::exception& e) {
      throw InputError("track " + std::to_string(track_ids[i]) + ": " + e.what());
    }
    std::copy(row.begin(), row.end(), m.values.row(i).begin());
  }
  m.track_ids.assign(track_ids.begin(), track_ids.end());
  return m;
}

DiscretizationModel fit_discretization(const Matrix& x, const std::vector<std::string>& columns,
                                       std::span<const int> cls, std::optional<Emotion> emotion) {
  if (x.rows() != cls.size()) throw InputError("label column length does not match matrix rows");
  DiscretizationModel m;
  m.fitted_on = emotion;
  m.columns = columns;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    const auto col = x.column(c);
    m.cuts.push_back(mdl_discretize(col, cls));
  }
  return m;
}

CorrelationTable cfs_correlations(const Dataset& data, std::span<const int> labels) {
  if (labels.size() != data.rows()) throw InputError("label column length does not match matrix rows");
  const std::size_t d = data.cols();
  CorrelationTable t;
  t.r_cf.resize(d);
  t.r_ff.assign(d, std::vector<double>(d, 1.0));
  const auto ints = [&](std::size_t c) {
    const auto col = data.x.column(c);
    std::vector<int> v(col.size());
    for (std::size_t i = 0; i < col.size(); ++i) v[i] = static_cast<int>(std::lround(col[i]));
    return v;
  };
  const std::vector<double> y(labels.begin(), labels.end());
  for (std::size_t i = 0; i < d; ++i) {
    t.r_cf[i] = data.is_discrete(i) ? symmetric_uncertainty(ints(i), labels) : abs_pearson(data.x.column(i), y);
    for (std::size_t j = i + 1; j < d; ++j) {
      const double r = data.is_discrete(i) && data.is_discrete(j) ? symmetric_uncertainty(ints(i), ints(j))
                                                                  : abs_pearson(data.x.column(i), data.x.column(j));
      t.r_ff[i][j] = r;
      t.r_ff[j][i] = r;
    }
  }
  return t;
}

EvalReport run_experiment(const ExperimentPlan& plan, const FeatureMatrix& features, const LabelMatrix& labels) {
  if (plan.initializations == 0) throw InputError("need at least one initialization");
  const LabelRows y = align_labels(features, labels);
  const auto assignment = fold_assignment(plan, y);
  std::vector<FoldContext> folds;
  for (std::size_t f = 0; f < plan.folds; ++f) folds.push_back(prepare_fold(plan, features, y, assignment, f));
  std::vector<CellResult> cells;
  for (std::size_t f = 0; f < plan.folds; ++f) {
    for (std::size_t i = 0; i < plan.initializations; ++i) {
      for (std::size_t e = 0; e < kEmotionCount; ++e) {
        if (!plan.classifier.stochastic() && i > 0) {
          // deterministic family: replicate the first initialization
          CellResult c = cells[cells.size() - kEmotionCount * i];
          c.init = i;
          c.seed = init_seed(plan.master_seed, i);
          cells.push_back(std::move(c));
          continue;
        }
        cells.push_back(evaluate_cell(plan, features, y, folds[f], i, e));
      }
    }
  }
  return assemble_report(plan, y, folds, std::move(cells));
}

}  // namespace moodpipe::serial
