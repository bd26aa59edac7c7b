#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "moodpipe/features.hpp"
#include "moodpipe/labeling.hpp"
#include "moodpipe/learn.hpp"
#include "moodpipe/preprocess.hpp"

namespace moodpipe {

using LabelRows = std::vector<std::array<std::uint8_t, kEmotionCount>>;

/// Fold id per row: a seeded shuffle dealt round-robin into k folds.
std::vector<std::size_t> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

/// Same, but rows are dealt in order of their number of positive labels so
/// every fold sees a similar label-count mix.
std::vector<std::size_t> stratified_kfold_split(const LabelRows& labels, std::size_t k, std::uint64_t seed);

/// Percent of positions where pred == truth.
double accuracy(std::span<const int> pred, std::span<const int> truth);
/// sqrt(mean((p - t)^2)); probabilities must lie in [0,1].
double rmse(std::span<const double> prob, std::span<const int> truth);

struct ExperimentPlan {
  double threshold = 0.30;
  PreprocessSpec preprocessing;
  ClassifierSpec classifier;
  std::size_t folds = 4;
  std::size_t initializations = 20;
  std::uint64_t master_seed = 1;
  bool stratified = false;
  PreprocessOptions preprocess_options;
};

nlohmann::json to_json(const ExperimentPlan& p);

/// Seed of initialization i.
std::uint64_t init_seed(std::uint64_t master, std::size_t init);

struct CellResult {
  std::size_t fold = 0;
  std::size_t init = 0;
  std::uint64_t seed = 0;
  std::size_t emotion = 0;
  double accuracy = std::numeric_limits<double>::quiet_NaN();
  double rmse = std::numeric_limits<double>::quiet_NaN();
  std::optional<std::string> skipped;
  /// Hard predictions on the fold's test rows (empty when skipped).
  std::vector<std::uint8_t> predicted;
};

struct MetricSummary {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double std = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = 0;
};

struct EmotionSummary {
  MetricSummary accuracy;
  MetricSummary rmse;
  /// Majority-class share over all rows, in percent.
  double base_rate = 0.0;
  std::size_t skipped_cells = 0;
  std::optional<std::string> skip_reason;
};

struct EvalReport {
  std::string preprocessing;
  std::string classifier;
  double threshold = 0.0;
  std::size_t folds = 0;
  std::size_t initializations = 0;
  std::uint64_t master_seed = 0;
  std::size_t rows = 0;
  std::array<EmotionSummary, kEmotionCount> emotions;
  /// Mean and population std of the per-emotion means.
  MetricSummary class_accuracy;
  MetricSummary class_rmse;
  /// Share of test rows with all 9 labels right; extra, not part of the tables.
  MetricSummary subset_accuracy;
  std::vector<CellResult> cells;
};

/// Optional instrumentation: called with the row indices each fit sees.
struct ExperimentHooks {
  std::function<void(std::size_t fold, std::string_view stage, std::span<const std::size_t> rows)> on_fit;
};

/// Everything fitted on one fold's training rows.
struct FoldContext {
  std::size_t fold = 0;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  FittedPreprocessing preprocessing;
};

/// Reorders label rows to match the feature matrix's track order.
LabelRows align_labels(const FeatureMatrix& features, const LabelMatrix& labels);

std::vector<std::size_t> fold_assignment(const ExperimentPlan& plan, const LabelRows& labels);

FoldContext prepare_fold(const ExperimentPlan& plan, const FeatureMatrix& features, const LabelRows& labels,
                         const std::vector<std::size_t>& assignment, std::size_t fold,
                         const ExperimentHooks* hooks = nullptr);

/// Trains and scores one (fold, initialization, emotion) cell.
CellResult evaluate_cell(const ExperimentPlan& plan, const FeatureMatrix& features, const LabelRows& labels,
                         const FoldContext& ctx, std::size_t init, std::size_t emotion,
                         const ExperimentHooks* hooks = nullptr);

/// Deterministic reduction of cells (any order) into a report.
EvalReport assemble_report(const ExperimentPlan& plan, const LabelRows& labels,
                           const std::vector<FoldContext>& folds, std::vector<CellResult> cells);

/// Cross-validated evaluation; folds and cells run in parallel.
EvalReport run_experiment(const ExperimentPlan& plan, const FeatureMatrix& features, const LabelMatrix& labels,
                          const ExperimentHooks* hooks = nullptr);

nlohmann::json to_json(const EvalReport& r, bool include_cells = false);
EvalReport report_from_json(const nlohmann::json& j);

}  // namespace moodpipe
