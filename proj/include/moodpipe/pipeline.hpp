#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "moodpipe/eval.hpp"
#include "moodpipe/features.hpp"
#include "moodpipe/learn.hpp"

namespace moodpipe {

struct PipelineConfig {
  std::filesystem::path annotations;
  std::filesystem::path audio_dir;
  std::filesystem::path output_dir = "moodpipe-out";
  /// Empty means <output_dir>/cache; MOODPIPE_CACHE wins over both.
  std::filesystem::path cache_dir;

  FrameSpec frame;
  /// Base feature names; empty selects all 26.
  std::vector<std::string> features;

  std::vector<double> thresholds{0.30};
  bool strict_greater = false;
  std::vector<std::string> preprocessing{"raw", "cfs", "discr+cfs"};
  std::vector<ClassifierSpec> classifiers;

  std::size_t folds = 4;
  std::size_t initializations = 20;
  std::uint64_t master_seed = 1;
  bool stratified = false;
  bool pooled_variance = false;
  std::size_t cfs_patience = 5;

  PipelineConfig();

  nlohmann::json to_json() const;
  /// Relative paths in the file are resolved against `base_dir`.
  static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static PipelineConfig load(const std::filesystem::path& path);

  void validate() const;
  std::string hash() const;
  std::filesystem::path cache_path() const;
  BaseFeatureSet feature_set() const;
};

/// Full grid: seven preprocessing plans x three classifiers x
/// thresholds 0.25 and 0.30.
void apply_full_suite(PipelineConfig& config);

struct StageOptions {
  bool sweep = false;
  bool emit_plots = false;
};

/// Header line embedded in CSV and text outputs.
std::string provenance_line(const std::string& config_hash, const std::string& inputs_hash);

CorpusReport stage_ingest(const PipelineConfig& config, std::ostream& log);
void stage_labels(const PipelineConfig& config, std::ostream& log, const StageOptions& options = {});
FeatureMatrix stage_extract(const PipelineConfig& config, std::ostream& log);
void stage_preprocess(const PipelineConfig& config, std::ostream& log);
void stage_train(const PipelineConfig& config, std::ostream& log);
std::vector<EvalReport> stage_eval(const PipelineConfig& config, std::ostream& log, const StageOptions& options = {});
void stage_report(const PipelineConfig& config, std::ostream& log, const StageOptions& options = {});
void run_pipeline(const PipelineConfig& config, std::ostream& log, const StageOptions& options = {});

/// Loads the cached feature matrix for the config (InputError when absent).
FeatureMatrix load_cached_features(const PipelineConfig& config);

/// Text tables for one threshold, split into a selection block and a
/// t-test block.
std::string render_tables(const std::vector<EvalReport>& reports, bool rmse);

}  // namespace moodpipe
