#pragma once

// Single-threaded reference versions of the OpenMP kernels. They share the
// per-item code with the parallel versions and exist so tests can check
// that parallel schedules change nothing, and for the benchmarks.

#include "moodpipe/eval.hpp"
#include "moodpipe/features.hpp"
#include "moodpipe/preprocess.hpp"

namespace moodpipe::serial {

FeatureMatrix extract_matrix(std::span<const std::uint32_t> track_ids, std::span<const AudioClip> clips,
                             const FrameSpec& spec, const BaseFeatureSet& set);

DiscretizationModel fit_discretization(const Matrix& x, const std::vector<std::string>& columns,
                                       std::span<const int> cls, std::optional<Emotion> emotion = std::nullopt);

CorrelationTable cfs_correlations(const Dataset& data, std::span<const int> labels);

EvalReport run_experiment(const ExperimentPlan& plan, const FeatureMatrix& features, const LabelMatrix& labels);

}  // namespace moodpipe::serial
