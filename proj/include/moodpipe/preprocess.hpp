#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "moodpipe/common.hpp"
#include "moodpipe/corpus.hpp"
#include "moodpipe/features.hpp"

namespace moodpipe {

/// Learner input: a numeric matrix plus per-column arity. Arity 0 marks a
/// continuous column; arity m > 0 marks a discretized column holding interval
/// indices 0..m-1.
struct Dataset {
  Matrix x;
  std::vector<std::string> columns;
  std::vector<std::size_t> arity;

  std::size_t rows() const { return x.rows(); }
  std::size_t cols() const { return x.cols(); }
  bool is_discrete(std::size_t c) const { return arity[c] > 0; }
};

Dataset continuous_dataset(const FeatureMatrix& m);

// ---------------------------------------------------------------------------
// Information measures

/// Shannon entropy in bits of a class-count vector, with 0 log 0 = 0.
double entropy(std::span<const std::size_t> counts);

/// (H(A|C) + H(C|A)) / H(A,C); 0 when the joint entropy is 0.
double dissimilarity(std::span<const int> a, std::span<const int> c);

/// 2 * I(A;B) / (H(A) + H(B)); 0 when both columns are constant.
double symmetric_uncertainty(std::span<const int> a, std::span<const int> b);

/// |Pearson correlation|; 0 when either column is constant.
double abs_pearson(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// MDL discretization

/// Recursive entropy splitting with the Fayyad-Irani MDL stopping rule.
/// Returns sorted cut points; an empty list means a single interval.
std::vector<double> mdl_discretize(std::span<const double> column, std::span<const int> cls);

/// The MDL acceptance threshold for a split of a set of size n.
/// k, k1, k2 are the numbers of classes present in S, S1, S2.
double mdl_threshold(std::size_t n, std::size_t k, double h, std::size_t k1, double h1, std::size_t k2, double h2);

struct DiscretizationModel {
  std::optional<Emotion> fitted_on;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> cuts;

  /// Interval index of a value for column c (count of cuts strictly below it).
  std::size_t interval(std::size_t c, double value) const;
  std::size_t arity(std::size_t c) const { return cuts[c].size() + 1; }

  /// Model keeping only the named columns, in the given order.
  DiscretizationModel restrict_to(const std::vector<std::string>& names) const;
  /// Discretizes the matching columns of `m` (looked up by name).
  Dataset apply(const FeatureMatrix& m) const;
  Dataset apply(const Matrix& x) const;
};

/// Fits one cut list per column against `cls`; columns run in parallel.
DiscretizationModel fit_discretization(const Matrix& x, const std::vector<std::string>& columns,
                                       std::span<const int> cls, std::optional<Emotion> emotion = std::nullopt);

std::pair<Dataset, DiscretizationModel> discretize_matrix(const FeatureMatrix& m, std::span<const int> labels,
                                                          std::optional<Emotion> emotion = std::nullopt);

// ---------------------------------------------------------------------------
// Correlation-based feature selection

enum class MeritForm {
  kPrinted,  // k r_cf / sqrt(k + (k-1) r_ff)
  kHall,     // k r_cf / sqrt(k + k(k-1) r_ff)
};

double cfs_merit(std::size_t k, double r_cf, double r_ff, MeritForm form = MeritForm::kPrinted);

/// Feature-class and feature-feature correlations used by the search.
struct CorrelationTable {
  std::vector<double> r_cf;
  std::vector<std::vector<double>> r_ff;
};

/// Symmetric uncertainty between discrete columns, |Pearson| otherwise.
/// Pairs are computed in parallel.
CorrelationTable cfs_correlations(const Dataset& data, std::span<const int> labels);

double subset_merit(const CorrelationTable& t, std::span<const std::size_t> subset, MeritForm form);

struct CfsOptions {
  MeritForm form = MeritForm::kHall;
  std::size_t patience = 5;
};

/// Best-first forward search; returns column indices in ascending order.
std::vector<std::size_t> cfs_search(const CorrelationTable& t, const CfsOptions& options = {});

std::vector<std::string> cfs_select(const Dataset& data, std::span<const int> labels,
                                    const CfsOptions& options = {});

// ---------------------------------------------------------------------------
// t-test selection

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

/// Two-sided two-sample t-test (Welch unless `pooled`).
TTestResult two_sample_ttest(std::span<const double> a, std::span<const double> b, bool pooled = false);

/// Two-sided p-value for a t statistic.
double t_two_sided_p(double t, double df);

/// Columns whose presence/absence t-test gives p < p_threshold.
std::vector<std::string> ttest_select(const Dataset& data, std::span<const int> labels, double p_threshold,
                                      bool pooled = false, std::optional<Emotion> emotion = std::nullopt);

// ---------------------------------------------------------------------------
// Per-emotion selection and union

struct SelectionResult {
  std::string method;
  std::optional<double> p_threshold;
  std::array<std::vector<std::string>, kEmotionCount> per_emotion;
  std::vector<std::string> union_columns;
};

/// Union of the nine per-emotion sets, ordered by first appearance in
/// `column_order` (or lexicographically when no order is given).
SelectionResult union_selection(const std::array<std::vector<std::string>, kEmotionCount>& per_emotion,
                                std::string method, std::optional<double> p_threshold = std::nullopt,
                                const std::vector<std::string>& column_order = {});

// ---------------------------------------------------------------------------
// Preprocessing plans

enum class PreprocessKind { kRaw, kCfs, kDiscrCfs, kTtest, kDiscrTtest };

struct PreprocessSpec {
  PreprocessKind kind = PreprocessKind::kRaw;
  double p_threshold = 0.05;

  bool discretizes() const { return kind == PreprocessKind::kDiscrCfs || kind == PreprocessKind::kDiscrTtest; }
  bool selects() const { return kind != PreprocessKind::kRaw; }
  /// "raw", "cfs", "discr+cfs", "ttest(0.05)", "discr+ttest(0.01)", ...
  std::string name() const;
  static PreprocessSpec parse(std::string_view name);
};

struct PreprocessOptions {
  CfsOptions cfs;
  bool pooled_variance = false;
};

/// Preprocessing bound to one emotion's classifier: the input columns and,
/// when discretizing, the cut points fitted against that emotion.
struct EmotionInput {
  std::vector<std::string> columns;
  std::optional<DiscretizationModel> discretizer;

  Dataset prepare(const FeatureMatrix& m) const;
};

struct FittedPreprocessing {
  PreprocessSpec spec;
  std::array<EmotionInput, kEmotionCount> inputs;
  std::optional<SelectionResult> selection;
  /// Emotions whose labels made fitting impossible, with the reason.
  std::array<std::optional<std::string>, kEmotionCount> unusable;
};

/// Fits discretization and selection on the given rows. Each emotion is
/// handled independently; the selected union becomes every emotion's input.
FittedPreprocessing fit_preprocessing(const FeatureMatrix& train,
                                      const std::vector<std::array<std::uint8_t, kEmotionCount>>& labels,
                                      const PreprocessSpec& spec, const PreprocessOptions& options = {});

nlohmann::json to_json(const DiscretizationModel& m);
DiscretizationModel discretization_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SelectionResult& s);

}  // namespace moodpipe
