#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "moodpipe/common.hpp"
#include "moodpipe/corpus.hpp"
#include "moodpipe/labeling.hpp"
#include "moodpipe/preprocess.hpp"

namespace moodpipe {

inline constexpr int kModelFormatVersion = 1;

enum class Family { kNaiveBayes, kSvm, kMlp };

std::string_view family_name(Family f);
Family parse_family(std::string_view name);

/// Polynomial kernel (x.y)^degree; degree 1 is the linear kernel.
struct Kernel {
  int degree = 1;
  double operator()(std::span<const double> a, std::span<const double> b) const;
};

struct SvmParams {
  double c = 1.0;
  double tol = 1e-3;
  int degree = 1;
  /// Hard cap on SMO steps; 0 picks max(10^6, 100 n).
  std::size_t max_iterations = 0;
  /// Share of the training rows held out for fitting the Platt sigmoid.
  double calibration_holdout = 0.2;
};

struct MlpParams {
  std::size_t hidden = 80;
  double learning_rate = 0.3;
  double momentum = 0.2;
  std::size_t epochs = 500;
};

struct ClassifierSpec {
  Family family = Family::kNaiveBayes;
  SvmParams svm;
  MlpParams mlp;
  std::uint64_t seed = 0;

  /// "nb", "svm", "mlp"
  std::string name() const { return std::string(family_name(family)); }
  bool stochastic() const { return family != Family::kNaiveBayes; }
};

nlohmann::json to_json(const ClassifierSpec& s);
ClassifierSpec classifier_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Naive Bayes

struct NaiveBayesModel {
  std::array<double, 2> prior{};
  std::vector<std::size_t> arity;
  // Continuous columns: per class mean and variance.
  std::vector<std::array<double, 2>> mean;
  std::vector<std::array<double, 2>> var;
  // Discrete columns: per class smoothed category probabilities.
  std::vector<std::array<std::vector<double>, 2>> table;

  /// Posterior P(class = 1 | x).
  double predict_proba(std::span<const double> x) const;
};

inline constexpr double kVarianceFloor = 1e-9;

NaiveBayesModel nb_train(const Dataset& data, std::span<const int> y);

// ---------------------------------------------------------------------------
// SVM

struct SmoOptions {
  double c = 1.0;
  double tol = 1e-3;
  Kernel kernel;
  std::size_t max_iterations = 0;
  /// Permutes the scan order used to break selection ties.
  std::uint64_t seed = 0;
  /// Called with alpha after every update (monotonicity checks).
  std::function<void(std::span<const double>)> on_step;
};

struct SmoSolution {
  std::vector<double> alpha;
  double bias = 0.0;  // f(x) = sum alpha_i y_i K(x_i, x) + bias
  bool converged = false;
  std::size_t iterations = 0;
};

/// Gram matrix of the rows of x.
Matrix gram_matrix(const Matrix& x, const Kernel& kernel);

/// 1'a - 1/2 sum_ij a_i a_j y_i y_j K_ij
double svm_dual_objective(const Matrix& gram, std::span<const int> y, std::span<const double> alpha);

/// Solves the soft-margin dual on x as given (no scaling). y is +1/-1.
SmoSolution smo_solve(const Matrix& x, std::span<const int> y, const SmoOptions& options);

struct PlattScaling {
  double a = 0.0;
  double b = 0.0;
  double operator()(double f) const;
};

/// Regularized maximum-likelihood sigmoid fit with smoothed targets.
/// y is 0/1 (or +1/-1; positive means class 1).
PlattScaling platt_fit(std::span<const double> decision, std::span<const int> y);

struct SvmModel {
  Kernel kernel;
  std::vector<double> scale_min;
  std::vector<double> scale_range;
  Matrix support;                 // scaled support vectors
  std::vector<double> coef;       // alpha_i * y_i
  double bias = 0.0;
  std::optional<PlattScaling> platt;
  bool converged = true;

  std::vector<double> scale(std::span<const double> x) const;
  double decision(std::span<const double> x) const;
  double predict_proba(std::span<const double> x) const;
};

/// Scales to [0,1] with training min/max, solves by SMO; no calibration.
/// y is 0/1.
SvmModel smo_train(const Dataset& data, std::span<const int> y, const SvmParams& params, std::uint64_t seed);

/// Fits the model's sigmoid on the given rows.
void platt_calibrate(SvmModel& model, const Dataset& data, std::span<const int> y);

/// Inner holdout calibration followed by a refit on all rows.
SvmModel svm_train(const Dataset& data, std::span<const int> y, const SvmParams& params, std::uint64_t seed);

// ---------------------------------------------------------------------------
// MLP

struct MlpModel {
  std::vector<double> input_mean;
  std::vector<double> input_std;
  Matrix w1;                // hidden x inputs
  std::vector<double> b1;   // hidden
  std::vector<double> w2;   // hidden
  double b2 = 0.0;

  double forward_standardized(std::span<const double> z) const;
  double predict_proba(std::span<const double> x) const;
};

/// Mean squared-error loss 1/(2n) sum (o - y)^2 of a network on already
/// standardized inputs, with its gradient in the layout of the model's
/// weights (w1 row-major, b1, w2, b2).
struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};

LossAndGradient mlp_loss(const MlpModel& net, const Matrix& z, std::span<const int> y);
std::vector<double> mlp_parameters(const MlpModel& net);
void mlp_set_parameters(MlpModel& net, std::span<const double> params);

/// Randomly initialized network in U[-0.5, 0.5].
MlpModel mlp_init(std::size_t inputs, std::size_t hidden, std::uint64_t seed);

MlpModel mlp_train(const Dataset& data, std::span<const int> y, const MlpParams& params, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Binary relevance

using BinaryModel = std::variant<NaiveBayesModel, SvmModel, MlpModel>;

double predict_proba(const BinaryModel& m, std::span<const double> x);

/// Trains one binary model; y is 0/1 and must contain both classes.
BinaryModel train_binary(const Dataset& data, std::span<const int> y, const ClassifierSpec& spec);

struct MultilabelModel {
  ClassifierSpec spec;
  std::string preprocessing;
  double threshold = 0.0;
  std::array<EmotionInput, kEmotionCount> inputs;
  std::array<BinaryModel, kEmotionCount> models;
};

struct Prediction {
  std::array<double, kEmotionCount> probability{};
  std::array<std::uint8_t, kEmotionCount> label{};
};

/// Fits preprocessing and one model per emotion on all rows. Rows of
/// `features` and `labels` are matched by track id.
MultilabelModel binary_relevance_train(const FeatureMatrix& features, const LabelMatrix& labels,
                                       const PreprocessSpec& preprocessing, const ClassifierSpec& spec,
                                       const PreprocessOptions& options = {});

/// Predictions for every row of `features`.
std::vector<Prediction> predict(const MultilabelModel& model, const FeatureMatrix& features);

nlohmann::json to_json(const MultilabelModel& m);
MultilabelModel multilabel_from_json(const nlohmann::json& j);

}  // namespace moodpipe
