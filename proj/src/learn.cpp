#include "moodpipe/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace moodpipe {

std::string_view family_name(Family f) {
  switch (f) {
    case Family::kNaiveBayes: return "nb";
    case Family::kSvm: return "svm";
    case Family::kMlp: return "mlp";
  }
  return "nb";
}

Family parse_family(std::string_view name) {
  const std::string n(trim(name));
  if (n == "nb" || n == "bayes" || n == "naive_bayes") return Family::kNaiveBayes;
  if (n == "svm" || n == "smo" || n == "svm_smo") return Family::kSvm;
  if (n == "mlp") return Family::kMlp;
  throw InputError("unknown classifier '" + n + "' (expected nb, svm or mlp)");
}

double Kernel::operator()(std::span<const double> a, std::span<const double> b) const {
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  if (degree == 1) return dot;
  return std::pow(dot, degree);
}

nlohmann::json to_json(const ClassifierSpec& s) {
  nlohmann::json j;
  j["family"] = s.name();
  j["seed"] = s.seed;
  if (s.family == Family::kSvm) {
    j["c"] = s.svm.c;
    j["tol"] = s.svm.tol;
    j["degree"] = s.svm.degree;
    j["max_iterations"] = s.svm.max_iterations;
    j["calibration_holdout"] = s.svm.calibration_holdout;
  } else if (s.family == Family::kMlp) {
    j["hidden"] = s.mlp.hidden;
    j["learning_rate"] = s.mlp.learning_rate;
    j["momentum"] = s.mlp.momentum;
    j["epochs"] = s.mlp.epochs;
  }
  return j;
}

ClassifierSpec classifier_from_json(const nlohmann::json& j) {
  ClassifierSpec s;
  if (j.is_string()) {
    s.family = parse_family(j.get<std::string>());
    return s;
  }
  s.family = parse_family(j.at("family").get<std::string>());
  s.seed = j.value("seed", std::uint64_t{0});
  s.svm.c = j.value("c", s.svm.c);
  s.svm.tol = j.value("tol", s.svm.tol);
  s.svm.degree = j.value("degree", s.svm.degree);
  s.svm.max_iterations = j.value("max_iterations", s.svm.max_iterations);
  s.svm.calibration_holdout = j.value("calibration_holdout", s.svm.calibration_holdout);
  s.mlp.hidden = j.value("hidden", s.mlp.hidden);
  s.mlp.learning_rate = j.value("learning_rate", s.mlp.learning_rate);
  s.mlp.momentum = j.value("momentum", s.mlp.momentum);
  s.mlp.epochs = j.value("epochs", s.mlp.epochs);
  if (!(s.svm.c > 0.0)) throw InputError("svm c must be positive");
  if (!(s.svm.tol > 0.0)) throw InputError("svm tol must be positive");
  if (s.svm.degree < 1) throw InputError("svm degree must be >= 1");
  if (s.mlp.hidden == 0) throw InputError("mlp hidden must be >= 1");
  return s;
}

// ---------------------------------------------------------------------------
// Naive Bayes

namespace {

void check_binary(std::span<const int> y, std::size_t rows) {
  if (y.size() != rows) throw InputError("label length does not match rows");
  bool has0 = false, has1 = false;
  for (int v : y) {
    if (v == 0) has0 = true;
    else if (v == 1) has1 = true;
    else throw InputError("labels must be 0/1");
  }
  if (!has0 || !has1) throw InputError("training labels contain a single class");
}

constexpr double kLog2Pi = 1.8378770664093453;

}  // namespace

NaiveBayesModel nb_train(const Dataset& data, std::span<const int> y) {
  check_binary(y, data.rows());
  const std::size_t n = data.rows(), d = data.cols();
  NaiveBayesModel m;
  std::array<std::size_t, 2> count{};
  for (int v : y) ++count[static_cast<std::size_t>(v)];
  for (int c = 0; c < 2; ++c) m.prior[c] = static_cast<double>(count[c]) / static_cast<double>(n);
  m.arity = data.arity;
  m.mean.assign(d, {0.0, 0.0});
  m.var.assign(d, {0.0, 0.0});
  m.table.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    if (data.is_discrete(j)) {
      const std::size_t k = data.arity[j];
      std::array<std::vector<double>, 2> hits{std::vector<double>(k, 0.0), std::vector<double>(k, 0.0)};
      for (std::size_t r = 0; r < n; ++r) {
        const auto v = static_cast<std::size_t>(std::lround(data.x(r, j)));
        if (v >= k) throw InputError("discrete value out of range in column '" + data.columns[j] + "'");
        hits[static_cast<std::size_t>(y[r])][v] += 1.0;
      }
      for (int c = 0; c < 2; ++c) {
        for (auto& h : hits[c]) h = (h + 1.0) / (static_cast<double>(count[c]) + static_cast<double>(k));
      }
      m.table[j] = std::move(hits);
    } else {
      std::array<double, 2> sum{}, sq{};
      for (std::size_t r = 0; r < n; ++r) sum[static_cast<std::size_t>(y[r])] += data.x(r, j);
      for (int c = 0; c < 2; ++c) m.mean[j][c] = sum[c] / static_cast<double>(count[c]);
      for (std::size_t r = 0; r < n; ++r) {
        const auto c = static_cast<std::size_t>(y[r]);
        const double dv = data.x(r, j) - m.mean[j][c];
        sq[c] += dv * dv;
      }
      // maximum-likelihood variance
      for (int c = 0; c < 2; ++c) m.var[j][c] = std::max(kVarianceFloor, sq[c] / static_cast<double>(count[c]));
    }
  }
  return m;
}

double NaiveBayesModel::predict_proba(std::span<const double> x) const {
  if (x.size() != arity.size()) throw InputError("naive Bayes input width mismatch");
  std::array<double, 2> lp{std::log(prior[0]), std::log(prior[1])};
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (arity[j] > 0) {
      long v = std::lround(x[j]);
      v = std::clamp(v, 0L, static_cast<long>(arity[j]) - 1);
      for (int c = 0; c < 2; ++c) lp[c] += std::log(table[j][c][static_cast<std::size_t>(v)]);
    } else {
      for (int c = 0; c < 2; ++c) {
        const double dv = x[j] - mean[j][c];
        lp[c] += -0.5 * (kLog2Pi + std::log(var[j][c]) + dv * dv / var[j][c]);
      }
    }
  }
  // log-sum-exp
  const double hi = std::max(lp[0], lp[1]);
  const double e0 = std::exp(lp[0] - hi), e1 = std::exp(lp[1] - hi);
  return e1 / (e0 + e1);
}

// ---------------------------------------------------------------------------
// Dispatch

double predict_proba(const BinaryModel& m, std::span<const double> x) {
  return std::visit([&](const auto& model) { return model.predict_proba(x); }, m);
}

BinaryModel train_binary(const Dataset& data, std::span<const int> y, const ClassifierSpec& spec) {
  switch (spec.family) {
    case Family::kNaiveBayes: return nb_train(data, y);
    case Family::kSvm: return svm_train(data, y, spec.svm, spec.seed);
    case Family::kMlp: return mlp_train(data, y, spec.mlp, spec.seed);
  }
  throw Error("unreachable");
}

namespace {

std::vector<std::array<std::uint8_t, kEmotionCount>> aligned_labels(const FeatureMatrix& features,
                                                                     const LabelMatrix& labels) {
  std::unordered_map<std::uint32_t, std::size_t> where;
  for (std::size_t i = 0; i < labels.track_ids.size(); ++i) where[labels.track_ids[i]] = i;
  std::vector<std::array<std::uint8_t, kEmotionCount>> out;
  out.reserve(features.track_ids.size());
  for (auto id : features.track_ids) {
    auto it = where.find(id);
    if (it == where.end()) throw InputError("track " + std::to_string(id) + " has features but no labels");
    out.push_back(labels.values[it->second]);
  }
  return out;
}

}  // namespace

MultilabelModel binary_relevance_train(const FeatureMatrix& features, const LabelMatrix& labels,
                                       const PreprocessSpec& preprocessing, const ClassifierSpec& spec,
                                       const PreprocessOptions& options) {
  const auto y = aligned_labels(features, labels);
  for (std::size_t e = 0; e < kEmotionCount; ++e) {
    std::size_t pos = 0;
    for (const auto& row : y) pos += row[e];
    if (pos == 0 || pos == y.size()) {
      throw InputError("emotion '" + std::string(emotion_name(kAllEmotions[e])) +
                       "' has a single class at threshold " + format_double(labels.threshold) +
                       "; try a different threshold");
    }
  }
  const FittedPreprocessing fitted = fit_preprocessing(features, y, preprocessing, options);
  MultilabelModel m;
  m.spec = spec;
  m.preprocessing = preprocessing.name();
  m.threshold = labels.threshold;
  m.inputs = fitted.inputs;
  std::array<std::optional<std::string>, kEmotionCount> failure;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t e = 0; e < kEmotionCount; ++e) {
    try {
      if (fitted.unusable[e]) throw InputError(*fitted.unusable[e]);
      const Dataset data = m.inputs[e].prepare(features);
      std::vector<int> ye(y.size());
      for (std::size_t r = 0; r < y.size(); ++r) ye[r] = y[r][e];
      ClassifierSpec s = spec;
      s.seed = mix_seed(spec.seed, e);
      m.models[e] = train_binary(data, ye, s);
    } catch (const std::exception& err) {
      failure[e] = std::string(emotion_name(kAllEmotions[e])) + ": " + err.what();
    }
  }
  for (const auto& f : failure)
    if (f) throw InputError(*f);
  return m;
}

std::vector<Prediction> predict(const MultilabelModel& model, const FeatureMatrix& features) {
  std::vector<Prediction> out(features.values.rows());
  for (std::size_t e = 0; e < kEmotionCount; ++e) {
    const Dataset data = model.inputs[e].prepare(features);
    for (std::size_t r = 0; r < data.rows(); ++r) {
      const double p = std::clamp(predict_proba(model.models[e], data.x.row(r)), 0.0, 1.0);
      out[r].probability[e] = p;
      out[r].label[e] = p >= 0.5 ? 1 : 0;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::json matrix_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from(const nlohmann::json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  m.data() = j.at("data").get<std::vector<double>>();
  if (m.data().size() != m.rows() * m.cols()) throw InputError("model JSON: matrix size mismatch");
  return m;
}

nlohmann::json model_json(const BinaryModel& bm) {
  nlohmann::json j;
  if (const auto* nb = std::get_if<NaiveBayesModel>(&bm)) {
    j["family"] = "nb";
    j["prior"] = nb->prior;
    j["arity"] = nb->arity;
    j["mean"] = nb->mean;
    j["var"] = nb->var;
    j["table"] = nb->table;
  } else if (const auto* svm = std::get_if<SvmModel>(&bm)) {
    j["family"] = "svm";
    j["degree"] = svm->kernel.degree;
    j["scale_min"] = svm->scale_min;
    j["scale_range"] = svm->scale_range;
    j["support"] = matrix_json(svm->support);
    j["coef"] = svm->coef;
    j["bias"] = svm->bias;
    j["converged"] = svm->converged;
    if (svm->platt) j["platt"] = {{"a", svm->platt->a}, {"b", svm->platt->b}};
  } else {
    const auto& mlp = std::get<MlpModel>(bm);
    j["family"] = "mlp";
    j["activation"] = "sigmoid";
    j["input_mean"] = mlp.input_mean;
    j["input_std"] = mlp.input_std;
    j["w1"] = matrix_json(mlp.w1);
    j["b1"] = mlp.b1;
    j["w2"] = mlp.w2;
    j["b2"] = mlp.b2;
  }
  return j;
}

BinaryModel model_from(const nlohmann::json& j) {
  const Family f = parse_family(j.at("family").get<std::string>());
  if (f == Family::kNaiveBayes) {
    NaiveBayesModel m;
    m.prior = j.at("prior").get<std::array<double, 2>>();
    m.arity = j.at("arity").get<std::vector<std::size_t>>();
    m.mean = j.at("mean").get<std::vector<std::array<double, 2>>>();
    m.var = j.at("var").get<std::vector<std::array<double, 2>>>();
    m.table = j.at("table").get<std::vector<std::array<std::vector<double>, 2>>>();
    return m;
  }
  if (f == Family::kSvm) {
    SvmModel m;
    m.kernel.degree = j.at("degree").get<int>();
    m.scale_min = j.at("scale_min").get<std::vector<double>>();
    m.scale_range = j.at("scale_range").get<std::vector<double>>();
    m.support = matrix_from(j.at("support"));
    m.coef = j.at("coef").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.converged = j.value("converged", true);
    if (j.contains("platt")) m.platt = PlattScaling{j["platt"].at("a").get<double>(), j["platt"].at("b").get<double>()};
    return m;
  }
  MlpModel m;
  m.input_mean = j.at("input_mean").get<std::vector<double>>();
  m.input_std = j.at("input_std").get<std::vector<double>>();
  m.w1 = matrix_from(j.at("w1"));
  m.b1 = j.at("b1").get<std::vector<double>>();
  m.w2 = j.at("w2").get<std::vector<double>>();
  m.b2 = j.at("b2").get<double>();
  return m;
}

}  // namespace

nlohmann::json to_json(const MultilabelModel& m) {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["classifier"] = to_json(m.spec);
  j["preprocessing"] = m.preprocessing;
  j["threshold"] = m.threshold;
  nlohmann::json per = nlohmann::json::array();
  for (std::size_t e = 0; e < kEmotionCount; ++e) {
    nlohmann::json ej;
    ej["emotion"] = emotion_name(kAllEmotions[e]);
    ej["columns"] = m.inputs[e].columns;
    if (m.inputs[e].discretizer) ej["discretizer"] = to_json(*m.inputs[e].discretizer);
    ej["model"] = model_json(m.models[e]);
    per.push_back(std::move(ej));
  }
  j["emotions"] = std::move(per);
  return j;
}

MultilabelModel multilabel_from_json(const nlohmann::json& j) {
  const int version = j.value("format_version", 0);
  if (version != kModelFormatVersion)
    throw InputError("unsupported model format version " + std::to_string(version));
  MultilabelModel m;
  m.spec = classifier_from_json(j.at("classifier"));
  m.preprocessing = j.at("preprocessing").get<std::string>();
  m.threshold = j.at("threshold").get<double>();
  const auto& per = j.at("emotions");
  if (per.size() != kEmotionCount) throw InputError("model JSON must hold 9 emotions");
  for (std::size_t e = 0; e < kEmotionCount; ++e) {
    m.inputs[e].columns = per[e].at("columns").get<std::vector<std::string>>();
    if (per[e].contains("discretizer")) m.inputs[e].discretizer = discretization_from_json(per[e]["discretizer"]);
    m.models[e] = model_from(per[e].at("model"));
  }
  return m;
}

}  // namespace moodpipe
