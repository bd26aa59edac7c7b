#include "moodpipe/preprocess.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace moodpipe {

Dataset continuous_dataset(const FeatureMatrix& m) {
  return Dataset{m.values, m.columns, std::vector<std::size_t>(m.columns.size(), 0)};
}

double entropy(std::span<const std::size_t> counts) {
  std::size_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw InputError("entropy of an empty partition");
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

namespace {

struct Contingency {
  std::map<std::pair<int, int>, std::size_t> joint;
  std::map<int, std::size_t> a, b;
};

Contingency tabulate(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw InputError("column lengths differ");
  if (a.empty()) throw InputError("columns are empty");
  Contingency t;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++t.joint[{a[i], b[i]}];
    ++t.a[a[i]];
    ++t.b[b[i]];
  }
  return t;
}

template <typename Map>
double entropy_of(const Map& m) {
  std::vector<std::size_t> counts;
  counts.reserve(m.size());
  for (const auto& [k, v] : m) counts.push_back(v);
  return entropy(counts);
}

}  // namespace

double dissimilarity(std::span<const int> a, std::span<const int> c) {
  const Contingency t = tabulate(a, c);
  const double hac = entropy_of(t.joint);
  if (hac <= 0.0) return 0.0;
  const double ha = entropy_of(t.a);
  const double hc = entropy_of(t.b);
  // H(A|C) = H(A,C) - H(C), H(C|A) = H(A,C) - H(A)
  return ((hac - hc) + (hac - ha)) / hac;
}

double symmetric_uncertainty(std::span<const int> a, std::span<const int> b) {
  const Contingency t = tabulate(a, b);
  const double ha = entropy_of(t.a);
  const double hb = entropy_of(t.b);
  if (ha + hb <= 0.0) return 0.0;
  const double hab = entropy_of(t.joint);
  return std::clamp(2.0 * (ha + hb - hab) / (ha + hb), 0.0, 1.0);
}

double abs_pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("column lengths differ");
  const std::size_t n = a.size();
  if (n < 2) return 0.0;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return std::min(1.0, std::abs(sab) / std::sqrt(saa * sbb));
}

// ---------------------------------------------------------------------------
// MDL

double mdl_threshold(std::size_t n, std::size_t k, double h, std::size_t k1, double h1, std::size_t k2, double h2) {
  const double delta = std::log2(std::pow(3.0, static_cast<double>(k)) - 2.0) -
                       (static_cast<double>(k) * h - static_cast<double>(k1) * h1 - static_cast<double>(k2) * h2);
  return (std::log2(static_cast<double>(n - 1)) + delta) / static_cast<double>(n);
}

namespace {

// A run of equal attribute values with its class histogram.
struct ValueGroup {
  double value;
  std::vector<std::size_t> counts;
  std::size_t size;
  int pure_class;  // -1 when mixed
};

std::size_t classes_present(std::span<const std::size_t> counts) {
  return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }));
}

void split_groups(const std::vector<ValueGroup>& groups, std::size_t lo, std::size_t hi, std::size_t nclass,
                  std::vector<double>& cuts) {
  if (hi - lo < 2) return;
  std::vector<std::size_t> total(nclass, 0);
  for (std::size_t g = lo; g < hi; ++g)
    for (std::size_t c = 0; c < nclass; ++c) total[c] += groups[g].counts[c];
  const std::size_t n = std::accumulate(total.begin(), total.end(), std::size_t{0});
  if (n < 2) return;
  const double h = entropy(total);
  if (h <= 0.0) return;

  std::vector<std::size_t> left(nclass, 0), right(nclass, 0);
  std::size_t n_left = 0;
  std::size_t best = 0;
  double best_e = std::numeric_limits<double>::infinity();
  for (std::size_t g = lo; g + 1 < hi; ++g) {
    for (std::size_t c = 0; c < nclass; ++c) left[c] += groups[g].counts[c];
    n_left += groups[g].size;
    // Boundary points only: skip cuts between two pure groups of the same class.
    const int a = groups[g].pure_class, b = groups[g + 1].pure_class;
    if (a >= 0 && a == b) continue;
    for (std::size_t c = 0; c < nclass; ++c) right[c] = total[c] - left[c];
    const double e = (static_cast<double>(n_left) * entropy(left) +
                      static_cast<double>(n - n_left) * entropy(right)) / static_cast<double>(n);
    if (e < best_e - 1e-12) {
      best_e = e;
      best = g + 1;
    }
  }
  if (best == 0) return;

  std::fill(left.begin(), left.end(), 0);
  for (std::size_t g = lo; g < best; ++g)
    for (std::size_t c = 0; c < nclass; ++c) left[c] += groups[g].counts[c];
  for (std::size_t c = 0; c < nclass; ++c) right[c] = total[c] - left[c];
  const double h1 = entropy(left), h2 = entropy(right);
  const double gain = h - best_e;
  const double threshold = mdl_threshold(n, classes_present(total), h, classes_present(left), h1,
                                         classes_present(right), h2);
  if (!(gain > threshold)) return;

  cuts.push_back((groups[best - 1].value + groups[best].value) / 2.0);
  split_groups(groups, lo, best, nclass, cuts);
  split_groups(groups, best, hi, nclass, cuts);
}

}  // namespace

std::vector<double> mdl_discretize(std::span<const double> column, std::span<const int> cls) {
  if (column.size() != cls.size()) throw InputError("column and class lengths differ");
  if (column.size() < 2) throw InputError("discretization needs at least two values");
  for (int c : cls)
    if (c < 0) throw InputError("class labels must be non-negative");
  const std::size_t nclass = static_cast<std::size_t>(*std::max_element(cls.begin(), cls.end())) + 1;

  std::vector<std::size_t> order(column.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });

  std::vector<ValueGroup> groups;
  for (std::size_t i : order) {
    if (groups.empty() || groups.back().value != column[i]) {
      groups.push_back({column[i], std::vector<std::size_t>(nclass, 0), 0, cls[i]});
    }
    auto& g = groups.back();
    ++g.counts[static_cast<std::size_t>(cls[i])];
    ++g.size;
    if (g.pure_class != cls[i]) g.pure_class = -1;
  }

  std::vector<double> cuts;
  split_groups(groups, 0, groups.size(), nclass, cuts);
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

std::size_t DiscretizationModel::interval(std::size_t c, double value) const {
  const auto& cs = cuts[c];
  return static_cast<std::size_t>(std::lower_bound(cs.begin(), cs.end(), value) - cs.begin());
}

DiscretizationModel DiscretizationModel::restrict_to(const std::vector<std::string>& names) const {
  DiscretizationModel out;
  out.fitted_on = fitted_on;
  for (const auto& n : names) {
    auto it = std::find(columns.begin(), columns.end(), n);
    if (it == columns.end()) throw InputError("discretization model lacks column '" + n + "'");
    out.columns.push_back(n);
    out.cuts.push_back(cuts[static_cast<std::size_t>(it - columns.begin())]);
  }
  return out;
}

Dataset DiscretizationModel::apply(const Matrix& x) const {
  if (x.cols() != columns.size()) throw InputError("matrix width does not match discretization model");
  Dataset d{Matrix(x.rows(), x.cols()), columns, {}};
  for (std::size_t c = 0; c < columns.size(); ++c) d.arity.push_back(arity(c));
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) d.x(r, c) = static_cast<double>(interval(c, x(r, c)));
  return d;
}

Dataset DiscretizationModel::apply(const FeatureMatrix& m) const {
  std::vector<std::size_t> idx;
  for (const auto& n : columns) idx.push_back(m.column_index(n));
  return apply(m.values.take_cols(idx));
}

DiscretizationModel fit_discretization(const Matrix& x, const std::vector<std::string>& columns,
                                       std::span<const int> cls, std::optional<Emotion> emotion) {
  if (x.rows() != cls.size()) throw InputError("label column length does not match matrix rows");
  DiscretizationModel m;
  m.fitted_on = emotion;
  m.columns = columns;
  m.cuts.resize(x.cols());
  const auto ncols = static_cast<std::ptrdiff_t>(x.cols());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < ncols; ++c) {
    const auto col = x.column(static_cast<std::size_t>(c));
    m.cuts[static_cast<std::size_t>(c)] = mdl_discretize(col, cls);
  }
  return m;
}

std::pair<Dataset, DiscretizationModel> discretize_matrix(const FeatureMatrix& m, std::span<const int> labels,
                                                          std::optional<Emotion> emotion) {
  for (int v : labels)
    if (v != 0 && v != 1) throw InputError("label column must be binary");
  DiscretizationModel model = fit_discretization(m.values, m.columns, labels, emotion);
  Dataset d = model.apply(m.values);
  return {std::move(d), std::move(model)};
}

// ---------------------------------------------------------------------------
// t-test

double t_two_sided_p(double t, double df) {
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return 0.0;
  if (!(df > 0.0)) return 1.0;
  const boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

TTestResult two_sample_ttest(std::span<const double> a, std::span<const double> b, bool pooled) {
  if (a.size() < 2 || b.size() < 2) throw InputError("t-test needs at least two values per group");
  const auto moments = [](std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::pair{m, ss / static_cast<double>(v.size() - 1)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  TTestResult r;
  double se2;
  if (pooled) {
    r.df = na + nb - 2.0;
    const double sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / r.df;
    se2 = sp2 * (1.0 / na + 1.0 / nb);
  } else {
    const double qa = va / na, qb = vb / nb;
    se2 = qa + qb;
    const double denom = qa * qa / (na - 1.0) + qb * qb / (nb - 1.0);
    r.df = denom > 0.0 ? se2 * se2 / denom : na + nb - 2.0;
  }
  const double diff = ma - mb;
  if (se2 <= 0.0) {
    r.t = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  } else {
    r.t = diff / std::sqrt(se2);
  }
  r.p = t_two_sided_p(r.t, r.df);
  return r;
}

std::vector<std::string> ttest_select(const Dataset& data, std::span<const int> labels, double p_threshold,
                                      bool pooled, std::optional<Emotion> emotion) {
  if (labels.size() != data.rows()) throw InputError("label column length does not match matrix rows");
  std::vector<std::size_t> present, absent;
  for (std::size_t r = 0; r < labels.size(); ++r) (labels[r] ? present : absent).push_back(r);
  if (present.size() < 2 || absent.size() < 2) {
    const std::string who = emotion ? std::string(emotion_name(*emotion)) : std::string("label");
    throw InputError("t-test for '" + who + "' needs at least two rows in each class");
  }
  std::vector<std::string> out;
  std::vector<double> a(present.size()), b(absent.size());
  for (std::size_t c = 0; c < data.cols(); ++c) {
    for (std::size_t i = 0; i < present.size(); ++i) a[i] = data.x(present[i], c);
    for (std::size_t i = 0; i < absent.size(); ++i) b[i] = data.x(absent[i], c);
    if (two_sample_ttest(a, b, pooled).p < p_threshold) out.push_back(data.columns[c]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Union and plans

SelectionResult union_selection(const std::array<std::vector<std::string>, kEmotionCount>& per_emotion,
                                std::string method, std::optional<double> p_threshold,
                                const std::vector<std::string>& column_order) {
  SelectionResult s;
  s.method = std::move(method);
  s.p_threshold = p_threshold;
  s.per_emotion = per_emotion;
  std::set<std::string> all;
  for (const auto& set : per_emotion) all.insert(set.begin(), set.end());
  if (column_order.empty()) {
    s.union_columns.assign(all.begin(), all.end());
  } else {
    for (const auto& c : column_order)
      if (all.erase(c)) s.union_columns.push_back(c);
    s.union_columns.insert(s.union_columns.end(), all.begin(), all.end());
  }
  return s;
}

std::string PreprocessSpec::name() const {
  const std::string p = "(" + format_double(p_threshold) + ")";
  switch (kind) {
    case PreprocessKind::kRaw: return "raw";
    case PreprocessKind::kCfs: return "cfs";
    case PreprocessKind::kDiscrCfs: return "discr+cfs";
    case PreprocessKind::kTtest: return "ttest" + p;
    case PreprocessKind::kDiscrTtest: return "discr+ttest" + p;
  }
  return "raw";
}

PreprocessSpec PreprocessSpec::parse(std::string_view name) {
  const std::string n(trim(name));
  if (n == "raw") return {PreprocessKind::kRaw};
  if (n == "cfs") return {PreprocessKind::kCfs};
  if (n == "discr+cfs") return {PreprocessKind::kDiscrCfs};
  const auto parse_p = [&](std::string_view rest) {
    if (rest.empty()) return 0.05;
    if (rest.front() != '(' || rest.back() != ')') throw InputError("bad preprocessing name '" + n + "'");
    const std::string inner(rest.substr(1, rest.size() - 2));
    double p = 0.0;
    try {
      p = std::stod(inner);
    } catch (const std::exception&) {
      throw InputError("bad p-value in '" + n + "'");
    }
    if (!(p > 0.0 && p < 1.0)) throw InputError("p-value must lie in (0, 1) in '" + n + "'");
    return p;
  };
  if (n.rfind("discr+ttest", 0) == 0) return {PreprocessKind::kDiscrTtest, parse_p(std::string_view(n).substr(11))};
  if (n.rfind("ttest", 0) == 0) return {PreprocessKind::kTtest, parse_p(std::string_view(n).substr(5))};
  throw InputError("unknown preprocessing '" + n + "'");
}

Dataset EmotionInput::prepare(const FeatureMatrix& m) const {
  std::vector<std::size_t> idx;
  idx.reserve(columns.size());
  for (const auto& c : columns) idx.push_back(m.column_index(c));
  Matrix x = m.values.take_cols(idx);
  if (discretizer) return discretizer->apply(x);
  return Dataset{std::move(x), columns, std::vector<std::size_t>(columns.size(), 0)};
}

FittedPreprocessing fit_preprocessing(const FeatureMatrix& train,
                                      const std::vector<std::array<std::uint8_t, kEmotionCount>>& labels,
                                      const PreprocessSpec& spec, const PreprocessOptions& options) {
  if (labels.size() != train.values.rows()) throw InputError("label rows do not match feature rows");
  FittedPreprocessing out;
  out.spec = spec;

  std::array<std::optional<DiscretizationModel>, kEmotionCount> models;
  std::array<std::vector<std::string>, kEmotionCount> selected;
  for (std::size_t e = 0; e < kEmotionCount; ++e) {
    std::vector<int> y(labels.size());
    std::size_t positives = 0;
    for (std::size_t r = 0; r < labels.size(); ++r) {
      y[r] = labels[r][e];
      positives += labels[r][e];
    }
    const Emotion emo = kAllEmotions[e];
    if (positives == 0 || positives == labels.size()) {
      out.unusable[e] = "emotion '" + std::string(emotion_name(emo)) +
                        "' has a single class in the training rows; try a different threshold";
      continue;
    }
    Dataset data = continuous_dataset(train);
    if (spec.discretizes()) {
      auto [d, m] = discretize_matrix(train, y, emo);
      data = std::move(d);
      models[e] = std::move(m);
    }
    try {
      switch (spec.kind) {
        case PreprocessKind::kRaw: break;
        case PreprocessKind::kCfs:
        case PreprocessKind::kDiscrCfs: selected[e] = cfs_select(data, y, options.cfs); break;
        case PreprocessKind::kTtest:
        case PreprocessKind::kDiscrTtest:
          selected[e] = ttest_select(data, y, spec.p_threshold, options.pooled_variance, emo);
          break;
      }
    } catch (const InputError& err) {
      out.unusable[e] = err.what();
    }
  }

  std::vector<std::string> columns = train.columns;
  if (spec.selects()) {
    const bool is_ttest = spec.kind == PreprocessKind::kTtest || spec.kind == PreprocessKind::kDiscrTtest;
    out.selection = union_selection(selected, spec.name(),
                                    is_ttest ? std::optional<double>(spec.p_threshold) : std::nullopt, train.columns);
    columns = out.selection->union_columns;
  }
  for (std::size_t e = 0; e < kEmotionCount; ++e) {
    out.inputs[e].columns = columns;
    if (models[e]) out.inputs[e].discretizer = models[e]->restrict_to(columns);
  }
  return out;
}

nlohmann::json to_json(const DiscretizationModel& m) {
  nlohmann::json j;
  j["fitted_on"] = m.fitted_on ? nlohmann::json(emotion_name(*m.fitted_on)) : nlohmann::json(nullptr);
  j["columns"] = m.columns;
  j["cuts"] = m.cuts;
  return j;
}

DiscretizationModel discretization_from_json(const nlohmann::json& j) {
  DiscretizationModel m;
  if (!j.at("fitted_on").is_null()) m.fitted_on = parse_emotion(j.at("fitted_on").get<std::string>());
  m.columns = j.at("columns").get<std::vector<std::string>>();
  m.cuts = j.at("cuts").get<std::vector<std::vector<double>>>();
  if (m.cuts.size() != m.columns.size()) throw InputError("discretization JSON: cuts/columns mismatch");
  return m;
}

nlohmann::json to_json(const SelectionResult& s) {
  nlohmann::json j;
  j["method"] = s.method;
  j["p_threshold"] = s.p_threshold ? nlohmann::json(*s.p_threshold) : nlohmann::json(nullptr);
  nlohmann::json per = nlohmann::json::object();
  for (std::size_t e = 0; e < kEmotionCount; ++e) per[std::string(emotion_name(kAllEmotions[e]))] = s.per_emotion[e];
  j["per_emotion"] = per;
  j["union"] = s.union_columns;
  return j;
}

}  // namespace moodpipe
