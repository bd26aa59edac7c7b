#include "moodpipe/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

namespace moodpipe {

std::vector<std::size_t> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InputError("need at least 2 folds");
  if (n < k) throw InputError("cannot split " + std::to_string(n) + " rows into " + std::to_string(k) + " folds");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(seed, 0xf01d));
  rng.shuffle(order);
  std::vector<std::size_t> fold(n);
  for (std::size_t pos = 0; pos < n; ++pos) fold[order[pos]] = pos % k;
  return fold;
}

std::vector<std::size_t> stratified_kfold_split(const LabelRows& labels, std::size_t k, std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (k < 2) throw InputError("need at least 2 folds");
  if (n < k) throw InputError("cannot split " + std::to_string(n) + " rows into " + std::to_string(k) + " folds");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(seed, 0xf01d));
  rng.shuffle(order);
  const auto count = [&](std::size_t r) {
    return std::accumulate(labels[r].begin(), labels[r].end(), 0);
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return count(a) < count(b); });
  std::vector<std::size_t> fold(n);
  for (std::size_t pos = 0; pos < n; ++pos) fold[order[pos]] = pos % k;
  return fold;
}

double accuracy(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) throw InputError("accuracy: length mismatch");
  if (pred.empty()) throw InputError("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i];
  return 100.0 * static_cast<double>(hits) / static_cast<double>(pred.size());
}

double rmse(std::span<const double> prob, std::span<const int> truth) {
  if (prob.size() != truth.size()) throw InputError("rmse: length mismatch");
  if (prob.empty()) throw InputError("rmse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    if (!(prob[i] >= 0.0 && prob[i] <= 1.0)) throw InputError("rmse: probability out of [0,1]");
    const double d = prob[i] - truth[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(prob.size()));
}

std::uint64_t init_seed(std::uint64_t master, std::size_t init) { return mix_seed(master, init); }

nlohmann::json to_json(const ExperimentPlan& p) {
  return {{"threshold", p.threshold},
          {"preprocessing", p.preprocessing.name()},
          {"classifier", to_json(p.classifier)},
          {"folds", p.folds},
          {"initializations", p.initializations},
          {"master_seed", p.master_seed},
          {"stratified", p.stratified},
          {"pooled_variance", p.preprocess_options.pooled_variance},
          {"cfs_patience", p.preprocess_options.cfs.patience}};
}

LabelRows align_labels(const FeatureMatrix& features, const LabelMatrix& labels) {
  std::unordered_map<std::uint32_t, std::size_t> where;
  for (std::size_t i = 0; i < labels.track_ids.size(); ++i) where[labels.track_ids[i]] = i;
  LabelRows out;
  out.reserve(features.track_ids.size());
  for (auto id : features.track_ids) {
    auto it = where.find(id);
    if (it == where.end()) throw InputError("track " + std::to_string(id) + " has features but no labels");
    out.push_back(labels.values[it->second]);
  }
  return out;
}

std::vector<std::size_t> fold_assignment(const ExperimentPlan& plan, const LabelRows& labels) {
  return plan.stratified ? stratified_kfold_split(labels, plan.folds, plan.master_seed)
                         : kfold_split(labels.size(), plan.folds, plan.master_seed);
}

namespace {

FeatureMatrix subset_rows(const FeatureMatrix& m, const std::vector<std::size_t>& rows) {
  FeatureMatrix out;
  out.columns = m.columns;
  out.values = m.values.take_rows(rows);
  for (auto r : rows) out.track_ids.push_back(m.track_ids[r]);
  out.spec_hash = m.spec_hash;
  out.set_hash = m.set_hash;
  out.corpus_hash = m.corpus_hash;
  return out;
}

LabelRows subset_labels(const LabelRows& l, const std::vector<std::size_t>& rows) {
  LabelRows out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(l[r]);
  return out;
}

}  // namespace

FoldContext prepare_fold(const ExperimentPlan& plan, const FeatureMatrix& features, const LabelRows& labels,
                         const std::vector<std::size_t>& assignment, std::size_t fold,
                         const ExperimentHooks* hooks) {
  FoldContext ctx;
  ctx.fold = fold;
  for (std::size_t r = 0; r < assignment.size(); ++r) (assignment[r] == fold ? ctx.test : ctx.train).push_back(r);
  if (hooks && hooks->on_fit) hooks->on_fit(fold, "preprocess", ctx.train);
  ctx.preprocessing = fit_preprocessing(subset_rows(features, ctx.train), subset_labels(labels, ctx.train),
                                        plan.preprocessing, plan.preprocess_options);
  return ctx;
}

CellResult evaluate_cell(const ExperimentPlan& plan, const FeatureMatrix& features, const LabelRows& labels,
                         const FoldContext& ctx, std::size_t init, std::size_t emotion,
                         const ExperimentHooks* hooks) {
  CellResult cell;
  cell.fold = ctx.fold;
  cell.init = init;
  cell.seed = init_seed(plan.master_seed, init);
  cell.emotion = emotion;
  if (ctx.preprocessing.unusable[emotion]) {
    cell.skipped = *ctx.preprocessing.unusable[emotion];
    return cell;
  }
  std::vector<int> ytr, yte;
  for (auto r : ctx.train) ytr.push_back(labels[r][emotion]);
  for (auto r : ctx.test) yte.push_back(labels[r][emotion]);

  const EmotionInput& input = ctx.preprocessing.inputs[emotion];
  const Dataset train = input.prepare(subset_rows(features, ctx.train));
  const Dataset test = input.prepare(subset_rows(features, ctx.test));

  ClassifierSpec spec = plan.classifier;
  spec.seed = mix_seed(cell.seed, ctx.fold * kEmotionCount + emotion);
  if (hooks && hooks->on_fit) hooks->on_fit(ctx.fold, "train", ctx.train);
  BinaryModel model;
  try {
    model = train_binary(train, ytr, spec);
  } catch (const InputError& err) {
    cell.skipped = std::string(emotion_name(kAllEmotions[emotion])) + ": " + err.what();
    return cell;
  }
  std::vector<double> prob(test.rows());
  std::vector<int> pred(test.rows());
  cell.predicted.resize(test.rows());
  for (std::size_t r = 0; r < test.rows(); ++r) {
    prob[r] = std::clamp(predict_proba(model, test.x.row(r)), 0.0, 1.0);
    pred[r] = prob[r] >= 0.5 ? 1 : 0;
    cell.predicted[r] = static_cast<std::uint8_t>(pred[r]);
  }
  cell.accuracy = accuracy(pred, yte);
  cell.rmse = rmse(prob, yte);
  return cell;
}

namespace {

MetricSummary sample_summary(const std::vector<double>& v) {
  MetricSummary s;
  s.n = v.size();
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return s;
}

MetricSummary population_summary(const std::vector<double>& v) {
  MetricSummary s;
  s.n = v.size();
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(v.size()));
  return s;
}

}  // namespace

EvalReport assemble_report(const ExperimentPlan& plan, const LabelRows& labels,
                           const std::vector<FoldContext>& folds, std::vector<CellResult> cells) {
  std::sort(cells.begin(), cells.end(), [](const CellResult& a, const CellResult& b) {
    return std::tie(a.fold, a.init, a.emotion) < std::tie(b.fold, b.init, b.emotion);
  });
  EvalReport r;
  r.preprocessing = plan.preprocessing.name();
  r.classifier = plan.classifier.name();
  r.threshold = plan.threshold;
  r.folds = plan.folds;
  r.initializations = plan.initializations;
  r.master_seed = plan.master_seed;
  r.rows = labels.size();

  std::array<std::vector<double>, kEmotionCount> acc, err;
  for (const auto& c : cells) {
    auto& es = r.emotions[c.emotion];
    if (c.skipped) {
      ++es.skipped_cells;
      if (!es.skip_reason) es.skip_reason = c.skipped;
      continue;
    }
    acc[c.emotion].push_back(c.accuracy);
    err[c.emotion].push_back(c.rmse);
  }
  std::vector<double> acc_means, rmse_means;
  for (std::size_t e = 0; e < kEmotionCount; ++e) {
    auto& es = r.emotions[e];
    es.accuracy = sample_summary(acc[e]);
    es.rmse = sample_summary(err[e]);
    std::size_t pos = 0;
    for (const auto& row : labels) pos += row[e];
    const double share = labels.empty() ? 0.0 : static_cast<double>(pos) / static_cast<double>(labels.size());
    es.base_rate = 100.0 * std::max(share, 1.0 - share);
    if (es.accuracy.n > 0) {
      acc_means.push_back(es.accuracy.mean);
      rmse_means.push_back(es.rmse.mean);
    }
  }
  r.class_accuracy = population_summary(acc_means);
  r.class_rmse = population_summary(rmse_means);

  // subset accuracy per (fold, init) where all nine cells ran
  std::map<std::pair<std::size_t, std::size_t>, std::vector<const CellResult*>> groups;
  for (const auto& c : cells) groups[{c.fold, c.init}].push_back(&c);
  std::vector<double> subset;
  for (const auto& [key, group] : groups) {
    if (group.size() != kEmotionCount) continue;
    if (std::any_of(group.begin(), group.end(), [](const CellResult* c) { return c->skipped.has_value(); })) continue;
    const auto& test = folds[key.first].test;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      bool all = true;
      for (const auto* c : group) all = all && c->predicted[i] == labels[test[i]][c->emotion];
      hits += all;
    }
    if (!test.empty()) subset.push_back(100.0 * static_cast<double>(hits) / static_cast<double>(test.size()));
  }
  r.subset_accuracy = sample_summary(subset);
  r.cells = std::move(cells);
  return r;
}

EvalReport run_experiment(const ExperimentPlan& plan, const FeatureMatrix& features, const LabelMatrix& labels,
                          const ExperimentHooks* hooks) {
  if (plan.initializations == 0) throw InputError("need at least one initialization");
  const LabelRows y = align_labels(features, labels);
  const auto assignment = fold_assignment(plan, y);

  std::vector<FoldContext> folds(plan.folds);
  std::vector<std::string> fold_error(plan.folds);
  const auto nf = static_cast<std::ptrdiff_t>(plan.folds);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t f = 0; f < nf; ++f) {
    try {
      folds[static_cast<std::size_t>(f)] = prepare_fold(plan, features, y, assignment, static_cast<std::size_t>(f), hooks);
    } catch (const std::exception& e) {
      fold_error[static_cast<std::size_t>(f)] = e.what();
    }
  }
  for (const auto& e : fold_error)
    if (!e.empty()) throw InputError(e);

  // A deterministic family is trained once per (fold, emotion) and replicated.
  const std::size_t computed_inits = plan.classifier.stochastic() ? plan.initializations : 1;
  const std::size_t ntask = plan.folds * computed_inits * kEmotionCount;
  std::vector<CellResult> cells(ntask);
  std::vector<std::string> cell_error(ntask);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(ntask); ++t) {
    const auto idx = static_cast<std::size_t>(t);
    const std::size_t e = idx % kEmotionCount;
    const std::size_t i = (idx / kEmotionCount) % computed_inits;
    const std::size_t f = idx / (kEmotionCount * computed_inits);
    try {
      cells[idx] = evaluate_cell(plan, features, y, folds[f], i, e, hooks);
    } catch (const std::exception& ex) {
      cell_error[idx] = ex.what();
    }
  }
  for (const auto& e : cell_error)
    if (!e.empty()) throw Error(e);

  if (computed_inits != plan.initializations) {
    std::vector<CellResult> all;
    all.reserve(plan.folds * plan.initializations * kEmotionCount);
    for (const auto& c : cells) {
      for (std::size_t i = 0; i < plan.initializations; ++i) {
        CellResult copy = c;
        copy.init = i;
        copy.seed = init_seed(plan.master_seed, i);
        all.push_back(std::move(copy));
      }
    }
    cells = std::move(all);
  }
  return assemble_report(plan, y, folds, std::move(cells));
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::json metric_json(const MetricSummary& m) {
  if (m.n == 0) return {{"mean", nullptr}, {"std", nullptr}, {"n", 0}};
  return {{"mean", m.mean}, {"std", m.std}, {"n", m.n}};
}

MetricSummary metric_from(const nlohmann::json& j) {
  MetricSummary m;
  m.n = j.at("n").get<std::size_t>();
  if (m.n > 0) {
    m.mean = j.at("mean").get<double>();
    m.std = j.at("std").get<double>();
  }
  return m;
}

}  // namespace

nlohmann::json to_json(const EvalReport& r, bool include_cells) {
  nlohmann::json j;
  j["preprocessing"] = r.preprocessing;
  j["classifier"] = r.classifier;
  j["threshold"] = r.threshold;
  j["folds"] = r.folds;
  j["initializations"] = r.initializations;
  j["master_seed"] = r.master_seed;
  j["rows"] = r.rows;
  nlohmann::json em = nlohmann::json::array();
  for (std::size_t e = 0; e < kEmotionCount; ++e) {
    const auto& s = r.emotions[e];
    nlohmann::json x;
    x["emotion"] = emotion_name(kAllEmotions[e]);
    x["accuracy"] = metric_json(s.accuracy);
    x["rmse"] = metric_json(s.rmse);
    x["base_rate"] = s.base_rate;
    x["skipped_cells"] = s.skipped_cells;
    x["skip_reason"] = s.skip_reason ? nlohmann::json(*s.skip_reason) : nlohmann::json(nullptr);
    em.push_back(std::move(x));
  }
  j["emotions"] = std::move(em);
  j["class_accuracy"] = metric_json(r.class_accuracy);
  j["class_rmse"] = metric_json(r.class_rmse);
  j["subset_accuracy"] = metric_json(r.subset_accuracy);
  if (include_cells) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : r.cells) {
      nlohmann::json x = {{"fold", c.fold}, {"init", c.init}, {"seed", c.seed},
                          {"emotion", emotion_name(kAllEmotions[c.emotion])}};
      if (c.skipped) {
        x["skipped"] = *c.skipped;
      } else {
        x["accuracy"] = c.accuracy;
        x["rmse"] = c.rmse;
      }
      cells.push_back(std::move(x));
    }
    j["cells"] = std::move(cells);
  }
  return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  r.preprocessing = j.at("preprocessing").get<std::string>();
  r.classifier = j.at("classifier").get<std::string>();
  r.threshold = j.at("threshold").get<double>();
  r.folds = j.at("folds").get<std::size_t>();
  r.initializations = j.at("initializations").get<std::size_t>();
  r.master_seed = j.at("master_seed").get<std::uint64_t>();
  r.rows = j.value("rows", std::size_t{0});
  const auto& em = j.at("emotions");
  if (em.size() != kEmotionCount) throw InputError("report JSON must hold 9 emotions");
  for (std::size_t e = 0; e < kEmotionCount; ++e) {
    auto& s = r.emotions[e];
    s.accuracy = metric_from(em[e].at("accuracy"));
    s.rmse = metric_from(em[e].at("rmse"));
    s.base_rate = em[e].at("base_rate").get<double>();
    s.skipped_cells = em[e].at("skipped_cells").get<std::size_t>();
    if (!em[e].at("skip_reason").is_null()) s.skip_reason = em[e]["skip_reason"].get<std::string>();
  }
  r.class_accuracy = metric_from(j.at("class_accuracy"));
  r.class_rmse = metric_from(j.at("class_rmse"));
  r.subset_accuracy = metric_from(j.at("subset_accuracy"));
  // predictions are not serialized
  if (j.contains("cells")) {
    for (const auto& x : j.at("cells")) {
      CellResult c;
      c.fold = x.at("fold").get<std::size_t>();
      c.init = x.at("init").get<std::size_t>();
      c.seed = x.at("seed").get<std::uint64_t>();
      const auto e = parse_emotion(x.at("emotion").get<std::string>());
      if (!e) throw InputError("report JSON: unknown emotion in cells");
      c.emotion = index_of(*e);
      if (x.contains("skipped")) {
        c.skipped = x.at("skipped").get<std::string>();
      } else {
        c.accuracy = x.at("accuracy").get<double>();
        c.rmse = x.at("rmse").get<double>();
      }
      r.cells.push_back(std::move(c));
    }
  }
  return r;
}

}  // namespace moodpipe
