#include "moodpipe/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "moodpipe/report.hpp"

namespace moodpipe {

namespace fs = std::filesystem;

PipelineConfig::PipelineConfig() {
  for (Family f : {Family::kSvm, Family::kNaiveBayes, Family::kMlp}) {
    ClassifierSpec s;
    s.family = f;
    classifiers.push_back(s);
  }
}

nlohmann::json PipelineConfig::to_json() const {
  nlohmann::json j;
  j["annotations"] = annotations.string();
  j["audio_dir"] = audio_dir.string();
  j["output_dir"] = output_dir.string();
  j["cache_dir"] = cache_dir.string();
  j["frame"] = {{"window_seconds", frame.window_seconds},
                {"hop_seconds", frame.hop_seconds},
                {"window", std::string(dsp::window_name(frame.window))}};
  j["features"] = features;
  j["thresholds"] = thresholds;
  j["strict_greater"] = strict_greater;
  j["preprocessing"] = preprocessing;
  nlohmann::json cl = nlohmann::json::array();
  for (const auto& c : classifiers) cl.push_back(moodpipe::to_json(c));
  j["classifiers"] = cl;
  j["folds"] = folds;
  j["initializations"] = initializations;
  j["master_seed"] = master_seed;
  j["stratified"] = stratified;
  j["pooled_variance"] = pooled_variance;
  j["cfs_patience"] = cfs_patience;
  return j;
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j, const fs::path& base_dir) {
  PipelineConfig c;
  const auto path = [&](const char* key, fs::path& out) {
    if (!j.contains(key)) return;
    fs::path p = j[key].get<std::string>();
    if (!p.empty() && p.is_relative() && !base_dir.empty()) p = base_dir / p;
    out = p;
  };
  try {
    path("annotations", c.annotations);
    path("audio_dir", c.audio_dir);
    path("output_dir", c.output_dir);
    path("cache_dir", c.cache_dir);
    if (j.contains("frame")) {
      const auto& f = j["frame"];
      c.frame.window_seconds = f.value("window_seconds", c.frame.window_seconds);
      c.frame.hop_seconds = f.value("hop_seconds", c.frame.hop_seconds);
      if (f.contains("window")) c.frame.window = dsp::parse_window(f["window"].get<std::string>());
    }
    c.features = j.value("features", c.features);
    if (j.contains("thresholds")) c.thresholds = j["thresholds"].get<std::vector<double>>();
    c.strict_greater = j.value("strict_greater", c.strict_greater);
    c.preprocessing = j.value("preprocessing", c.preprocessing);
    if (j.contains("classifiers")) {
      c.classifiers.clear();
      for (const auto& x : j["classifiers"]) c.classifiers.push_back(classifier_from_json(x));
    }
    c.folds = j.value("folds", c.folds);
    c.initializations = j.value("initializations", c.initializations);
    c.master_seed = j.value("master_seed", c.master_seed);
    c.stratified = j.value("stratified", c.stratified);
    c.pooled_variance = j.value("pooled_variance", c.pooled_variance);
    c.cfs_patience = j.value("cfs_patience", c.cfs_patience);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad config: ") + e.what());
  }
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j, path.parent_path());
}

void PipelineConfig::validate() const {
  frame.validate();
  if (thresholds.empty()) throw InputError("no consensus threshold given");
  for (double t : thresholds)
    if (!(t > 0.0 && t < 1.0)) throw InputError("threshold " + format_double(t) + " must lie in (0, 1)");
  for (const auto& p : preprocessing) (void)PreprocessSpec::parse(p);
  if (classifiers.empty()) throw InputError("no classifier given");
  if (folds < 2) throw InputError("folds must be >= 2");
  if (initializations < 1) throw InputError("initializations must be >= 1");
  if (cfs_patience < 1) throw InputError("cfs_patience must be >= 1");
  (void)feature_set();
}

std::string PipelineConfig::hash() const {
  // Paths are left out so a moved corpus keeps its hashes.
  nlohmann::json j = to_json();
  j.erase("annotations");
  j.erase("audio_dir");
  j.erase("output_dir");
  j.erase("cache_dir");
  return sha256_hex(j.dump()).substr(0, 16);
}

fs::path PipelineConfig::cache_path() const {
  if (const char* env = std::getenv("MOODPIPE_CACHE"); env && *env) return env;
  if (!cache_dir.empty()) return cache_dir;
  return output_dir / "cache";
}

BaseFeatureSet PipelineConfig::feature_set() const {
  return features.empty() ? BaseFeatureSet::canonical() : BaseFeatureSet::from_names(features);
}

void apply_full_suite(PipelineConfig& config) {
  config.preprocessing = {"raw",        "cfs",         "discr+cfs",         "ttest(0.05)",
                          "ttest(0.01)", "discr+ttest(0.05)", "discr+ttest(0.01)"};
  config.thresholds = {0.25, 0.30};
  std::vector<ClassifierSpec> specs;
  for (Family f : {Family::kSvm, Family::kNaiveBayes, Family::kMlp}) {
    auto it = std::find_if(config.classifiers.begin(), config.classifiers.end(),
                           [&](const ClassifierSpec& s) { return s.family == f; });
    ClassifierSpec s;
    s.family = f;
    specs.push_back(it != config.classifiers.end() ? *it : s);
  }
  config.classifiers = specs;
}

std::string provenance_line(const std::string& config_hash, const std::string& inputs_hash) {
  return "# moodpipe config=" + config_hash + " inputs=" + inputs_hash;
}

// ---------------------------------------------------------------------------

namespace {

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + " is not valid JSON: " + e.what());
  }
  return j;
}

std::string thr_name(double t) { return format_double(t); }

std::string file_safe(std::string s) {
  for (auto& c : s)
    if (c == '(' || c == ')' || c == '+') c = c == '+' ? '_' : '-';
  s.erase(std::remove(s.begin(), s.end(), '-'), s.end());
  return s;
}

AnnotationTable load_table(const PipelineConfig& c) {
  if (c.annotations.empty()) throw InputError("no annotations file configured (--annotations)");
  return load_annotations(c.annotations);
}

struct IngestRecord {
  std::string inputs;
  std::string corpus_hash;
  std::map<std::uint32_t, std::string> audio_paths;
};

// Hash of the annotation file and every WAV under the audio directory.
std::string ingest_key(const PipelineConfig& c) {
  std::string acc = "annotations:" + sha256_file(c.annotations.string()) + "\n";
  std::vector<fs::path> wavs;
  std::error_code ec;
  if (fs::is_directory(c.audio_dir, ec)) {
    for (const auto& e : fs::recursive_directory_iterator(c.audio_dir, ec))
      if (e.is_regular_file() && e.path().extension() == ".wav") wavs.push_back(e.path());
  }
  std::sort(wavs.begin(), wavs.end());
  for (const auto& w : wavs)
    acc += fs::relative(w, c.audio_dir).generic_string() + ":" + sha256_file(w.string()) + "\n";
  return sha256_hex(acc).substr(0, 16);
}

fs::path corpus_cache_file(const PipelineConfig& c) { return c.cache_path() / "corpus.json"; }

IngestRecord read_ingest(const PipelineConfig& c) {
  const fs::path p = corpus_cache_file(c);
  if (!fs::exists(p)) throw InputError("missing corpus cache " + p.string() + "; run ingest first");
  const auto j = read_json(p);
  IngestRecord r;
  r.inputs = j.at("inputs").get<std::string>();
  r.corpus_hash = j.at("corpus_hash").get<std::string>();
  for (const auto& [k, v] : j.at("audio_paths").items()) r.audio_paths[static_cast<std::uint32_t>(std::stoul(k))] = v;
  return r;
}

std::string feature_key(const PipelineConfig& c, const std::string& corpus_hash) {
  return sha256_hex(corpus_hash + "|" + c.frame.hash() + "|" + c.feature_set().hash()).substr(0, 16);
}

fs::path feature_cache_file(const PipelineConfig& c, const std::string& corpus_hash) {
  return c.cache_path() / ("features-" + feature_key(c, corpus_hash) + ".bin");
}

std::string features_hash(const FeatureMatrix& m) {
  return sha256_hex(m.corpus_hash + "|" + m.spec_hash + "|" + m.set_hash).substr(0, 16);
}

LabelMatrix labels_for(const ScoreMatrix& scores, double t, bool strict) { return apply_consensus(scores, t, strict); }

std::string labels_hash(const LabelMatrix& l) {
  std::ostringstream s;
  write_labels_csv(s, l);
  return sha256_hex(s.str()).substr(0, 16);
}

std::vector<ExperimentPlan> plans_for(const PipelineConfig& c, double threshold) {
  std::vector<ExperimentPlan> out;
  for (const auto& p : c.preprocessing) {
    for (const auto& cl : c.classifiers) {
      ExperimentPlan plan;
      plan.threshold = threshold;
      plan.preprocessing = PreprocessSpec::parse(p);
      plan.classifier = cl;
      plan.folds = c.folds;
      plan.initializations = c.initializations;
      plan.master_seed = c.master_seed;
      plan.stratified = c.stratified;
      plan.preprocess_options.pooled_variance = c.pooled_variance;
      plan.preprocess_options.cfs.patience = c.cfs_patience;
      out.push_back(plan);
    }
  }
  return out;
}

std::string eval_file_stem(const ExperimentPlan& p) {
  return file_safe(p.preprocessing.name()) + "__" + p.classifier.name();
}

}  // namespace

CorpusReport stage_ingest(const PipelineConfig& config, std::ostream& log) {
  config.validate();
  const AnnotationTable table = load_table(config);
  std::error_code ec;
  if (config.audio_dir.empty() || !fs::is_directory(config.audio_dir, ec))
    throw InputError("audio directory not found: " + config.audio_dir.string());

  const std::string key = ingest_key(config);
  const fs::path cache = corpus_cache_file(config);
  if (fs::exists(cache)) {
    const auto j = read_json(cache);
    if (j.value("inputs", std::string()) == key) {
      log << "ingest: cache hit (" << key << ")\n";
      CorpusReport r;
      r.track_count = j.at("report").at("track_count").get<std::size_t>();
      r.annotation_count = j.at("report").at("annotation_count").get<std::size_t>();
      r.tracks_per_genre = j.at("report").at("tracks_per_genre").get<std::map<std::string, std::size_t>>();
      return r;
    }
  }

  CorpusReport report = validate_corpus(table, config.audio_dir);
  nlohmann::json rj = to_json(report);
  rj["provenance"] = {{"config", config.hash()}, {"inputs", key}};
  write_text(config.output_dir / "corpus_report.json", rj.dump(2) + "\n");
  if (!report.problems.empty() || !report.missing_audio.empty()) {
    std::string msg = "corpus validation failed";
    if (!report.missing_audio.empty()) msg += "; " + std::to_string(report.missing_audio.size()) + " tracks lack audio";
    if (!report.problems.empty()) msg += "; " + report.problems.front();
    throw InputError(msg);
  }

  // corpus hash: annotations plus the audio actually used
  std::string acc = sha256_file(config.annotations.string());
  for (const auto& [id, path] : report.audio_paths) acc += "|" + std::to_string(id) + ":" + sha256_file(path);
  nlohmann::json cj;
  cj["inputs"] = key;
  cj["corpus_hash"] = sha256_hex(acc).substr(0, 16);
  nlohmann::json paths = nlohmann::json::object();
  for (const auto& [id, path] : report.audio_paths) paths[std::to_string(id)] = fs::absolute(path).string();
  cj["audio_paths"] = paths;
  cj["report"] = to_json(report);
  write_text(cache, cj.dump(2) + "\n");
  log << "ingest: " << report.track_count << " tracks, " << report.annotation_count << " annotations\n";
  for (const auto& [g, n] : report.tracks_per_genre) log << "  " << g << ": " << n << "\n";
  return report;
}

void stage_labels(const PipelineConfig& config, std::ostream& log, const StageOptions& options) {
  config.validate();
  const AnnotationTable table = load_table(config);
  const ScoreMatrix scores = build_score_matrix(table);
  const std::string inputs = sha256_file(config.annotations.string()).substr(0, 16);
  const std::string head = provenance_line(config.hash(), inputs) + "\n";
  const fs::path dir = config.output_dir / "labels";
  {
    std::ostringstream s;
    write_scores_csv(s, scores);
    write_text(dir / "scores.csv", head + s.str());
  }
  for (double t : config.thresholds) {
    const LabelMatrix labels = labels_for(scores, t, config.strict_greater);
    std::ostringstream s;
    write_labels_csv(s, labels);
    write_text(dir / ("labels_" + thr_name(t) + ".csv"), head + s.str());
    const DistributionStats stats = distribution_stats(scores, t, config.strict_greater);
    nlohmann::json j = to_json(stats);
    j["provenance"] = {{"config", config.hash()}, {"inputs", inputs}};
    write_text(dir / ("stats_" + thr_name(t) + ".json"), j.dump(2) + "\n");
    log << "labels @" << thr_name(t) << ": mean " << format_double(stats.mean_labels_per_track) << " labels/track\n";
  }
  if (options.sweep) {
    const auto sweep = threshold_sweep(scores, config.strict_greater);
    std::ostringstream s;
    write_sweep_csv(s, sweep);
    write_text(dir / "sweep.csv", head + s.str());
    const auto plateaus = plateau_candidates(sweep);
    std::string line;
    for (double p : plateaus) line += (line.empty() ? "" : ", ") + format_double(p);
    log << "sweep written; plateau thresholds: " << (line.empty() ? "none" : line) << "\n";
  }
}

FeatureMatrix load_cached_features(const PipelineConfig& config) {
  const fs::path corpus = corpus_cache_file(config);
  if (!fs::exists(corpus)) throw InputError("missing feature cache (run ingest and extract first)");
  const IngestRecord rec = read_ingest(config);
  const fs::path p = feature_cache_file(config, rec.corpus_hash);
  if (!fs::exists(p)) throw InputError("missing feature cache " + p.string() + " (run extract first)");
  return read_feature_cache(p);
}

FeatureMatrix stage_extract(const PipelineConfig& config, std::ostream& log) {
  config.validate();
  const IngestRecord rec = read_ingest(config);
  const fs::path p = feature_cache_file(config, rec.corpus_hash);
  FeatureMatrix m;
  if (fs::exists(p)) {
    log << "extract: cache hit (" << p.filename().string() << ")\n";
    m = read_feature_cache(p);
  } else {
    std::vector<TrackSource> tracks;
    for (const auto& [id, path] : rec.audio_paths) tracks.push_back({id, path});
    m = extract_matrix(tracks, config.frame, config.feature_set());
    m.corpus_hash = rec.corpus_hash;
    fs::create_directories(p.parent_path());
    write_feature_cache(p, m);
    log << "extract: " << m.values.rows() << " tracks x " << m.columns.size() << " columns\n";
    for (const auto& c : constant_columns(m)) log << "  warning: constant column " << c << "\n";
  }
  std::ostringstream s;
  write_feature_csv(s, m);
  write_text(config.output_dir / "features.csv", provenance_line(config.hash(), features_hash(m)) + "\n" + s.str());
  return m;
}

void stage_preprocess(const PipelineConfig& config, std::ostream& log) {
  config.validate();
  const FeatureMatrix m = load_cached_features(config);
  const ScoreMatrix scores = build_score_matrix(load_table(config));
  for (double t : config.thresholds) {
    const LabelMatrix labels = labels_for(scores, t, config.strict_greater);
    const LabelRows y = align_labels(m, labels);
    for (const auto& name : config.preprocessing) {
      const PreprocessSpec spec = PreprocessSpec::parse(name);
      PreprocessOptions opt;
      opt.pooled_variance = config.pooled_variance;
      opt.cfs.patience = config.cfs_patience;
      const FittedPreprocessing fitted = fit_preprocessing(m, y, spec, opt);
      nlohmann::json j;
      j["provenance"] = {{"config", config.hash()},
                         {"inputs", sha256_hex(features_hash(m) + labels_hash(labels)).substr(0, 16)}};
      j["preprocessing"] = spec.name();
      j["threshold"] = t;
      j["note"] = "fitted on all rows; evaluation refits inside each training fold";
      if (fitted.selection) j["selection"] = to_json(*fitted.selection);
      nlohmann::json per = nlohmann::json::object();
      for (std::size_t e = 0; e < kEmotionCount; ++e) {
        nlohmann::json x;
        x["columns"] = fitted.inputs[e].columns.size();
        if (fitted.inputs[e].discretizer) x["discretizer"] = to_json(*fitted.inputs[e].discretizer);
        if (fitted.unusable[e]) x["unusable"] = *fitted.unusable[e];
        per[std::string(emotion_name(kAllEmotions[e]))] = x;
      }
      j["emotions"] = per;
      write_text(config.output_dir / "preprocess" / thr_name(t) / (file_safe(spec.name()) + ".json"),
                 j.dump(2) + "\n");
      log << "preprocess @" << thr_name(t) << " " << spec.name() << ": "
          << (fitted.selection ? fitted.selection->union_columns.size() : m.columns.size()) << " columns\n";
    }
  }
}

void stage_train(const PipelineConfig& config, std::ostream& log) {
  config.validate();
  const FeatureMatrix m = load_cached_features(config);
  const ScoreMatrix scores = build_score_matrix(load_table(config));
  for (double t : config.thresholds) {
    const LabelMatrix labels = labels_for(scores, t, config.strict_greater);
    for (const auto& plan : plans_for(config, t)) {
      ClassifierSpec spec = plan.classifier;
      spec.seed = config.master_seed;
      const MultilabelModel model =
          binary_relevance_train(m, labels, plan.preprocessing, spec, plan.preprocess_options);
      nlohmann::json j = to_json(model);
      j["provenance"] = {{"config", config.hash()},
                         {"inputs", sha256_hex(features_hash(m) + labels_hash(labels)).substr(0, 16)}};
      write_text(config.output_dir / "models" / thr_name(t) / (eval_file_stem(plan) + ".json"), j.dump() + "\n");
      log << "train @" << thr_name(t) << " " << plan.preprocessing.name() << " " << plan.classifier.name() << "\n";
    }
  }
}

std::string render_tables(const std::vector<EvalReport>& reports, bool rmse) {
  std::vector<EvalReport> sel, tt;
  for (const auto& r : reports) {
    const auto k = PreprocessSpec::parse(r.preprocessing).kind;
    (k == PreprocessKind::kTtest || k == PreprocessKind::kDiscrTtest ? tt : sel).push_back(r);
  }
  std::string out;
  for (const auto* block : {&sel, &tt}) {
    if (block->empty()) continue;
    if (!out.empty()) out += "\n";
    out += rmse ? rmse_table_text(*block) : accuracy_table_text(*block);
  }
  return out;
}

namespace {

void write_tables(const fs::path& output_dir, const std::string& config_hash, const std::vector<EvalReport>& reports,
                  const std::string& inputs, const StageOptions& options, std::ostream& log) {
  std::map<double, std::vector<EvalReport>> by_threshold;
  for (const auto& r : reports) by_threshold[r.threshold].push_back(r);
  const std::string head = provenance_line(config_hash, inputs) + "\n";
  const fs::path dir = output_dir / "tables";
  for (const auto& [t, group] : by_threshold) {
    const std::string acc = render_tables(group, false);
    const std::string err = render_tables(group, true);
    write_text(dir / ("accuracy_" + thr_name(t) + ".txt"), head + acc);
    write_text(dir / ("rmse_" + thr_name(t) + ".txt"), head + err);
    write_text(dir / ("accuracy_" + thr_name(t) + ".csv"), head + accuracy_table_csv(group));
    write_text(dir / ("rmse_" + thr_name(t) + ".csv"), head + rmse_table_csv(group));
    if (options.emit_plots) write_text(dir / ("plot_" + thr_name(t) + ".csv"), head + plot_data_csv(group));
    log << "\nAccuracy (%)\n" << acc << "\nRMSE\n" << err;
  }
  log << "\nRMSE uses predicted probabilities; SUBSET accuracy in eval/*.csv is an extra metric, not part of the tables.\n";
}

}  // namespace

std::vector<EvalReport> stage_eval(const PipelineConfig& config, std::ostream& log, const StageOptions& options) {
  config.validate();
  const FeatureMatrix m = load_cached_features(config);
  const ScoreMatrix scores = build_score_matrix(load_table(config));
  const std::string fh = features_hash(m);
  const fs::path eval_dir = config.output_dir / "eval";
  std::error_code ec;
  fs::remove_all(eval_dir, ec);

  std::vector<EvalReport> reports;
  std::string all_inputs = fh;
  for (double t : config.thresholds) {
    const LabelMatrix labels = labels_for(scores, t, config.strict_greater);
    const std::string lh = labels_hash(labels);
    all_inputs += lh;
    for (const auto& plan : plans_for(config, t)) {
      const std::string key = sha256_hex(to_json(plan).dump() + "|" + fh + "|" + lh).substr(0, 16);
      const fs::path cached = config.cache_path() / "eval" / (key + ".json");
      EvalReport r;
      const std::string what = "eval @" + thr_name(t) + " " + plan.preprocessing.name() + " " + plan.classifier.name();
      if (fs::exists(cached)) {
        r = report_from_json(read_json(cached));
        log << what << ": cache hit\n";
      } else {
        r = run_experiment(plan, m, labels);
        write_text(cached, to_json(r).dump() + "\n");
        log << what << ": mean accuracy " << (r.class_accuracy.n ? format_double(std::round(r.class_accuracy.mean * 100) / 100) : "n/a") << "\n";
      }
      nlohmann::json j;
      j["provenance"] = {{"config", config.hash()}, {"features", fh}, {"labels", lh}};
      j["plan"] = to_json(plan);
      j["report"] = to_json(r);
      const fs::path stem = eval_dir / thr_name(t) / eval_file_stem(plan);
      write_text(fs::path(stem.string() + ".json"), j.dump(2) + "\n");
      write_text(fs::path(stem.string() + ".csv"),
                 provenance_line(config.hash(), fh + "-" + lh) + "\n" + report_csv(r));
      reports.push_back(std::move(r));
    }
  }
  write_tables(config.output_dir, config.hash(), reports, sha256_hex(all_inputs).substr(0, 16), options, log);
  return reports;
}

void stage_report(const PipelineConfig& config, std::ostream& log, const StageOptions& options) {
  const fs::path eval_dir = config.output_dir / "eval";
  std::error_code ec;
  if (!fs::is_directory(eval_dir, ec)) throw InputError("no evaluation results in " + eval_dir.string() + "; run eval first");
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(eval_dir, ec))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InputError("no evaluation results in " + eval_dir.string() + "; run eval first");

  std::optional<std::string> config_hash, features;
  std::map<double, std::string> labels_by_threshold;
  std::vector<EvalReport> reports;
  for (const auto& f : files) {
    const auto j = read_json(f);
    const auto& prov = j.at("provenance");
    const auto ch = prov.at("config").get<std::string>();
    const auto fh = prov.at("features").get<std::string>();
    const auto lh = prov.at("labels").get<std::string>();
    if (config_hash && *config_hash != ch)
      throw InputError("refusing to mix artifacts: " + f.string() + " has config hash " + ch + ", expected " + *config_hash);
    if (features && *features != fh)
      throw InputError("refusing to mix artifacts: " + f.string() + " has feature hash " + fh + ", expected " + *features);
    config_hash = ch;
    features = fh;
    EvalReport r = report_from_json(j.at("report"));
    auto [it, fresh] = labels_by_threshold.emplace(r.threshold, lh);
    if (!fresh && it->second != lh)
      throw InputError("refusing to mix artifacts: " + f.string() + " has label hash " + lh);
    reports.push_back(std::move(r));
  }
  // keep the configured column order
  std::map<std::string, std::size_t> pre_rank;
  for (std::size_t i = 0; i < config.preprocessing.size(); ++i)
    pre_rank[PreprocessSpec::parse(config.preprocessing[i]).name()] = i;
  std::stable_sort(reports.begin(), reports.end(), [&](const EvalReport& a, const EvalReport& b) {
    const auto ra = pre_rank.count(a.preprocessing) ? pre_rank[a.preprocessing] : pre_rank.size();
    const auto rb = pre_rank.count(b.preprocessing) ? pre_rank[b.preprocessing] : pre_rank.size();
    return ra < rb;
  });
  std::string all = *features;
  for (const auto& [t, h] : labels_by_threshold) all += h;
  // tables carry the hash of the run that produced them
  write_tables(config.output_dir, *config_hash, reports, sha256_hex(all).substr(0, 16), options, log);
  if (*config_hash != config.hash())
    log << "note: results were produced under config " << *config_hash << "\n";
}

void run_pipeline(const PipelineConfig& config, std::ostream& log, const StageOptions& options) {
  stage_ingest(config, log);
  stage_labels(config, log, options);
  stage_extract(config, log);
  stage_eval(config, log, options);
}

}  // namespace moodpipe
