// moodpipe: command-line driver for the emotion-recognition pipeline.

#include <CLI11.hpp>
#include <omp.h>

#include <iostream>
#include <optional>

#include "moodpipe/pipeline.hpp"
#include "moodpipe/synth.hpp"

using namespace moodpipe;

namespace {

struct Flags {
  std::string config;
  std::string annotations, audio_dir, output_dir, cache_dir;
  std::vector<double> thresholds;
  bool strict_greater = false;
  std::vector<std::string> preprocessing;
  std::vector<std::string> classifiers;
  std::optional<std::size_t> folds, initializations, mlp_epochs;
  std::optional<std::uint64_t> seed;
  bool stratified = false;
  bool pooled_variance = false;
  std::optional<double> window, hop;
  std::string window_kind;
  int jobs = 0;
  bool paper_suite = false;
  bool sweep = false;
  bool emit_plots = false;
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("-c,--config", f.config, "JSON config file");
  app->add_option("--annotations", f.annotations, "annotation CSV");
  app->add_option("--audio-dir", f.audio_dir, "directory of <id>.wav or <genre>/<id>.wav");
  app->add_option("-o,--output-dir", f.output_dir, "output directory");
  app->add_option("--cache-dir", f.cache_dir, "cache directory (MOODPIPE_CACHE overrides)");
  app->add_option("--threshold", f.thresholds, "consensus threshold(s), e.g. 0.25 0.30");
  app->add_flag("--strict-greater", f.strict_greater, "label when score > threshold instead of >=");
  app->add_option("--preprocessing", f.preprocessing, "raw, cfs, discr+cfs, ttest(p), discr+ttest(p)");
  app->add_option("--classifier", f.classifiers, "nb, svm, mlp");
  app->add_option("--folds", f.folds, "cross-validation folds");
  app->add_option("--initializations", f.initializations, "initializations per fold");
  app->add_option("--mlp-epochs", f.mlp_epochs, "MLP training epochs");
  app->add_option("--seed", f.seed, "master seed");
  app->add_flag("--stratified", f.stratified, "stratify folds by label count");
  app->add_flag("--pooled-variance", f.pooled_variance, "pooled-variance t-test instead of Welch");
  app->add_option("--window", f.window, "frame length in seconds");
  app->add_option("--hop", f.hop, "hop in seconds");
  app->add_option("--window-kind", f.window_kind, "hann or hamming");
  app->add_option("-j,--jobs", f.jobs, "worker threads (default: all cores)");
}

PipelineConfig build_config(const Flags& f) {
  PipelineConfig c = f.config.empty() ? PipelineConfig{} : PipelineConfig::load(f.config);
  if (!f.annotations.empty()) c.annotations = f.annotations;
  if (!f.audio_dir.empty()) c.audio_dir = f.audio_dir;
  if (!f.output_dir.empty()) c.output_dir = f.output_dir;
  if (!f.cache_dir.empty()) c.cache_dir = f.cache_dir;
  if (!f.thresholds.empty()) c.thresholds = f.thresholds;
  if (f.strict_greater) c.strict_greater = true;
  if (!f.preprocessing.empty()) c.preprocessing = f.preprocessing;
  if (!f.classifiers.empty()) {
    std::vector<ClassifierSpec> specs;
    for (const auto& name : f.classifiers) {
      const Family fam = parse_family(name);
      auto it = std::find_if(c.classifiers.begin(), c.classifiers.end(),
                             [&](const ClassifierSpec& s) { return s.family == fam; });
      ClassifierSpec s;
      s.family = fam;
      specs.push_back(it != c.classifiers.end() ? *it : s);
    }
    c.classifiers = specs;
  }
  if (f.folds) c.folds = *f.folds;
  if (f.initializations) c.initializations = *f.initializations;
  if (f.seed) c.master_seed = *f.seed;
  if (f.stratified) c.stratified = true;
  if (f.pooled_variance) c.pooled_variance = true;
  if (f.window) c.frame.window_seconds = *f.window;
  if (f.hop) c.frame.hop_seconds = *f.hop;
  if (!f.window_kind.empty()) c.frame.window = dsp::parse_window(f.window_kind);
  if (f.paper_suite) apply_full_suite(c);
  if (f.mlp_epochs)
    for (auto& s : c.classifiers) s.mlp.epochs = *f.mlp_epochs;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"moodpipe: multilabel music emotion recognition"};
  app.require_subcommand(1);
  Flags f;

  auto* ingest = app.add_subcommand("ingest", "validate the corpus and cache its manifest");
  auto* labels = app.add_subcommand("labels", "consensus scores, labels and label statistics");
  auto* extract = app.add_subcommand("extract", "extract the aggregated feature matrix");
  auto* preprocess = app.add_subcommand("preprocess", "fit discretization and selection on all rows");
  auto* train = app.add_subcommand("train", "train binary-relevance models on all rows");
  auto* eval = app.add_subcommand("eval", "cross-validated evaluation and tables");
  auto* report = app.add_subcommand("report", "re-render tables from evaluation results");
  auto* pipeline = app.add_subcommand("pipeline", "ingest, labels, extract and eval in one go");
  for (auto* sc : {ingest, labels, extract, preprocess, train, eval, report, pipeline}) add_common(sc, f);
  labels->add_flag("--sweep", f.sweep, "also write the threshold sweep");
  pipeline->add_flag("--sweep", f.sweep, "also write the threshold sweep");
  for (auto* sc : {eval, pipeline}) sc->add_flag("--paper-suite", f.paper_suite, "run every preprocessing x classifier x threshold");
  for (auto* sc : {eval, report, pipeline}) sc->add_flag("--emit-plots", f.emit_plots, "write bar-chart data CSVs");

  SynthOptions synth_opt;
  std::string synth_out;
  int synth_jobs = 0;
  auto* synth = app.add_subcommand("synth", "write a synthetic corpus (annotations.csv + audio/)");
  synth->add_option("-o,--out", synth_out, "output directory")->required();
  synth->add_option("--tracks", synth_opt.tracks, "number of tracks");
  synth->add_option("--seconds", synth_opt.seconds, "track length");
  synth->add_option("--noise", synth_opt.label_noise, "label noise rate");
  synth->add_option("--seed", synth_opt.seed, "generator seed");
  synth->add_option("-j,--jobs", synth_jobs, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      if (synth_jobs > 0) omp_set_num_threads(synth_jobs);
      const SynthCorpus corpus = plan_corpus(synth_opt);
      write_corpus(corpus, synth_out);
      std::cout << "wrote " << corpus.tracks.size() << " tracks to " << synth_out << "\n";
      return 0;
    }
    const PipelineConfig config = build_config(f);
    if (f.jobs > 0) omp_set_num_threads(f.jobs);
    const StageOptions opts{f.sweep, f.emit_plots};
    if (ingest->parsed()) stage_ingest(config, std::cout);
    else if (labels->parsed()) stage_labels(config, std::cout, opts);
    else if (extract->parsed()) stage_extract(config, std::cout);
    else if (preprocess->parsed()) stage_preprocess(config, std::cout);
    else if (train->parsed()) stage_train(config, std::cout);
    else if (eval->parsed()) stage_eval(config, std::cout, opts);
    else if (report->parsed()) stage_report(config, std::cout, opts);
    else if (pipeline->parsed()) run_pipeline(config, std::cout, opts);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
