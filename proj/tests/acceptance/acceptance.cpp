// Acceptance gate: one PASS/FAIL/SKIP line per criterion.
// Exit status is nonzero when any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "moodpipe/preprocess.hpp"
#include "properties.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  enum { kPass, kFail, kSkip } state = kFail;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch() {
  static const fs::path p = [] {
    const char* env = std::getenv("MOODPIPE_ACCEPT_DIR");
    const fs::path d = env ? fs::path(env) : fs::temp_directory_path() / "moodpipe_acceptance";
    fs::create_directories(d);
    return d;
  }();
  return p;
}

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + MOODPIPE_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string quote(const fs::path& p) { return "\"" + p.string() + "\""; }

std::string tally(const char* name, const props::Tally& t) {
  std::ostringstream s;
  s << name << " " << t.passed << "/" << t.total;
  return s.str();
}

Outcome properties() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::ostringstream d;

  const std::size_t uniform[] = {5, 5};
  const std::size_t pure[] = {7, 0};
  const bool ent = std::abs(moodpipe::entropy(uniform) - 1.0) < 1e-12 && moodpipe::entropy(pure) == 0.0;
  ok = ok && ent;
  d << "entropy " << (ent ? "ok" : "bad");

  // symmetry on random pairs; independent balanced columns give 1
  bool dis = true;
  std::mt19937_64 g(77);
  for (int s = 0; s < 50; ++s) {
    std::vector<int> a(40), c(40);
    for (auto& v : a) v = static_cast<int>(g() % 3);
    for (auto& v : c) v = static_cast<int>(g() % 2);
    dis = dis && std::abs(moodpipe::dissimilarity(a, c) - moodpipe::dissimilarity(c, a)) < 1e-12;
  }
  const std::vector<int> ia{0, 0, 1, 1}, ic{0, 1, 0, 1};
  dis = dis && std::abs(moodpipe::dissimilarity(ia, ic) - 1.0) < 1e-12;
  ok = ok && dis;
  d << ", D(A,C) " << (dis ? "ok" : "bad");

  const auto mdl = props::mdl_vs_bruteforce(200);
  ok = ok && mdl.all();
  d << ", " << tally("mdl", mdl);

  const auto cfs = props::cfs_vs_exhaustive(100);
  ok = ok && cfs.share() >= 0.95;
  d << ", " << tally("cfs", cfs);

  const auto qp = props::smo_vs_qp(60);
  const auto kkt = props::smo_kkt(40);
  ok = ok && qp.all() && kkt.all();
  d << ", " << tally("smo-qp", qp) << ", " << tally("kkt", kkt);

  const auto grad = props::mlp_gradients(50);
  ok = ok && grad.all();
  d << ", " << tally("mlp-grad", grad);

  const auto nb = props::nb_checks();
  ok = ok && nb.all();
  d << ", " << tally("nb", nb);

  for (const auto* t : {&mdl, &cfs, &qp, &kkt, &grad, &nb})
    if (!t->first_failure.empty()) d << " [first failure: " << t->first_failure << "]";

  const double secs = seconds_since(t0);
  ok = ok && secs < 120.0;
  d << ", " << secs << " s";
  return {ok ? Outcome::kPass : Outcome::kFail, d.str()};
}

double nb_accuracy(const fs::path& out, const char* pre) {
  const auto j = nlohmann::json::parse(slurp(out / "eval" / "0.3" / (std::string(pre) + "__nb.json")));
  return j.at("report").at("class_accuracy").at("mean").get<double>();
}

Outcome synthetic() {
  const auto t0 = Clock::now();
  const auto dir = scratch() / "synthetic";
  fs::remove_all(dir);
  const char* inits_env = std::getenv("MOODPIPE_ACCEPT_INITS");
  const std::string inits = inits_env ? inits_env : "1";
  if (cli("synth -o " + quote(dir / "corpus") + " --tracks 400", dir.parent_path() / "synth.log") != 0)
    return {Outcome::kFail, "synth failed"};
  const auto log = dir / "eval.log";
  const int rc = cli("pipeline --annotations " + quote(dir / "corpus" / "annotations.csv") + " --audio-dir " +
                         quote(dir / "corpus" / "audio") + " -o " + quote(dir / "out") + " --cache-dir " +
                         quote(dir / "cache") + " --paper-suite --initializations " + inits,
                     log);
  if (rc != 0) return {Outcome::kFail, "pipeline exited " + std::to_string(rc) + ": " + slurp(log)};
  const double raw = nb_accuracy(dir / "out", "raw");
  const double cfs = nb_accuracy(dir / "out", "cfs");
  const double dc = nb_accuracy(dir / "out", "discr_cfs");
  const double secs = seconds_since(t0);
  const bool ok = dc >= 85.0 && dc >= cfs && cfs >= raw && secs < 600.0;
  std::ostringstream d;
  d.precision(4);
  d << "NB @0.30 raw " << raw << ", cfs " << cfs << ", discr+cfs " << dc << " (" << inits
    << " init/fold), " << secs << " s";
  return {ok ? Outcome::kPass : Outcome::kFail, d.str()};
}

Outcome real_corpus() {
  const char* env = std::getenv("MOODPIPE_EMOTIFY_DIR");
  if (!env) return {Outcome::kSkip, "MOODPIPE_EMOTIFY_DIR not set"};
  const fs::path src(env);
  const auto out = scratch() / "emotify";
  const std::string io = "--annotations " + quote(src / "annotations.csv") + " --audio-dir " + quote(src / "audio") +
                         " -o " + quote(out) + " --cache-dir " + quote(scratch() / "emotify_cache");
  if (cli("ingest " + io, scratch() / "emotify_ingest.log") != 0)
    return {Outcome::kFail, "ingest: " + slurp(scratch() / "emotify_ingest.log")};
  if (cli("labels " + io + " --threshold 0.25 0.30", scratch() / "emotify_labels.log") != 0)
    return {Outcome::kFail, "labels: " + slurp(scratch() / "emotify_labels.log")};
  if (cli("eval " + io + " --threshold 0.30 --classifier nb --preprocessing raw discr+cfs",
          scratch() / "emotify_eval.log") != 0)
    return {Outcome::kFail, "eval: " + slurp(scratch() / "emotify_eval.log")};

  const auto corpus = nlohmann::json::parse(slurp(out / "corpus_report.json"));
  bool a = corpus.at("track_count") == 400 && corpus.at("annotation_count") == 8407;
  for (const auto& [genre, n] : corpus.at("tracks_per_genre").items()) a = a && n == 100;
  auto mean_labels = [&](const char* t) {
    return nlohmann::json::parse(slurp(out / "labels" / (std::string("stats_") + t + ".json")))
        .at("mean_labels_per_track")
        .get<double>();
  };
  const double m25 = mean_labels("0.25"), m30 = mean_labels("0.3");
  const bool b = std::abs(m25 - 3.5) <= 1.0 && std::abs(m30 - 2.5) <= 1.0;
  const double raw = nb_accuracy(out, "raw"), dc = nb_accuracy(out, "discr_cfs");
  const bool c = dc - raw >= 5.0;
  std::ostringstream d;
  d.precision(4);
  d << "(a) " << (a ? "ok" : "bad") << ", (b) " << m25 << " / " << m30 << (b ? " ok" : " bad") << ", (c) NB raw "
    << raw << " -> discr+cfs " << dc << (c ? " ok" : " bad");
  return {a && b && c ? Outcome::kPass : Outcome::kFail, d.str()};
}

// every output file except caches and logs
std::map<std::string, std::string> outputs(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return files;
}

Outcome determinism() {
  const auto dir = scratch() / "determinism";
  fs::remove_all(dir);
  if (cli("synth -o " + quote(dir / "corpus") + " --tracks 32 --seconds 3 --seed 11", dir.parent_path() / "d.log") != 0)
    return {Outcome::kFail, "synth failed"};
  std::vector<std::map<std::string, std::string>> runs;
  for (const char* jobs : {"1", "3", "3"}) {
    const auto out = dir / (std::string("jobs") + jobs + "_" + std::to_string(runs.size()));
    const int rc = cli("pipeline --annotations " + quote(dir / "corpus" / "annotations.csv") + " --audio-dir " +
                           quote(dir / "corpus" / "audio") + " -o " + quote(out) + " --cache-dir " +
                           quote(dir / ("cache" + std::to_string(runs.size()))) +
                           " --classifier nb svm mlp --preprocessing raw discr+cfs 'ttest(0.05)' --threshold 0.25 0.30"
                           " --initializations 2 --mlp-epochs 100 --sweep --jobs " +
                           jobs,
                       dir / "run.log");
    if (rc != 0) return {Outcome::kFail, "pipeline exited " + std::to_string(rc) + ": " + slurp(dir / "run.log")};
    runs.push_back(outputs(out));
  }
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (runs[i].size() != runs[0].size()) return {Outcome::kFail, "different file sets"};
    for (const auto& [name, bytes] : runs[0])
      if (runs[i].at(name) != bytes) return {Outcome::kFail, name + " differs in run " + std::to_string(i)};
  }
  return {Outcome::kPass, std::to_string(runs[0].size()) + " files identical across --jobs 1, 3, 3"};
}

}  // namespace

int main() {
  bool failed = false;
  auto report = [&](int n, const Outcome& o) {
    const char* word = o.state == Outcome::kPass ? "PASS" : o.state == Outcome::kSkip ? "SKIP" : "FAIL";
    failed = failed || o.state == Outcome::kFail;
    std::cout << "criterion " << n << ": " << word << "  " << o.detail << std::endl;
  };
  report(1, properties());
  report(2, synthetic());
  report(3, real_corpus());
  report(4, determinism());
  return failed ? 1 : 0;
}
