#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "moodpipe/pipeline.hpp"
#include "moodpipe/report.hpp"

using namespace moodpipe;

namespace {

// Fixed numbers; no training involved.
EvalReport fake(const std::string& pre, const std::string& cls, double offset) {
  EvalReport r;
  r.preprocessing = pre;
  r.classifier = cls;
  r.threshold = 0.30;
  r.folds = 4;
  r.initializations = 20;
  r.rows = 400;
  double sum = 0;
  for (std::size_t e = 0; e < kEmotionCount; ++e) {
    auto& s = r.emotions[e];
    s.accuracy = {70.0 + offset + static_cast<double>(e), 1.5 + 0.25 * static_cast<double>(e), 80};
    s.rmse = {0.40 - offset / 100.0 - 0.01 * static_cast<double>(e), 0.05, 80};
    s.base_rate = 70.0;
    sum += s.accuracy.mean;
  }
  r.class_accuracy = {sum / kEmotionCount, 2.58, 9};
  r.class_rmse = {0.36, 0.03, 9};
  r.subset_accuracy = {20.0, 3.0, 80};
  return r;
}

std::vector<EvalReport> table_one() {
  std::vector<EvalReport> v;
  double off = 0;
  for (const char* pre : {"raw", "cfs", "discr+cfs"})
    for (const char* cls : {"svm", "nb", "mlp"}) v.push_back(fake(pre, cls, off += 1.0));
  return v;
}

std::string read(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("labels") {
  CHECK(classifier_label("svm") == "SMO");
  CHECK(classifier_label("nb") == "BAY");
  CHECK(classifier_label("mlp") == "MLP");
  CHECK(preprocessing_label("discr+cfs") == "DISCR+CFS");
  CHECK(preprocessing_label("ttest(0.05)") == "TTEST (p=0.05)");
}

TEST_CASE("single report gives one column and eleven rows") {
  const auto csv = accuracy_table_csv({fake("raw", "nb", 0)});
  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') rows.push_back(line);
  // header, then 9 emotions + CLASS. MEAN + CLASS. STD
  REQUIRE(rows.size() == 12);
  CHECK(rows[0] == "row,RAW BAY");
  CHECK(rows[1].rfind("amazement,", 0) == 0);
  CHECK(rows[10].rfind("CLASS. MEAN,", 0) == 0);
  CHECK(rows[11].rfind("CLASS. STD,", 0) == 0);
  for (const auto& r : rows) CHECK(std::count(r.begin(), r.end(), ',') == 1);
}

TEST_CASE("skipped cells render as a dash with a footnote") {
  auto r = fake("cfs", "svm", 0);
  r.emotions[index_of(Emotion::kPower)].accuracy = {};
  r.emotions[index_of(Emotion::kPower)].rmse = {};
  r.emotions[index_of(Emotion::kPower)].skipped_cells = 80;
  r.emotions[index_of(Emotion::kPower)].skip_reason = "power: only one class present";
  const auto text = accuracy_table_text({r});
  CHECK(text.find("—") != std::string::npos);
  CHECK(text.find("power: only one class present") != std::string::npos);
  const auto rm = rmse_table_text({r});
  CHECK(rm.find("—") != std::string::npos);
}

TEST_CASE("table 1 layout matches the golden file") {
  const auto reports = table_one();
  const std::string got = accuracy_table_text(reports) + "\n" + rmse_table_text(reports);
  const std::filesystem::path golden = std::filesystem::path(MOODPIPE_GOLDEN_DIR) / "table1.txt";
  if (std::getenv("MOODPIPE_UPDATE_GOLDEN")) {
    std::ofstream(golden, std::ios::binary) << got;
  }
  REQUIRE(std::filesystem::exists(golden));
  CHECK(got == read(golden));
  CHECK(count_lines(accuracy_table_text(reports)) >= 13);
}

TEST_CASE("rmse cells read mean ± std") {
  const auto text = rmse_table_text({fake("raw", "nb", 0)});
  CHECK(text.find("0.40 ± 0.05") != std::string::npos);
}

TEST_CASE("suite tables split selection and t-test blocks") {
  auto reports = table_one();
  reports.push_back(fake("ttest(0.05)", "nb", 2));
  reports.push_back(fake("discr+ttest(0.01)", "nb", 3));
  const auto text = render_tables(reports, false);
  const auto sel = text.find("DISCR+CFS");
  const auto tt = text.find("TTEST (p=0.05)");
  REQUIRE(sel != std::string::npos);
  REQUIRE(tt != std::string::npos);
  CHECK(sel < tt);
  CHECK(text.find("Consensus @ 30%") != std::string::npos);
}
