#include <doctest.h>

#include <cmath>
#include <random>

#include "moodpipe/learn.hpp"
#include "properties.hpp"

using namespace moodpipe;

TEST_CASE("naive bayes: 2/3 fixture and posteriors summing to one") {
  const auto t = props::nb_checks();
  INFO(t.first_failure);
  CHECK(t.all());
}

TEST_CASE("naive bayes: uninformative evidence returns the prior") {
  Dataset d;
  d.x = Matrix(8, 2);
  d.columns = {"c", "k"};
  d.arity = {0, 2};
  const std::vector<int> y{1, 1, 0, 0, 0, 0, 0, 0};
  const double c[] = {1, 2, 1, 2, 1, 2, 1, 2};
  const double k[] = {0, 1, 0, 1, 0, 1, 0, 1};
  for (std::size_t i = 0; i < 8; ++i) {
    d.x(i, 0) = c[i];
    d.x(i, 1) = k[i];
  }
  const auto m = nb_train(d, y);
  for (std::size_t i = 0; i < 8; ++i) CHECK(m.predict_proba(d.x.row(i)) == doctest::Approx(0.25));
  const std::vector<int> one_class(8, 0);
  CHECK_THROWS_AS(nb_train(d, one_class), InputError);
}

TEST_CASE("naive bayes: rescaled continuous features give the same posteriors") {
  std::mt19937_64 g(21);
  std::normal_distribution<double> nd;
  Dataset d;
  d.x = Matrix(50, 3);
  d.columns = {"a", "b", "c"};
  d.arity = {0, 0, 0};
  std::vector<int> y(50);
  for (std::size_t i = 0; i < 50; ++i) {
    y[i] = i % 4 == 0;
    for (std::size_t c = 0; c < 3; ++c) d.x(i, c) = nd(g) + 0.7 * y[i];
  }
  auto scaled = d;
  for (auto& v : scaled.x.data()) v *= 250.0;
  const auto m = nb_train(d, y), s = nb_train(scaled, y);
  for (std::size_t i = 0; i < 50; ++i)
    CHECK(m.predict_proba(d.x.row(i)) == doctest::Approx(s.predict_proba(scaled.x.row(i))).epsilon(1e-9));
}

namespace {

// Emotion i equals binary feature column i; two noise columns.
struct Fixture {
  FeatureMatrix features;
  LabelMatrix labels;
};

Fixture separable(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> nd;
  Fixture f;
  f.features.values = Matrix(n, kEmotionCount + 2);
  for (std::size_t i = 0; i < kEmotionCount; ++i) f.features.columns.push_back("e" + std::to_string(i));
  f.features.columns.push_back("z0");
  f.features.columns.push_back("z1");
  f.labels.threshold = 0.3;
  for (std::size_t r = 0; r < n; ++r) {
    const auto id = static_cast<std::uint32_t>(r + 1);
    f.features.track_ids.push_back(id);
    f.labels.track_ids.push_back(id);
    std::array<std::uint8_t, kEmotionCount> row{};
    for (std::size_t e = 0; e < kEmotionCount; ++e) {
      row[e] = static_cast<std::uint8_t>((r * (e + 3) / 2 + e + r / 3) % 2);
      f.features.values(r, e) = row[e];
    }
    f.features.values(r, kEmotionCount) = nd(g);
    f.features.values(r, kEmotionCount + 1) = nd(g);
    f.labels.values.push_back(row);
  }
  return f;
}

}  // namespace

TEST_CASE("binary relevance: a label copied into a feature is learned by every family") {
  const auto f = separable(48, 1);
  for (Family fam : {Family::kNaiveBayes, Family::kSvm, Family::kMlp}) {
    ClassifierSpec spec;
    spec.family = fam;
    spec.mlp.epochs = 300;
    const auto model = binary_relevance_train(f.features, f.labels, PreprocessSpec{}, spec);
    const auto pred = predict(model, f.features);
    for (std::size_t e = 0; e < kEmotionCount; ++e) {
      std::size_t right = 0;
      for (std::size_t r = 0; r < pred.size(); ++r) right += pred[r].label[e] == f.labels.values[r][e];
      INFO(family_name(fam), " emotion ", e);
      CHECK(right == pred.size());
    }
    // x with the feature set -> probability above one half
    for (std::size_t r = 0; r < pred.size(); ++r)
      if (f.features.values(r, 0) == 1.0) CHECK(pred[r].probability[0] > 0.5);
  }
}

TEST_CASE("binary relevance: identical rows give the majority rate") {
  auto f = separable(40, 2);
  for (auto& v : f.features.values.data()) v = 1.0;
  ClassifierSpec spec;
  const auto model = binary_relevance_train(f.features, f.labels, PreprocessSpec{}, spec);
  const auto pred = predict(model, f.features);
  for (std::size_t e = 0; e < kEmotionCount; ++e) {
    std::size_t pos = 0, right = 0;
    for (std::size_t r = 0; r < pred.size(); ++r) {
      pos += f.labels.values[r][e];
      right += pred[r].label[e] == f.labels.values[r][e];
    }
    CHECK(right == std::max(pos, pred.size() - pos));
  }
}

TEST_CASE("binary relevance: permuting one emotion only changes that model") {
  const auto f = separable(48, 3);
  auto g = f;
  std::mt19937_64 rng(5);
  std::vector<std::uint8_t> col;
  for (const auto& row : g.labels.values) col.push_back(row[4]);
  std::shuffle(col.begin(), col.end(), rng);
  for (std::size_t r = 0; r < col.size(); ++r) g.labels.values[r][4] = col[r];
  ClassifierSpec spec;
  spec.family = Family::kSvm;
  const auto a = to_json(binary_relevance_train(f.features, f.labels, PreprocessSpec{}, spec));
  const auto b = to_json(binary_relevance_train(g.features, g.labels, PreprocessSpec{}, spec));
  for (std::size_t e = 0; e < kEmotionCount; ++e) {
    const bool same = a["emotions"][e] == b["emotions"][e];
    CHECK(same == (e != 4));
  }
}

TEST_CASE("binary relevance: single-class emotion names the emotion") {
  auto f = separable(20, 4);
  for (auto& row : f.labels.values) row[index_of(Emotion::kSadness)] = 0;
  try {
    binary_relevance_train(f.features, f.labels, PreprocessSpec{}, ClassifierSpec{});
    FAIL("expected an error");
  } catch (const InputError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("sadness") != std::string::npos);
    CHECK(msg.find("threshold") != std::string::npos);
  }
}

TEST_CASE("model json round trip keeps predictions") {
  const auto f = separable(32, 6);
  for (Family fam : {Family::kNaiveBayes, Family::kSvm, Family::kMlp}) {
    ClassifierSpec spec;
    spec.family = fam;
    spec.mlp.epochs = 40;
    const auto model = binary_relevance_train(f.features, f.labels, PreprocessSpec::parse("discr+cfs"), spec);
    const auto j = to_json(model);
    CHECK(j["format_version"] == kModelFormatVersion);
    const auto back = multilabel_from_json(nlohmann::json::parse(j.dump()));
    const auto p = predict(model, f.features), q = predict(back, f.features);
    for (std::size_t r = 0; r < p.size(); ++r) CHECK(p[r].probability == q[r].probability);
  }
  auto bad = to_json(binary_relevance_train(f.features, f.labels, PreprocessSpec{}, ClassifierSpec{}));
  bad["format_version"] = 99;
  CHECK_THROWS_AS(multilabel_from_json(bad), InputError);
}

TEST_CASE("classifier names") {
  CHECK(parse_family("bayes") == Family::kNaiveBayes);
  CHECK(parse_family("smo") == Family::kSvm);
  CHECK(parse_family("mlp") == Family::kMlp);
  CHECK_THROWS_AS(parse_family("tree"), InputError);
}
