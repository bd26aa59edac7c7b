#include <doctest.h>

#include <random>
#include <sstream>

#include "moodpipe/labeling.hpp"

using namespace moodpipe;

namespace {

AnnotationRecord rec(std::uint32_t id, std::initializer_list<Emotion> es) {
  AnnotationRecord r;
  r.track_id = id;
  for (auto e : es) r.selections.set(index_of(e));
  return r;
}

AnnotationTable random_table(std::uint64_t seed, std::size_t tracks) {
  std::mt19937_64 g(seed);
  std::vector<AnnotationRecord> recs;
  for (std::uint32_t t = 1; t <= tracks; ++t) {
    const std::size_t n = 1 + g() % 25;
    for (std::size_t k = 0; k < n; ++k) {
      AnnotationRecord r;
      r.track_id = t;
      const std::size_t picks = g() % 4;
      for (std::size_t p = 0; p < picks; ++p) r.selections.set(g() % kEmotionCount);
      recs.push_back(r);
    }
  }
  return AnnotationTable(recs);
}

}  // namespace

TEST_CASE("emotion score examples") {
  const AnnotationTable t({rec(1, {Emotion::kPower}), rec(1, {Emotion::kPower}), rec(1, {Emotion::kPower}),
                           rec(1, {}), rec(2, {Emotion::kCalmness})});
  CHECK(emotion_score(t, 1, Emotion::kPower) == 0.75);
  CHECK(emotion_score(t, 1, Emotion::kSadness) == 0.0);
  CHECK_THROWS_AS(emotion_score(t, 3, Emotion::kPower), InputError);
}

TEST_CASE("score matrix examples") {
  const AnnotationTable one({rec(1, {Emotion::kCalmness})});
  const auto s = build_score_matrix(one);
  for (std::size_t e = 0; e < kEmotionCount; ++e) CHECK(s.values[0][e] == (e == index_of(Emotion::kCalmness)));

  const AnnotationTable two({rec(5, {Emotion::kPower}), rec(5, {Emotion::kPower, Emotion::kTension})});
  const auto m = build_score_matrix(two);
  CHECK(m.values[0][index_of(Emotion::kPower)] == 1.0);
  CHECK(m.values[0][index_of(Emotion::kTension)] == 0.5);
  CHECK(m.n_per_track[0] == 2);

  const auto r = build_score_matrix(random_table(3, 30));
  for (const auto& row : r.values) {
    double sum = 0;
    for (double v : row) sum += v;
    CHECK(sum <= 3.0 + 1e-12);
  }
}

TEST_CASE("consensus boundaries") {
  ScoreMatrix s;
  s.track_ids = {1};
  s.values = {{0.31, 0.30, 0.29, 0, 0, 0, 0, 0, 0}};
  s.n_per_track = {100};
  const auto l = apply_consensus(s, 0.30);
  CHECK(l.values[0][0] == 1);
  CHECK(l.values[0][1] == 1);
  CHECK(l.values[0][2] == 0);
  const auto strict = apply_consensus(s, 0.30, true);
  CHECK(strict.values[0][1] == 0);
  CHECK(strict.strict_greater);
  CHECK_THROWS_AS(apply_consensus(s, 0.0), InputError);
  CHECK_THROWS_AS(apply_consensus(s, 1.5), InputError);
}

TEST_CASE("consensus is monotone, idempotent and scale-invariant") {
  const auto table = random_table(9, 40);
  const auto s = build_score_matrix(table);
  for (double lo = 0.05; lo < 0.9; lo += 0.1) {
    const auto a = apply_consensus(s, lo), b = apply_consensus(s, lo + 0.07);
    for (std::size_t j = 0; j < a.values.size(); ++j)
      for (std::size_t e = 0; e < kEmotionCount; ++e) CHECK(b.values[j][e] <= a.values[j][e]);
    CHECK(apply_consensus(s, lo).values == a.values);
  }
  std::vector<AnnotationRecord> tripled;
  for (const auto& r : table.records())
    for (int k = 0; k < 3; ++k) tripled.push_back(r);
  CHECK(build_score_matrix(AnnotationTable(tripled)).values == s.values);
}

TEST_CASE("distribution stats") {
  ScoreMatrix zeros;
  zeros.track_ids = {1, 2};
  zeros.values = {EmotionRow{}, EmotionRow{}};
  zeros.n_per_track = {1, 1};
  const auto z = distribution_stats(zeros, 0.3);
  CHECK(z.mean_labels_per_track == 0.0);
  for (double v : z.trend) CHECK(v == 0.0);

  ScoreMatrix one;
  one.track_ids = {1};
  one.values = {{0, 0.25, 0, 1.0, 0, 0.5, 0, 0, 0}};
  one.n_per_track = {4};
  const auto d = distribution_stats(one, 0.3);
  CHECK(d.mean_labels_per_track == 2.0);
  CHECK(d.trend[0] == 1.0);
  CHECK(d.trend[1] == 0.5);
  CHECK(d.trend[2] == 0.25);
  CHECK(d.trend[3] == 0.0);

  const auto r = distribution_stats(build_score_matrix(random_table(4, 50)), 0.25);
  for (std::size_t i = 1; i < kEmotionCount; ++i) CHECK(r.trend[i] <= r.trend[i - 1]);
}

TEST_CASE("plateaus") {
  ScoreMatrix step;
  step.track_ids = {1, 2};
  step.values = {{1, 0, 0, 1, 0, 0, 0, 0, 0}, {0, 1, 1, 1, 0, 0, 0, 0, 1}};
  step.n_per_track = {1, 1};
  const auto sweep = threshold_sweep(step);
  CHECK(sweep.size() == 91);
  CHECK(sweep.front().threshold == doctest::Approx(0.05));
  CHECK(sweep.back().threshold == doctest::Approx(0.95));
  const auto flat = plateau_candidates(step);
  CHECK(flat.size() == sweep.size() - 2);

  // scores evenly spread over (0,1): the sweep drops at every step
  ScoreMatrix spread;
  for (std::uint32_t t = 0; t < 100; ++t) {
    spread.track_ids.push_back(t + 1);
    EmotionRow row{};
    for (std::size_t e = 0; e < kEmotionCount; ++e) row[e] = (t * kEmotionCount + e + 0.5) / 900.0;
    spread.values.push_back(row);
    spread.n_per_track.push_back(900);
  }
  const auto lin = threshold_sweep(spread);
  // oracle: no 3-step window with a change below 0.05 labels per track
  bool any_flat = false;
  for (std::size_t i = 0; i + 2 < lin.size(); ++i)
    any_flat |= std::abs(lin[i].mean_labels_per_track - lin[i + 2].mean_labels_per_track) < 0.05;
  CHECK_FALSE(any_flat);
  CHECK(plateau_candidates(spread).empty());
}

TEST_CASE("label csv round trip") {
  const auto l = apply_consensus(build_score_matrix(random_table(5, 10)), 0.25);
  std::ostringstream out;
  write_labels_csv(out, l);
  CHECK(out.str().rfind("track_id,amazement,solemnity,tenderness,nostalgia,calmness,power,joyful_activation,"
                        "tension,sadness",
                        0) == 0);
  std::istringstream in(out.str());
  const auto back = read_labels_csv(in);
  CHECK(back.values == l.values);
  CHECK(back.track_ids == l.track_ids);
}
