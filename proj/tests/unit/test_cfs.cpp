#include <doctest.h>

#include <cmath>
#include <random>

#include "moodpipe/preprocess.hpp"
#include "moodpipe/serial.hpp"
#include "oracles.hpp"
#include "properties.hpp"

using namespace moodpipe;

TEST_CASE("merit formula examples") {
  CHECK(cfs_merit(1, 0.8, 0.3) == doctest::Approx(0.8));
  CHECK(cfs_merit(1, 0.8, 0.9) == doctest::Approx(0.8));
  CHECK(cfs_merit(2, 0.5, 1.0) == doctest::Approx(1.0 / std::sqrt(3.0)));
  CHECK(cfs_merit(2, 0.5, 0.0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  // Hall's denominator k + k(k-1) r_ff
  CHECK(cfs_merit(3, 0.5, 0.5, MeritForm::kHall) == doctest::Approx(1.5 / std::sqrt(6.0)));
  CHECK(cfs_merit(1, 0.7, 0.2, MeritForm::kHall) == doctest::Approx(cfs_merit(1, 0.7, 0.2)));
  CHECK_THROWS(cfs_merit(3, 0.5, -1.0, MeritForm::kHall));
}

namespace {
Dataset two_columns(const std::vector<double>& a, const std::vector<double>& b) {
  Dataset d;
  d.x = Matrix(a.size(), 2);
  d.columns = {"a", "b"};
  d.arity = {0, 0};
  for (std::size_t i = 0; i < a.size(); ++i) {
    d.x(i, 0) = a[i];
    d.x(i, 1) = b[i];
  }
  return d;
}
}  // namespace

TEST_CASE("selection examples") {
  std::mt19937_64 g(3);
  std::normal_distribution<double> nd;
  std::vector<int> y(60);
  std::vector<double> lab(60), noise(60);
  for (std::size_t i = 0; i < 60; ++i) {
    y[i] = static_cast<int>(i % 2);
    lab[i] = y[i];
    noise[i] = nd(g);
  }
  CHECK(cfs_select(two_columns(noise, lab), y) == std::vector<std::string>{"b"});
  // identical informative pair: one of them, never both
  const auto twin = cfs_select(two_columns(lab, lab), y);
  CHECK(twin.size() == 1);

  // all noise: the single column with the highest r_cf
  Dataset d;
  d.x = Matrix(60, 5);
  d.arity.assign(5, 0);
  std::vector<double> r(5);
  for (std::size_t c = 0; c < 5; ++c) {
    d.columns.push_back("n" + std::to_string(c));
    std::vector<double> col(60);
    for (std::size_t i = 0; i < 60; ++i) col[i] = d.x(i, c) = nd(g);
    r[c] = std::abs(oracle::pearson(col, lab));
  }
  const auto picked = cfs_select(d, y);
  REQUIRE_FALSE(picked.empty());
  const auto top = std::max_element(r.begin(), r.end()) - r.begin();
  CHECK(std::find(picked.begin(), picked.end(), d.columns[static_cast<std::size_t>(top)]) != picked.end());
}

TEST_CASE("correlations: pearson and symmetric uncertainty") {
  std::vector<int> y;
  const auto data = props::cfs_instance(42, y);
  const auto t = cfs_correlations(data, y);
  const std::vector<double> yd(y.begin(), y.end());
  for (std::size_t c = 0; c < data.cols(); ++c) {
    CHECK(t.r_cf[c] == doctest::Approx(std::abs(oracle::pearson(data.x.column(c), yd))).epsilon(1e-12));
    for (std::size_t k = 0; k < data.cols(); ++k) CHECK(t.r_ff[c][k] == t.r_ff[k][c]);
  }

  // SU = 2 I(A;B) / (H(A) + H(B))
  const std::vector<int> a{0, 0, 1, 1, 2, 2}, b{0, 0, 1, 1, 1, 0};
  const double ha = oracle::entropy_of(a), hb = oracle::entropy_of(b);
  std::vector<int> ab(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) ab[i] = a[i] * 10 + b[i];
  const double mi = ha + hb - oracle::entropy_of(ab);
  CHECK(symmetric_uncertainty(a, b) == doctest::Approx(2 * mi / (ha + hb)).epsilon(1e-12));
  CHECK(symmetric_uncertainty(a, a) == doctest::Approx(1.0));
}

TEST_CASE("best-first search reaches the exhaustive optimum on >= 95% of instances") {
  const auto t = props::cfs_vs_exhaustive(100);
  MESSAGE("cfs optimum matched on " << t.passed << "/" << t.total);
  CHECK(t.share() >= 0.95);
}

TEST_CASE("parallel correlations equal the serial reference") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    std::vector<int> y;
    const auto data = props::cfs_instance(70 + s, y);
    const auto p = cfs_correlations(data, y);
    const auto q = serial::cfs_correlations(data, y);
    CHECK(p.r_cf == q.r_cf);
    CHECK(p.r_ff == q.r_ff);
  }
}
