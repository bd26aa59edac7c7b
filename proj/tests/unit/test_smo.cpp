#include <doctest.h>

#include <cmath>
#include <random>

#include "moodpipe/learn.hpp"
#include "oracles.hpp"
#include "properties.hpp"

using namespace moodpipe;

TEST_CASE("two symmetric points") {
  Matrix x(2, 1);
  x(0, 0) = -1;
  x(1, 0) = 1;
  const std::vector<int> y{-1, 1};
  SmoOptions opt;
  const auto sol = smo_solve(x, y, opt);
  CHECK(sol.converged);
  CHECK(sol.alpha[0] == doctest::Approx(sol.alpha[1]));
  // max 2a - 2a^2 -> a = 0.5, boundary at 0
  CHECK(sol.alpha[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(sol.bias == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("xor is not linearly separable") {
  Dataset d;
  d.x = Matrix(4, 2);
  d.columns = {"a", "b"};
  d.arity = {0, 0};
  const double pts[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  const std::vector<int> y{0, 1, 1, 0};
  for (std::size_t i = 0; i < 4; ++i) {
    d.x(i, 0) = pts[i][0];
    d.x(i, 1) = pts[i][1];
  }
  const auto m = smo_train(d, y, SvmParams{}, 1);
  int right = 0;
  for (std::size_t i = 0; i < 4; ++i) right += (m.decision(d.x.row(i)) > 0) == (y[i] == 1);
  CHECK(right <= 3);
}

TEST_CASE("dual objective matches the face-enumeration QP oracle") {
  const auto t = props::smo_vs_qp(60);
  INFO(t.first_failure);
  CHECK(t.all());
}

TEST_CASE("KKT conditions at tol 1e-3 on converged models") {
  const auto t = props::smo_kkt(40);
  INFO(t.first_failure);
  CHECK(t.total > 30);
  CHECK(t.all());
}

TEST_CASE("dual objective never decreases during optimization") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    std::vector<int> y;
    const auto x = props::svm_points(9000 + s, 30, y, false);
    SmoOptions opt;
    opt.seed = s;
    const auto gram = gram_matrix(x, opt.kernel);
    double last = 0.0;
    bool monotone = true;
    std::size_t steps = 0;
    opt.on_step = [&](std::span<const double> alpha) {
      const double obj = svm_dual_objective(gram, y, alpha);
      monotone = monotone && obj >= last - 1e-12;
      last = obj;
      ++steps;
    };
    const auto sol = smo_solve(x, y, opt);
    CHECK(steps == sol.iterations);
    CHECK(monotone);
  }
}

TEST_CASE("iteration cap reports non-convergence") {
  std::vector<int> y;
  const auto x = props::svm_points(77, 40, y, false);
  SmoOptions opt;
  opt.max_iterations = 2;
  const auto sol = smo_solve(x, y, opt);
  CHECK_FALSE(sol.converged);
  CHECK(sol.iterations == 2);
}

TEST_CASE("platt fit matches a fine-grid likelihood maximum") {
  std::mt19937_64 g(17);
  std::normal_distribution<double> nd;
  std::vector<double> f(40);
  std::vector<int> y(40);
  for (std::size_t i = 0; i < 40; ++i) {
    y[i] = i % 2;
    f[i] = (y[i] ? 1.5 : -1.5) + nd(g) * 0.4 + (i % 7 == 0 ? (y[i] ? -2.0 : 2.0) : 0.0);
  }
  const auto fit = platt_fit(f, y);

  // smoothed targets as in the regularized fit
  double np = 0, nn = 0;
  for (int v : y) (v ? np : nn) += 1;
  const double hi = (np + 1) / (np + 2), lo = 1 / (nn + 2);
  auto nll = [&](double a, double b) {
    double s = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double p = 1 / (1 + std::exp(a * f[i] + b));
      const double t = y[i] ? hi : lo;
      s -= t * std::log(p) + (1 - t) * std::log(1 - p);
    }
    return s;
  };
  double ba = 0, bb = 0, best = 1e300;
  for (double a = -8; a <= 0; a += 0.005)
    for (double b = -2; b <= 2; b += 0.005) {
      const double v = nll(a, b);
      if (v < best) best = v, ba = a, bb = b;
    }
  CHECK(fit.a == doctest::Approx(ba).epsilon(0.01));
  CHECK(std::abs(fit.b - bb) < 0.01);
  CHECK(nll(fit.a, fit.b) <= best + 1e-9);
}

TEST_CASE("platt on separated scores and degenerate scores") {
  std::vector<double> f;
  std::vector<int> y;
  // 40 per class; smoothed positive target 41/42
  for (int i = 0; i < 80; ++i) {
    f.push_back(i < 40 ? -2.0 - 0.05 * i : 2.0 + 0.05 * (i - 40));
    y.push_back(i < 40 ? 0 : 1);
  }
  const auto fit = platt_fit(f, y);
  for (std::size_t i = 40; i < 80; ++i) CHECK(fit(f[i]) >= 0.9);

  const std::vector<double> flat(10, 0.3);
  const std::vector<int> half{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  const auto d = platt_fit(flat, half);
  CHECK(d.a == 0.0);
  CHECK(d(0.3) == doctest::Approx(0.5));
  CHECK(d(-7.0) == doctest::Approx(0.5));

  // mirrored scores give mirrored probabilities
  std::vector<double> neg(f.size());
  std::vector<int> flip(y.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    neg[i] = -f[i];
    flip[i] = y[i];
  }
  const auto m = platt_fit(neg, flip);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(m(neg[i]) == doctest::Approx(fit(f[i])).epsilon(1e-6));
}

TEST_CASE("calibrated svm separates a feature copy of the label") {
  Dataset d;
  d.x = Matrix(40, 2);
  d.columns = {"copy", "noise"};
  d.arity = {0, 0};
  std::vector<int> y(40);
  std::mt19937_64 g(4);
  std::normal_distribution<double> nd;
  for (std::size_t i = 0; i < 40; ++i) {
    y[i] = (i * 7) % 3 == 0;
    d.x(i, 0) = y[i];
    d.x(i, 1) = nd(g);
  }
  const auto m = svm_train(d, y, SvmParams{}, 9);
  CHECK(m.platt.has_value());
  for (std::size_t i = 0; i < 40; ++i) CHECK((m.predict_proba(d.x.row(i)) > 0.5) == (y[i] == 1));
}
