#pragma once

// Seeded property loops shared by the unit tests and the acceptance gate.

#include <cmath>
#include <string>
#include <vector>

#include "moodpipe/learn.hpp"
#include "moodpipe/preprocess.hpp"
#include "oracles.hpp"

namespace props {

struct Tally {
  std::size_t passed = 0;
  std::size_t total = 0;
  std::string first_failure;

  void record(bool ok, const std::string& what) {
    ++total;
    if (ok) ++passed;
    else if (first_failure.empty()) first_failure = what;
  }
  bool all() const { return passed == total; }
  double share() const { return total ? static_cast<double>(passed) / total : 0.0; }
};

// Random column of n <= 30 values from a small grid (forces ties) against a
// class that depends on the value plus noise.
inline Tally mdl_vs_bruteforce(std::size_t instances = 200) {
  Tally t;
  for (std::size_t s = 0; s < instances; ++s) {
    std::mt19937_64 g(1000 + s);
    const std::size_t n = 2 + g() % 29;
    const int grid = 3 + static_cast<int>(g() % 20);
    std::vector<double> x(n);
    std::vector<int> y(n);
    const double split = std::uniform_real_distribution<double>(0, grid)(g);
    const double noise = std::uniform_real_distribution<double>(0, 0.4)(g);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(g() % grid) * 0.5 - 1.0;
      y[i] = (x[i] > split * 0.5 - 1.0) ? 1 : 0;
      if (std::uniform_real_distribution<double>(0, 1)(g) < noise) y[i] = 1 - y[i];
    }
    const auto got = moodpipe::mdl_discretize(x, y);
    const auto want = oracle::mdl_cuts(x, y);
    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i) same = std::abs(got[i] - want[i]) < 1e-12;
    t.record(same, "seed " + std::to_string(1000 + s));
  }
  return t;
}

// Columns built from the label, a shared nuisance factor and noise, so that
// redundancy and relevance trade off.
inline moodpipe::Dataset cfs_instance(std::uint64_t seed, std::vector<int>& y) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> nd;
  const std::size_t n = 80;
  const std::size_t d = 3 + g() % 8;
  y.assign(n, 0);
  std::vector<double> latent(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(g() % 2);
    latent[i] = nd(g);
  }
  moodpipe::Dataset data;
  data.x = moodpipe::Matrix(n, d);
  data.arity.assign(d, 0);
  for (std::size_t c = 0; c < d; ++c) {
    data.columns.push_back("f" + std::to_string(c));
    const double a = std::uniform_real_distribution<double>(0, 1.5)(g);
    const double b = std::uniform_real_distribution<double>(0, 1.5)(g);
    for (std::size_t i = 0; i < n; ++i) data.x(i, c) = a * y[i] + b * latent[i] + nd(g);
  }
  return data;
}

inline Tally cfs_vs_exhaustive(std::size_t instances = 100) {
  Tally t;
  for (std::size_t s = 0; s < instances; ++s) {
    std::vector<int> y;
    const auto data = cfs_instance(500 + s, y);
    const auto table = moodpipe::cfs_correlations(data, y);
    const auto best = oracle::exhaustive_cfs(table.r_cf, table.r_ff);
    const auto found = moodpipe::cfs_search(table);
    const double merit = moodpipe::subset_merit(table, found, moodpipe::MeritForm::kHall);
    t.record(merit >= best.merit - 1e-9, "seed " + std::to_string(500 + s));
  }
  return t;
}

inline moodpipe::Matrix svm_points(std::uint64_t seed, std::size_t n, std::vector<int>& y, bool separable) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> nd;
  moodpipe::Matrix x(n, 2);
  y.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = i % 2 ? 1 : -1;
    const double shift = separable ? 2.0 : 0.5;
    x(i, 0) = nd(g) * 0.6 + y[i] * shift;
    x(i, 1) = nd(g) * 0.6 + 1.0;
  }
  return x;
}

// Dual objective against the face-enumeration optimum on 4..6 points.
inline Tally smo_vs_qp(std::size_t instances = 60) {
  Tally t;
  const double cs[] = {0.5, 1.0, 10.0};
  for (std::size_t s = 0; s < instances; ++s) {
    std::vector<int> y;
    const std::size_t n = 4 + s % 3;
    const auto x = svm_points(2000 + s, n, y, s % 2 == 0);
    moodpipe::SmoOptions opt;
    opt.c = cs[s % 3];
    opt.tol = 1e-8;
    opt.kernel.degree = 1 + static_cast<int>(s % 2);
    opt.seed = s;
    const auto sol = moodpipe::smo_solve(x, y, opt);
    const auto gram = moodpipe::gram_matrix(x, opt.kernel);
    Eigen::MatrixXd k(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) k(i, j) = gram(i, j);
    const auto best = oracle::svm_dual(k, y, opt.c);
    const double got = moodpipe::svm_dual_objective(gram, y, sol.alpha);
    t.record(sol.converged && std::abs(got - best.objective) <= 1e-6,
             "seed " + std::to_string(2000 + s) + " smo " + std::to_string(got) + " oracle " +
                 std::to_string(best.objective));
  }
  return t;
}

// KKT at tol 1e-3 on converged models, default solver settings.
inline Tally smo_kkt(std::size_t instances = 40) {
  Tally t;
  for (std::size_t s = 0; s < instances; ++s) {
    std::vector<int> y;
    const std::size_t n = 10 + s % 30;
    const auto x = svm_points(3000 + s, n, y, s % 3 == 0);
    moodpipe::SmoOptions opt;
    opt.c = s % 2 ? 1.0 : 5.0;
    opt.seed = s;
    const auto sol = moodpipe::smo_solve(x, y, opt);
    if (!sol.converged) continue;
    const auto gram = moodpipe::gram_matrix(x, opt.kernel);
    const double tol = 1e-3;
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) {
      double f = sol.bias;
      for (std::size_t j = 0; j < n; ++j) f += sol.alpha[j] * y[j] * gram(i, j);
      const double m = y[i] * f;
      const double a = sol.alpha[i];
      if (a <= 0.0) ok = ok && m >= 1 - tol;
      else if (a >= opt.c) ok = ok && m <= 1 + tol;
      else ok = ok && std::abs(m - 1) <= tol;
    }
    t.record(ok, "seed " + std::to_string(3000 + s));
  }
  return t;
}

// Analytic gradient against central differences on a 3x2x1 network.
inline Tally mlp_gradients(std::size_t instances = 50) {
  Tally t;
  for (std::size_t s = 0; s < instances; ++s) {
    std::mt19937_64 g(4000 + s);
    std::normal_distribution<double> nd;
    auto net = moodpipe::mlp_init(3, 2, 4000 + s);
    auto params = moodpipe::mlp_parameters(net);
    for (auto& p : params) p *= 3.0;  // leave the near-linear region
    moodpipe::mlp_set_parameters(net, params);
    moodpipe::Matrix z(5, 3);
    std::vector<int> y(5);
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t c = 0; c < 3; ++c) z(i, c) = nd(g);
      y[i] = static_cast<int>(g() % 2);
    }
    const auto analytic = moodpipe::mlp_loss(net, z, y).gradient;
    const auto numeric = oracle::numeric_gradient(
        [&](const std::vector<double>& p) {
          auto copy = net;
          moodpipe::mlp_set_parameters(copy, p);
          return moodpipe::mlp_loss(copy, z, y).loss;
        },
        params);
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-6});
      worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
    }
    t.record(worst < 1e-4, "seed " + std::to_string(4000 + s) + " rel " + std::to_string(worst));
  }
  return t;
}

// One binary column: class 1 has x=1 in 3 of 4 rows, class 0 in 1 of 4.
inline moodpipe::Dataset nb_fixture(std::vector<int>& y) {
  moodpipe::Dataset d;
  d.x = moodpipe::Matrix(8, 1);
  d.columns = {"x"};
  d.arity = {2};
  const double xs[] = {1, 1, 1, 0, 1, 0, 0, 0};
  y = {1, 1, 1, 1, 0, 0, 0, 0};
  for (std::size_t i = 0; i < 8; ++i) d.x(i, 0) = xs[i];
  return d;
}

inline Tally nb_checks() {
  Tally t;
  std::vector<int> y;
  const auto d = nb_fixture(y);
  const auto m = moodpipe::nb_train(d, y);
  const double one[] = {1.0};
  const double zero[] = {0.0};
  const double p1 = m.predict_proba(one);
  // (0.5 * 4/6) / (0.5 * 4/6 + 0.5 * 2/6)
  t.record(std::abs(p1 - 2.0 / 3.0) < 1e-12, "fixture posterior " + std::to_string(p1));
  const double p0 = m.predict_proba(zero);
  t.record(std::abs(p0 - 1.0 / 3.0) < 1e-12, "fixture posterior at 0");
  // posteriors of both classes sum to 1 on random continuous data
  for (std::uint64_t s = 0; s < 20; ++s) {
    std::mt19937_64 g(6000 + s);
    std::normal_distribution<double> nd;
    moodpipe::Dataset c;
    c.x = moodpipe::Matrix(30, 3);
    c.columns = {"a", "b", "c"};
    c.arity = {0, 0, 0};
    std::vector<int> yy(30);
    for (std::size_t i = 0; i < 30; ++i) {
      yy[i] = i % 3 == 0;
      for (std::size_t k = 0; k < 3; ++k) c.x(i, k) = nd(g) + yy[i];
    }
    const auto mc = moodpipe::nb_train(c, yy);
    // flip the classes and refit: P(1|x) under one must be P(0|x) under the other
    std::vector<int> flipped(yy.size());
    for (std::size_t i = 0; i < yy.size(); ++i) flipped[i] = 1 - yy[i];
    const auto mf = moodpipe::nb_train(c, flipped);
    bool ok = true;
    for (std::size_t i = 0; i < 30; ++i) {
      const double p = mc.predict_proba(c.x.row(i));
      const double q = mf.predict_proba(c.x.row(i));
      ok = ok && p >= 0 && p <= 1 && std::abs(p + q - 1.0) < 1e-12;
    }
    t.record(ok, "sum-to-one seed " + std::to_string(6000 + s));
  }
  return t;
}

}  // namespace props
