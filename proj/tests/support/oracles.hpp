#pragma once

// Independent reference computations for the property tests. Nothing here
// calls into the library kernels being checked.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <vector>

namespace oracle {

inline double entropy_of(const std::vector<int>& labels) {
  std::map<int, double> c;
  for (int v : labels) c[v] += 1.0;
  double h = 0.0;
  for (auto& [k, n] : c) {
    const double p = n / labels.size();
    h -= p * std::log2(p);
  }
  return h;
}

// Contingency-table entropies.
inline double dissimilarity(const std::vector<int>& a, const std::vector<int>& c) {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ma, mc;
  const double n = static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], c[i]}] += 1;
    ma[a[i]] += 1;
    mc[c[i]] += 1;
  }
  double hj = 0, ha = 0, hc = 0;
  for (auto& [k, v] : joint) hj -= v / n * std::log2(v / n);
  for (auto& [k, v] : ma) ha -= v / n * std::log2(v / n);
  for (auto& [k, v] : mc) hc -= v / n * std::log2(v / n);
  if (hj == 0.0) return 0.0;
  return ((hj - hc) + (hj - ha)) / hj;
}

// Fayyad-Irani recursion over every midpoint between distinct values.
inline void mdl_recurse(std::vector<std::pair<double, int>> s, std::vector<double>& cuts) {
  const std::size_t n = s.size();
  if (n < 2) return;
  std::sort(s.begin(), s.end());
  auto cls = [](const std::vector<std::pair<double, int>>& v, std::size_t b, std::size_t e) {
    std::vector<int> out;
    for (std::size_t i = b; i < e; ++i) out.push_back(v[i].second);
    return out;
  };
  auto distinct = [](const std::vector<int>& v) { return std::set<int>(v.begin(), v.end()).size(); };
  const auto all = cls(s, 0, n);
  const double h = entropy_of(all);
  double best_gain = -1.0;
  std::size_t best_i = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (s[i].first == s[i - 1].first) continue;
    const auto l = cls(s, 0, i), r = cls(s, i, n);
    const double gain = h - (static_cast<double>(i) / n) * entropy_of(l) -
                        (static_cast<double>(n - i) / n) * entropy_of(r);
    if (gain > best_gain + 1e-12) {
      best_gain = gain;
      best_i = i;
    }
  }
  if (best_i == 0) return;
  const auto l = cls(s, 0, best_i), r = cls(s, best_i, n);
  const double k = distinct(all), k1 = distinct(l), k2 = distinct(r);
  const double delta = std::log2(std::pow(3.0, k) - 2.0) - (k * h - k1 * entropy_of(l) - k2 * entropy_of(r));
  const double bound = (std::log2(static_cast<double>(n) - 1.0) + delta) / n;
  if (!(best_gain > bound)) return;
  cuts.push_back((s[best_i - 1].first + s[best_i].first) / 2.0);
  mdl_recurse({s.begin(), s.begin() + static_cast<std::ptrdiff_t>(best_i)}, cuts);
  mdl_recurse({s.begin() + static_cast<std::ptrdiff_t>(best_i), s.end()}, cuts);
}

inline std::vector<double> mdl_cuts(const std::vector<double>& x, const std::vector<int>& y) {
  std::vector<std::pair<double, int>> s;
  for (std::size_t i = 0; i < x.size(); ++i) s.emplace_back(x[i], y[i]);
  std::vector<double> cuts;
  mdl_recurse(s, cuts);
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

// Hall's merit over every non-empty subset.
struct SubsetOptimum {
  double merit = -1.0;
  std::vector<std::size_t> subset;
};

inline SubsetOptimum exhaustive_cfs(const std::vector<double>& r_cf, const std::vector<std::vector<double>>& r_ff) {
  const std::size_t d = r_cf.size();
  SubsetOptimum best;
  for (std::uint32_t mask = 1; mask < (1u << d); ++mask) {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < d; ++i)
      if (mask & (1u << i)) s.push_back(i);
    const double k = static_cast<double>(s.size());
    double cf = 0.0, ff = 0.0;
    for (auto i : s) cf += r_cf[i];
    for (std::size_t a = 0; a < s.size(); ++a)
      for (std::size_t b = a + 1; b < s.size(); ++b) ff += r_ff[s[a]][s[b]];
    cf /= k;
    if (s.size() > 1) ff /= k * (k - 1) / 2.0;
    const double m = k * cf / std::sqrt(k + k * (k - 1) * ff);
    if (m > best.merit + 1e-12) best = {m, s};
  }
  return best;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0 || sbb == 0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

// Two-sided Student tail by Simpson's rule on x = t + u/(1-u).
inline double t_two_sided_p(double t, double df) {
  t = std::abs(t);
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * M_PI);
  auto f = [&](double u) {
    if (u >= 1.0) return 0.0;
    const double x = t + u / (1.0 - u);
    return c * std::pow(1.0 + x * x / df, -(df + 1) / 2) / ((1.0 - u) * (1.0 - u));
  };
  const int m = 200000;
  const double h = 1.0 / m;
  double s = f(0.0) + f(1.0);
  for (int i = 1; i < m; ++i) s += f(i * h) * (i % 2 ? 4.0 : 2.0);
  return 2.0 * s * h / 3.0;
}

// Soft-margin dual maximized face by face: each alpha is pinned at 0, at C,
// or free; free ones solve the KKT system with the equality constraint.
struct DualOptimum {
  double objective = -std::numeric_limits<double>::infinity();
  std::vector<double> alpha;
};

inline double dual_objective(const Eigen::MatrixXd& q, const std::vector<double>& alpha) {
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
  return a.sum() - 0.5 * a.dot(q * a);
}

inline DualOptimum svm_dual(const Eigen::MatrixXd& gram, const std::vector<int>& y, double c) {
  const int n = static_cast<int>(y.size());
  Eigen::MatrixXd q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) q(i, j) = y[i] * y[j] * gram(i, j);
  int faces = 1;
  for (int i = 0; i < n; ++i) faces *= 3;
  DualOptimum best;
  for (int code = 0; code < faces; ++code) {
    std::vector<int> state(n);
    int v = code;
    for (int i = 0; i < n; ++i) {
      state[i] = v % 3;
      v /= 3;
    }
    std::vector<int> fr;
    std::vector<double> alpha(n, 0.0);
    for (int i = 0; i < n; ++i) {
      if (state[i] == 1) alpha[i] = c;
      if (state[i] == 2) fr.push_back(i);
    }
    if (!fr.empty()) {
      const int m = static_cast<int>(fr.size());
      Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m + 1, m + 1);
      Eigen::VectorXd rhs(m + 1);
      double fixed_sum = 0.0;
      for (int i = 0; i < n; ++i)
        if (state[i] == 1) fixed_sum += y[i] * c;
      for (int a = 0; a < m; ++a) {
        double g = 1.0;
        for (int i = 0; i < n; ++i)
          if (state[i] == 1) g -= q(fr[a], i) * c;
        for (int b = 0; b < m; ++b) k(a, b) = q(fr[a], fr[b]);
        k(a, m) = y[fr[a]];
        k(m, a) = y[fr[a]];
        rhs(a) = g;
      }
      rhs(m) = -fixed_sum;
      const Eigen::VectorXd sol = k.completeOrthogonalDecomposition().solve(rhs);
      if ((k * sol - rhs).norm() > 1e-8) continue;
      bool ok = true;
      for (int a = 0; a < m; ++a) {
        if (sol(a) <= 0.0 || sol(a) >= c) ok = false;
        alpha[fr[a]] = sol(a);
      }
      if (!ok) continue;
    }
    double eq = 0.0;
    for (int i = 0; i < n; ++i) eq += y[i] * alpha[i];
    if (std::abs(eq) > 1e-9) continue;
    const double obj = dual_objective(q, alpha);
    if (obj > best.objective) best = {obj, alpha};
  }
  return best;
}

// Central differences of a scalar function of a parameter vector.
inline std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                            std::vector<double> p, double eps = 1e-5) {
  std::vector<double> g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + eps;
    const double up = f(p);
    p[i] = keep - eps;
    const double down = f(p);
    p[i] = keep;
    g[i] = (up - down) / (2 * eps);
  }
  return g;
}

}  // namespace oracle
