#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "moodpipe/learn.hpp"

namespace moodpipe {

Matrix gram_matrix(const Matrix& x, const Kernel& kernel) {
  const std::size_t n = x.rows();
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = kernel(x.row(i), x.row(j));
      k(i, j) = v;
      k(j, i) = v;
    }
  return k;
}

double svm_dual_objective(const Matrix& gram, std::span<const int> y, std::span<const double> alpha) {
  const std::size_t n = alpha.size();
  double lin = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lin += alpha[i];
    if (alpha[i] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) quad += alpha[i] * alpha[j] * y[i] * y[j] * gram(i, j);
  }
  return lin - 0.5 * quad;
}

SmoSolution smo_solve(const Matrix& x, std::span<const int> y, const SmoOptions& options) {
  const std::size_t n = x.rows();
  if (y.size() != n) throw InputError("label length does not match rows");
  if (!(options.c > 0.0)) throw InputError("C must be positive");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw InputError("SMO labels must be +1/-1");
  }
  if (!pos || !neg) throw InputError("training labels contain a single class");

  const Matrix k = gram_matrix(x, options.kernel);
  const double c = options.c;
  constexpr double kTau = 1e-12;

  // Minimization form: f(a) = 1/2 a'Qa - 1'a, gradient g = Qa - 1.
  std::vector<double> alpha(n, 0.0), g(n, -1.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(options.seed);
  rng.shuffle(order);

  const auto in_up = [&](std::size_t t) { return (y[t] == 1 && alpha[t] < c) || (y[t] == -1 && alpha[t] > 0.0); };
  const auto in_low = [&](std::size_t t) { return (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < c); };
  const std::size_t cap = options.max_iterations ? options.max_iterations : std::max<std::size_t>(1000000, 100 * n);

  SmoSolution sol;
  std::size_t iter = 0;
  for (; iter < cap; ++iter) {
    // Maximal violating pair with second-order selection of j.
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t : order) {
      if (in_up(t) && -y[t] * g[t] > gmax) {
        gmax = -y[t] * g[t];
        i = t;
      }
    }
    if (i == n) break;
    double gmin = std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    for (std::size_t t : order) {
      if (!in_low(t)) continue;
      const double v = -y[t] * g[t];
      gmin = std::min(gmin, v);
      const double b = gmax - v;
      if (b > 0.0) {
        double a = k(i, i) + k(t, t) - 2.0 * k(i, t);
        if (a <= 0.0) a = kTau;
        const double score = -(b * b) / a;
        if (score < best) {
          best = score;
          j = t;
        }
      }
    }
    if (gmax - gmin < options.tol || j == n) {
      sol.converged = true;
      break;
    }

    const double ai = alpha[i], aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-g[i] - g[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (g[i] - g[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double di = alpha[i] - ai, dj = alpha[j] - aj;
    for (std::size_t t = 0; t < n; ++t) {
      g[t] += y[t] * (y[i] * k(i, t) * di + y[j] * k(j, t) * dj);
    }
    if (options.on_step) options.on_step(alpha);
  }
  sol.iterations = iter;

  // rho as in the usual SMO solvers: average over free vectors, else midpoint.
  double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * g[t];
    if (alpha[t] > 0.0 && alpha[t] < c) {
      ++n_free;
      sum_free += yg;
    } else if ((alpha[t] >= c && y[t] == -1) || (alpha[t] <= 0.0 && y[t] == 1)) {
      ub = std::min(ub, yg);
    } else {
      lb = std::max(lb, yg);
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  sol.bias = -rho;
  sol.alpha = std::move(alpha);
  return sol;
}

// ---------------------------------------------------------------------------
// Platt

double PlattScaling::operator()(double f) const {
  const double z = a * f + b;
  // numerically stable 1/(1+exp(z))
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

PlattScaling platt_fit(std::span<const double> decision, std::span<const int> y) {
  const std::size_t n = decision.size();
  if (y.size() != n || n == 0) throw InputError("platt_fit: bad input lengths");
  double prior1 = 0.0, prior0 = 0.0;
  for (int v : y) (v > 0 ? prior1 : prior0) += 1.0;
  if (prior1 == 0.0 || prior0 == 0.0) throw InputError("platt_fit needs both classes");

  const auto [lo, hi] = std::minmax_element(decision.begin(), decision.end());
  if (*hi - *lo < 1e-12) {
    const double r = prior1 / static_cast<double>(n);
    return PlattScaling{0.0, std::log((1.0 - r) / r)};
  }

  // Newton's method with backtracking (Lin, Lin and Weng's formulation).
  const double hi_t = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo_t = 1.0 / (prior0 + 2.0);
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = y[i] > 0 ? hi_t : lo_t;

  double a = 0.0, b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  const auto objective = [&](double aa, double bb) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = decision[i] * aa + bb;
      f += z >= 0.0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return f;
  };
  double fval = objective(a, b);
  constexpr double kSigma = 1e-12, kEps = 1e-5, kMinStep = 1e-10;
  for (int it = 0; it < 100; ++it) {
    double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = decision[i] * a + b;
      double p, q;
      if (z >= 0.0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      const double d2 = p * q;
      h11 += decision[i] * decision[i] * d2;
      h22 += d2;
      h21 += decision[i] * d2;
      const double d1 = t[i] - p;
      g1 += decision[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < kEps && std::abs(g2) < kEps) break;
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= kMinStep) {
      const double na = a + step * da, nb = b + step * db;
      const double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < kMinStep) break;
  }
  return PlattScaling{a, b};
}

// ---------------------------------------------------------------------------
// SvmModel

std::vector<double> SvmModel::scale(std::span<const double> x) const {
  if (x.size() != scale_min.size()) throw InputError("svm input width mismatch");
  std::vector<double> z(x.size());
  for (std::size_t j = 0; j < x.size(); ++j)
    z[j] = scale_range[j] > 0.0 ? (x[j] - scale_min[j]) / scale_range[j] : 0.0;
  return z;
}

double SvmModel::decision(std::span<const double> x) const {
  const auto z = scale(x);
  double f = bias;
  for (std::size_t s = 0; s < support.rows(); ++s) f += coef[s] * kernel(support.row(s), z);
  return f;
}

double SvmModel::predict_proba(std::span<const double> x) const {
  const double f = decision(x);
  if (platt) return (*platt)(f);
  return f >= 0.0 ? 1.0 : 0.0;
}

namespace {

std::vector<int> signed_labels(std::span<const int> y) {
  std::vector<int> s(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 0 && y[i] != 1) throw InputError("labels must be 0/1");
    s[i] = y[i] ? 1 : -1;
  }
  return s;
}

}  // namespace

SvmModel smo_train(const Dataset& data, std::span<const int> y, const SvmParams& params, std::uint64_t seed) {
  const std::size_t n = data.rows(), d = data.cols();
  if (y.size() != n) throw InputError("label length does not match rows");
  SvmModel m;
  m.kernel.degree = params.degree;
  m.scale_min.assign(d, 0.0);
  m.scale_range.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t r = 0; r < n; ++r) {
      lo = std::min(lo, data.x(r, j));
      hi = std::max(hi, data.x(r, j));
    }
    m.scale_min[j] = n ? lo : 0.0;
    m.scale_range[j] = n ? hi - lo : 0.0;
  }
  Matrix z(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    const auto s = m.scale(data.x.row(r));
    std::copy(s.begin(), s.end(), z.row(r).begin());
  }
  const auto ys = signed_labels(y);
  SmoOptions opt;
  opt.c = params.c;
  opt.tol = params.tol;
  opt.kernel = m.kernel;
  opt.max_iterations = params.max_iterations;
  opt.seed = seed;
  const SmoSolution sol = smo_solve(z, ys, opt);

  std::vector<std::size_t> sv;
  for (std::size_t i = 0; i < n; ++i)
    if (sol.alpha[i] > 0.0) sv.push_back(i);
  m.support = z.take_rows(sv);
  for (auto i : sv) m.coef.push_back(sol.alpha[i] * ys[i]);
  m.bias = sol.bias;
  m.converged = sol.converged;
  return m;
}

void platt_calibrate(SvmModel& model, const Dataset& data, std::span<const int> y) {
  std::vector<double> f(data.rows());
  for (std::size_t r = 0; r < data.rows(); ++r) f[r] = model.decision(data.x.row(r));
  model.platt = platt_fit(f, y);
}

SvmModel svm_train(const Dataset& data, std::span<const int> y, const SvmParams& params, std::uint64_t seed) {
  const std::size_t n = data.rows();
  if (y.size() != n) throw InputError("label length does not match rows");
  SvmModel full = smo_train(data, y, params, seed);

  // Stratified inner holdout so both classes appear on each side when possible.
  Rng rng(mix_seed(seed, 0x9a77));
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t r = 0; r < n; ++r) by_class[static_cast<std::size_t>(y[r])].push_back(r);
  std::vector<std::size_t> fit_rows, cal_rows;
  bool usable = true;
  for (auto& rows : by_class) {
    rng.shuffle(rows);
    const auto held = static_cast<std::size_t>(std::lround(params.calibration_holdout * static_cast<double>(rows.size())));
    if (held == 0 || held >= rows.size()) usable = false;
    cal_rows.insert(cal_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(std::min(held, rows.size())));
    fit_rows.insert(fit_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(std::min(held, rows.size())), rows.end());
  }
  if (!usable) {
    // too few rows for a holdout: calibrate on the training decision values
    platt_calibrate(full, data, y);
    return full;
  }
  std::sort(fit_rows.begin(), fit_rows.end());
  std::sort(cal_rows.begin(), cal_rows.end());
  const auto subset = [&](const std::vector<std::size_t>& rows) {
    return Dataset{data.x.take_rows(rows), data.columns, data.arity};
  };
  const auto pick = [&](const std::vector<std::size_t>& rows) {
    std::vector<int> out;
    for (auto r : rows) out.push_back(y[r]);
    return out;
  };
  SvmModel inner = smo_train(subset(fit_rows), pick(fit_rows), params, seed);
  platt_calibrate(inner, subset(cal_rows), pick(cal_rows));
  full.platt = inner.platt;
  return full;
}

}  // namespace moodpipe
