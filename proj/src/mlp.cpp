#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "moodpipe/learn.hpp"

namespace moodpipe {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Eigen::Map<const RowMat> view(const Matrix& m) {
  return Eigen::Map<const RowMat>(m.data().data(), static_cast<Eigen::Index>(m.rows()),
                                  static_cast<Eigen::Index>(m.cols()));
}

// Dense copies of the network for batch evaluation.
struct Net {
  RowMat w1;
  Eigen::VectorXd b1;
  Eigen::VectorXd w2;
  double b2;
};

Net unpack(const MlpModel& m) {
  Net n;
  n.w1 = view(m.w1);
  n.b1 = Eigen::Map<const Eigen::VectorXd>(m.b1.data(), static_cast<Eigen::Index>(m.b1.size()));
  n.w2 = Eigen::Map<const Eigen::VectorXd>(m.w2.data(), static_cast<Eigen::Index>(m.w2.size()));
  n.b2 = m.b2;
  return n;
}

void pack(const Net& n, MlpModel& m) {
  std::copy(n.w1.data(), n.w1.data() + n.w1.size(), m.w1.data().begin());
  m.b1.assign(n.b1.data(), n.b1.data() + n.b1.size());
  m.w2.assign(n.w2.data(), n.w2.data() + n.w2.size());
  m.b2 = n.b2;
}

struct Grad {
  RowMat w1;
  Eigen::VectorXd b1;
  Eigen::VectorXd w2;
  double b2 = 0.0;
  double loss = 0.0;
};

Grad loss_grad(const Net& net, const Eigen::Ref<const RowMat>& z, const Eigen::VectorXd& y) {
  const auto n = static_cast<double>(z.rows());
  RowMat h = (z * net.w1.transpose()).rowwise() + net.b1.transpose();
  h = h.unaryExpr([](double v) { return sigmoid(v); });
  Eigen::VectorXd o = ((h * net.w2).array() + net.b2).matrix().unaryExpr([](double v) { return sigmoid(v); });
  const Eigen::VectorXd err = o - y;
  Grad g;
  g.loss = err.squaredNorm() / (2.0 * n);
  const Eigen::VectorXd dout = (err.array() * o.array() * (1.0 - o.array())).matrix() / n;
  g.w2 = h.transpose() * dout;
  g.b2 = dout.sum();
  const RowMat dh = ((dout * net.w2.transpose()).array() * h.array() * (1.0 - h.array())).matrix();
  g.w1 = dh.transpose() * z;
  g.b1 = dh.colwise().sum().transpose();
  return g;
}

}  // namespace

double MlpModel::forward_standardized(std::span<const double> z) const {
  double out = b2;
  for (std::size_t h = 0; h < w2.size(); ++h) {
    double a = b1[h];
    const auto row = w1.row(h);
    for (std::size_t j = 0; j < z.size(); ++j) a += row[j] * z[j];
    out += w2[h] * sigmoid(a);
  }
  return sigmoid(out);
}

double MlpModel::predict_proba(std::span<const double> x) const {
  if (x.size() != input_mean.size()) throw InputError("mlp input width mismatch");
  std::vector<double> z(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - input_mean[j]) / input_std[j];
  return forward_standardized(z);
}

MlpModel mlp_init(std::size_t inputs, std::size_t hidden, std::uint64_t seed) {
  MlpModel m;
  m.input_mean.assign(inputs, 0.0);
  m.input_std.assign(inputs, 1.0);
  m.w1 = Matrix(hidden, inputs);
  m.b1.assign(hidden, 0.0);
  m.w2.assign(hidden, 0.0);
  Rng rng(seed);
  for (auto& w : m.w1.data()) w = rng.uniform(-0.5, 0.5);
  for (auto& w : m.b1) w = rng.uniform(-0.5, 0.5);
  for (auto& w : m.w2) w = rng.uniform(-0.5, 0.5);
  m.b2 = rng.uniform(-0.5, 0.5);
  return m;
}

std::vector<double> mlp_parameters(const MlpModel& net) {
  std::vector<double> p(net.w1.data());
  p.insert(p.end(), net.b1.begin(), net.b1.end());
  p.insert(p.end(), net.w2.begin(), net.w2.end());
  p.push_back(net.b2);
  return p;
}

void mlp_set_parameters(MlpModel& net, std::span<const double> params) {
  const std::size_t nw = net.w1.data().size(), h = net.b1.size();
  if (params.size() != nw + 2 * h + 1) throw InputError("mlp parameter vector has the wrong length");
  std::copy(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(nw), net.w1.data().begin());
  std::copy(params.begin() + static_cast<std::ptrdiff_t>(nw), params.begin() + static_cast<std::ptrdiff_t>(nw + h),
            net.b1.begin());
  std::copy(params.begin() + static_cast<std::ptrdiff_t>(nw + h),
            params.begin() + static_cast<std::ptrdiff_t>(nw + 2 * h), net.w2.begin());
  net.b2 = params.back();
}

LossAndGradient mlp_loss(const MlpModel& net, const Matrix& z, std::span<const int> y) {
  if (y.size() != z.rows()) throw InputError("label length does not match rows");
  Eigen::VectorXd yv(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) yv[static_cast<Eigen::Index>(i)] = y[i];
  const Grad g = loss_grad(unpack(net), view(z), yv);
  LossAndGradient out;
  out.loss = g.loss;
  out.gradient.assign(g.w1.data(), g.w1.data() + g.w1.size());
  out.gradient.insert(out.gradient.end(), g.b1.data(), g.b1.data() + g.b1.size());
  out.gradient.insert(out.gradient.end(), g.w2.data(), g.w2.data() + g.w2.size());
  out.gradient.push_back(g.b2);
  return out;
}

MlpModel mlp_train(const Dataset& data, std::span<const int> y, const MlpParams& params, std::uint64_t seed) {
  const std::size_t n = data.rows(), d = data.cols();
  if (y.size() != n) throw InputError("label length does not match rows");
  if (n == 0) throw InputError("mlp needs at least one row");
  MlpModel m = mlp_init(d, params.hidden, seed);
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += data.x(r, j);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) ss += (data.x(r, j) - mean) * (data.x(r, j) - mean);
    const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    m.input_mean[j] = mean;
    m.input_std[j] = sd > 1e-12 ? sd : 1.0;
  }
  RowMat z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < d; ++j)
      z(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = (data.x(r, j) - m.input_mean[j]) / m.input_std[j];
  Eigen::VectorXd yv(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) yv[static_cast<Eigen::Index>(i)] = y[i];

  Net net = unpack(m);
  RowMat v1 = RowMat::Zero(net.w1.rows(), net.w1.cols());
  Eigen::VectorXd vb1 = Eigen::VectorXd::Zero(net.b1.size());
  Eigen::VectorXd v2 = Eigen::VectorXd::Zero(net.w2.size());
  double vb2 = 0.0;
  const double lr = params.learning_rate, mom = params.momentum;
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    const Grad g = loss_grad(net, z, yv);
    if (!std::isfinite(g.loss)) throw Error("mlp training diverged (NaN loss); try a lower learning rate");
    v1 = mom * v1 - lr * g.w1;
    vb1 = mom * vb1 - lr * g.b1;
    v2 = mom * v2 - lr * g.w2;
    vb2 = mom * vb2 - lr * g.b2;
    net.w1 += v1;
    net.b1 += vb1;
    net.w2 += v2;
    net.b2 += vb2;
  }
  pack(net, m);
  for (double w : mlp_parameters(m))
    if (!std::isfinite(w)) throw Error("mlp training diverged (non-finite weights); try a lower learning rate");
  return m;
}

}  // namespace moodpipe
