#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <tuple>

#include "moodpipe/preprocess.hpp"

namespace moodpipe {

double cfs_merit(std::size_t k, double r_cf, double r_ff, MeritForm form) {
  if (k == 0) throw InputError("cfs_merit needs k >= 1");
  const double kk = static_cast<double>(k);
  const double radicand =
      form == MeritForm::kPrinted ? kk + (kk - 1.0) * r_ff : kk + kk * (kk - 1.0) * r_ff;
  if (!(radicand > 0.0)) throw InputError("cfs_merit: non-positive radicand; correlations are inconsistent");
  return kk * r_cf / std::sqrt(radicand);
}

namespace {

std::vector<int> as_ints(std::span<const double> v) {
  std::vector<int> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<int>(std::lround(v[i]));
  return out;
}

}  // namespace

CorrelationTable cfs_correlations(const Dataset& data, std::span<const int> labels) {
  if (labels.size() != data.rows()) throw InputError("label column length does not match matrix rows");
  const std::size_t d = data.cols();
  std::vector<std::vector<double>> cols(d);
  std::vector<std::vector<int>> icols(d);
  for (std::size_t c = 0; c < d; ++c) {
    cols[c] = data.x.column(c);
    if (data.is_discrete(c)) icols[c] = as_ints(cols[c]);
  }
  std::vector<double> y(labels.begin(), labels.end());

  CorrelationTable t;
  t.r_cf.resize(d);
  t.r_ff.assign(d, std::vector<double>(d, 1.0));
  for (std::size_t c = 0; c < d; ++c) {
    t.r_cf[c] = data.is_discrete(c) ? symmetric_uncertainty(icols[c], labels) : abs_pearson(cols[c], y);
  }
  // Upper-triangle pairs, flattened so the parallel loop is balanced.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(d * (d - (d > 0 ? 1 : 0)) / 2);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) pairs.emplace_back(i, j);
  const auto np = static_cast<std::ptrdiff_t>(pairs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < np; ++p) {
    const auto [i, j] = pairs[static_cast<std::size_t>(p)];
    const double r = data.is_discrete(i) && data.is_discrete(j) ? symmetric_uncertainty(icols[i], icols[j])
                                                                : abs_pearson(cols[i], cols[j]);
    t.r_ff[i][j] = r;
    t.r_ff[j][i] = r;
  }
  return t;
}

double subset_merit(const CorrelationTable& t, std::span<const std::size_t> subset, MeritForm form) {
  const std::size_t k = subset.size();
  if (k == 0) return 0.0;
  double cf = 0.0;
  for (auto i : subset) cf += t.r_cf[i];
  double ff = 0.0;
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b) ff += t.r_ff[subset[a]][subset[b]];
  const double pairs = static_cast<double>(k * (k - 1) / 2);
  return cfs_merit(k, cf / static_cast<double>(k), k > 1 ? ff / pairs : 0.0, form);
}

namespace {

struct Node {
  double merit;
  std::size_t seq;
  std::vector<std::size_t> members;  // ascending
  double sum_cf;
  double sum_ff;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.merit != b.merit) return a.merit > b.merit;
    return a.seq < b.seq;
  }
};

double merit_from_sums(std::size_t k, double sum_cf, double sum_ff, MeritForm form) {
  const double pairs = static_cast<double>(k * (k - 1) / 2);
  return cfs_merit(k, sum_cf / static_cast<double>(k), k > 1 ? sum_ff / pairs : 0.0, form);
}

}  // namespace

std::vector<std::size_t> cfs_search(const CorrelationTable& t, const CfsOptions& options) {
  const std::size_t d = t.r_cf.size();
  if (d == 0) return {};

  std::set<Node, NodeOrder> open;
  std::set<std::vector<std::size_t>> visited;
  std::size_t seq = 0;
  open.insert(Node{0.0, seq++, {}, 0.0, 0.0});
  visited.insert({});

  std::vector<std::size_t> best;
  double best_merit = 0.0;
  std::size_t stale = 0;

  while (!open.empty() && stale < options.patience) {
    const Node node = *open.begin();
    open.erase(open.begin());

    bool improved = false;
    for (std::size_t j = 0; j < d; ++j) {
      if (std::binary_search(node.members.begin(), node.members.end(), j)) continue;
      std::vector<std::size_t> child = node.members;
      child.insert(std::upper_bound(child.begin(), child.end(), j), j);
      if (!visited.insert(child).second) continue;
      double ff = node.sum_ff;
      for (auto i : node.members) ff += t.r_ff[i][j];
      const double cf = node.sum_cf + t.r_cf[j];
      const double merit = merit_from_sums(child.size(), cf, ff, options.form);
      if (merit > best_merit + 1e-12) {
        best_merit = merit;
        best = child;
        improved = true;
      }
      open.insert(Node{merit, seq++, std::move(child), cf, ff});
    }
    stale = improved ? 0 : stale + 1;
  }

  if (best.empty()) {
    // Every merit was zero: fall back to the single most class-correlated column.
    best.push_back(static_cast<std::size_t>(std::max_element(t.r_cf.begin(), t.r_cf.end()) - t.r_cf.begin()));
  }
  return best;
}

std::vector<std::string> cfs_select(const Dataset& data, std::span<const int> labels, const CfsOptions& options) {
  const auto idx = cfs_search(cfs_correlations(data, labels), options);
  std::vector<std::string> out;
  for (auto i : idx) out.push_back(data.columns[i]);
  return out;
}

}  // namespace moodpipe
