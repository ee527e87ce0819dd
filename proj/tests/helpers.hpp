#pragma once

// Random instances and brute-force oracles shared by the unit tests. Nothing
// here calls into the kernels under test.

#include <cmath>
#include <cstdint>
#include <vector>

#include "svq/core.hpp"
#include "svq/rng.hpp"

namespace svq::test {

inline StageParams random_stage(Rng& rng, std::size_t M, std::size_t n, std::size_t dim,
                                double weight_scale = 1.0) {
  auto s = StageParams::zeros(M, n, dim);
  for (double& v : s.weights.flat()) v = rng.uniform(-weight_scale, weight_scale);
  for (double& v : s.biases) v = rng.uniform(-1.0, 1.0);
  for (double& v : s.recons.flat()) v = rng.uniform(0.0, 1.0);
  return s;
}

inline WeightedDataset random_dataset(Rng& rng, std::size_t items, std::size_t dim) {
  Matrix v(items, dim);
  for (double& x : v.flat()) x = rng.uniform(0.0, 2.0);
  std::vector<double> p(items);
  double total = 0.0;
  for (double& q : p) total += (q = rng.uniform(0.1, 1.0));
  for (double& q : p) q /= total;
  return WeightedDataset{std::move(v), std::move(p)};
}

/// Chain with dims[0] inputs and M_l = dims[l+1].
inline ChainParams random_chain(Rng& rng, const std::vector<std::size_t>& dims,
                                const std::vector<std::size_t>& ns) {
  ChainParams c;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    c.stages.push_back(random_stage(rng, dims[l + 1], ns[l], dims[l]));
    c.stage_weights.push_back(rng.uniform(0.5, 2.0));
  }
  return c;
}

inline std::vector<double> random_vector(Rng& rng, std::size_t dim, double lo = 0.0, double hi = 2.0) {
  std::vector<double> x(dim);
  for (double& v : x) v = rng.uniform(lo, hi);
  return x;
}

inline double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

/// Posterior straight from the definitions.
inline std::vector<double> naive_posterior(const StageParams& s, const std::vector<double>& x) {
  std::vector<double> q(s.M);
  double total = 0.0;
  for (std::size_t y = 0; y < s.M; ++y) {
    double u = s.biases[y];
    for (std::size_t j = 0; j < s.input_dim; ++j) u += s.weights(y, j) * x[j];
    total += (q[y] = logistic(u));
  }
  for (double& v : q) v /= total;
  return q;
}

/// Exact constrained distortion 2 sum_{y_1..y_n} prod P(y_i) |x - mean x'(y_i)|^2
/// by enumerating all M^n code vectors.
inline double enumerated_distortion(const StageParams& s, const std::vector<double>& x) {
  const auto P = naive_posterior(s, x);
  std::vector<std::size_t> code(s.n, 0);
  double total = 0.0;
  while (true) {
    double prob = 1.0;
    std::vector<double> rec(s.input_dim, 0.0);
    for (std::size_t k = 0; k < s.n; ++k) {
      prob *= P[code[k]];
      for (std::size_t j = 0; j < s.input_dim; ++j) rec[j] += s.recons(code[k], j) / static_cast<double>(s.n);
    }
    double e = 0.0;
    for (std::size_t j = 0; j < s.input_dim; ++j) e += (x[j] - rec[j]) * (x[j] - rec[j]);
    total += 2.0 * prob * e;
    std::size_t k = 0;
    while (k < s.n && ++code[k] == s.M) code[k++] = 0;
    if (k == s.n) break;
  }
  return total;
}

}  // namespace svq::test
