#include "svq/gradients.hpp"

#include <string>

#include "svq/errors.hpp"

namespace svq {

StageGradients StageGradients::zeros_like(const StageParams& stage) {
  return {Matrix(stage.M, stage.input_dim), std::vector<double>(stage.M, 0.0),
          Matrix(stage.M, stage.input_dim)};
}

StageGradients& StageGradients::operator+=(const StageGradients& other) {
  g_w += other.g_w;
  for (std::size_t y = 0; y < g_b.size(); ++y) g_b[y] += other.g_b[y];
  g_x += other.g_x;
  return *this;
}

GradientSet GradientSet::zeros_like(const ChainParams& chain) {
  GradientSet g;
  g.per_stage.reserve(chain.size());
  for (const auto& s : chain.stages) g.per_stage.push_back(StageGradients::zeros_like(s));
  return g;
}

GradientSet& GradientSet::operator+=(const GradientSet& other) {
  for (std::size_t l = 0; l < per_stage.size(); ++l) per_stage[l] += other.per_stage[l];
  return *this;
}

LocalGradients stage_backward(const StageParams& stage, std::span<const double> x,
                              const StageActivation& act, double weight,
                              std::span<const double> upstream) {
  detail::check_dim(stage, x, "stage_backward");
  if (!upstream.empty() && upstream.size() != stage.M)
    throw ArgumentError("stage_backward: upstream gradient must have length M");
  const std::size_t M = stage.M;
  const std::size_t D = stage.input_dim;
  const double n = static_cast<double>(stage.n);
  const double alpha = 2.0 / n;
  const double beta = 2.0 * (n - 1.0) / n;
  const auto& P = act.posterior;
  const auto& Q = act.unnormalized;

  // R = x - sum_y P(y) x'(y)
  std::vector<double> R(x.begin(), x.end());
  for (std::size_t y = 0; y < M; ++y) {
    const auto r = stage.recons.row(y);
    for (std::size_t j = 0; j < D; ++j) R[j] -= P[y] * r[j];
  }

  LocalGradients out{StageGradients::zeros_like(stage), std::vector<double>(D, 0.0)};

  // Derivative of the objective with respect to each posterior entry.
  std::vector<double> dP(M);
  for (std::size_t y = 0; y < M; ++y) {
    const auto r = stage.recons.row(y);
    dP[y] = weight * (alpha * squared_distance(x, r) - 2.0 * beta * dot(r, R));
    if (!upstream.empty()) dP[y] += upstream[y];
    auto gx = out.grads.g_x.row(y);
    for (std::size_t j = 0; j < D; ++j)
      gx[j] = -weight * P[y] * (2.0 * alpha * (x[j] - r[j]) + 2.0 * beta * R[j]);
  }

  double norm = 0.0;
  double mean_dP = 0.0;
  for (std::size_t y = 0; y < M; ++y) {
    norm += Q[y];
    mean_dP += P[y] * dP[y];
  }

  // Explicit input dependence of d1 + d2 collapses to 4 R.
  for (std::size_t j = 0; j < D; ++j) out.g_input[j] = 4.0 * weight * R[j];

  for (std::size_t y = 0; y < M; ++y) {
    const double gu = Q[y] * (1.0 - Q[y]) * (dP[y] - mean_dP) / norm;
    out.grads.g_b[y] = gu;
    auto gw = out.grads.g_w.row(y);
    const auto w = stage.weights.row(y);
    for (std::size_t j = 0; j < D; ++j) {
      gw[j] = gu * x[j];
      out.g_input[j] += gu * w[j];
    }
  }
  return out;
}

LocalGradients stage_local_gradients(const StageParams& stage, std::span<const double> x,
                                     double weight) {
  return stage_backward(stage, x, posterior(stage, x), weight);
}

double& param_at(ChainParams& chain, const ParamAddress& addr) {
  if (addr.stage >= chain.size()) throw ArgumentError("parameter address: no such stage");
  auto& s = chain.stages[addr.stage];
  if (addr.row >= s.M) throw ArgumentError("parameter address: row out of range");
  switch (addr.family) {
    case ParamFamily::weight:
      if (addr.col >= s.input_dim) throw ArgumentError("parameter address: column out of range");
      return s.weights(addr.row, addr.col);
    case ParamFamily::recon:
      if (addr.col >= s.input_dim) throw ArgumentError("parameter address: column out of range");
      return s.recons(addr.row, addr.col);
    case ParamFamily::bias:
      return s.biases[addr.row];
  }
  throw ArgumentError("parameter address: unknown family");
}

double gradient_at(const GradientSet& grads, const ParamAddress& addr) {
  if (addr.stage >= grads.per_stage.size()) throw ArgumentError("gradient address: no such stage");
  const auto& g = grads.per_stage[addr.stage];
  if (addr.row >= g.g_b.size()) throw ArgumentError("gradient address: row out of range");
  switch (addr.family) {
    case ParamFamily::weight:
      if (addr.col >= g.g_w.cols()) throw ArgumentError("gradient address: column out of range");
      return g.g_w(addr.row, addr.col);
    case ParamFamily::recon:
      if (addr.col >= g.g_x.cols()) throw ArgumentError("gradient address: column out of range");
      return g.g_x(addr.row, addr.col);
    case ParamFamily::bias:
      return g.g_b[addr.row];
  }
  throw ArgumentError("gradient address: unknown family");
}

std::vector<ParamAddress> all_addresses(const ChainParams& chain) {
  std::vector<ParamAddress> out;
  for (std::size_t l = 0; l < chain.size(); ++l) {
    const auto& s = chain.stages[l];
    for (std::size_t y = 0; y < s.M; ++y)
      for (std::size_t j = 0; j < s.input_dim; ++j)
        out.push_back({l, ParamFamily::weight, y, j});
    for (std::size_t y = 0; y < s.M; ++y) out.push_back({l, ParamFamily::bias, y, 0});
    for (std::size_t y = 0; y < s.M; ++y)
      for (std::size_t j = 0; j < s.input_dim; ++j)
        out.push_back({l, ParamFamily::recon, y, j});
  }
  return out;
}

double finite_difference_gradient(const ChainParams& chain, const WeightedDataset& data,
                                  const ParamAddress& addr, double h) {
  if (!(h > 0.0)) throw ArgumentError("finite difference step must be positive");
  ChainParams probe = chain;
  double& theta = param_at(probe, addr);
  const double base = theta;
  theta = base + h;
  const double up = chain_objective(probe, data).total;
  theta = base - h;
  const double down = chain_objective(probe, data).total;
  return (up - down) / (2.0 * h);
}

}  // namespace svq
