#include "svq/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "svq/errors.hpp"

namespace svq {

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError(std::string(what) + " contains a non-finite value");
  }
}

}  // namespace

StageParams StageParams::zeros(std::size_t M, std::size_t n, std::size_t input_dim) {
  StageParams s;
  s.M = M;
  s.n = n;
  s.input_dim = input_dim;
  s.weights = Matrix(M, input_dim);
  s.biases.assign(M, 0.0);
  s.recons = Matrix(M, input_dim);
  return s;
}

void StageParams::validate() const {
  if (M < 1 || n < 1 || input_dim < 1) throw ConfigError("stage needs M, n, input_dim >= 1");
  if (weights.rows() != M || weights.cols() != input_dim)
    throw ConfigError("stage weights must be M x input_dim");
  if (biases.size() != M) throw ConfigError("stage biases must have length M");
  if (recons.rows() != M || recons.cols() != input_dim)
    throw ConfigError("stage recons must be M x input_dim");
  require_finite(weights.flat(), "weights");
  require_finite(biases, "biases");
  require_finite(recons.flat(), "recons");
}

void ChainParams::validate() const {
  if (stages.empty()) throw ConfigError("chain has no stages");
  if (stage_weights.size() != stages.size())
    throw ConfigError("chain needs one stage weight per stage");
  for (std::size_t l = 0; l < stages.size(); ++l) {
    stages[l].validate();
    if (!(stage_weights[l] >= 0.0) || !std::isfinite(stage_weights[l]))
      throw ConfigError("stage weights must be finite and non-negative");
    if (l + 1 < stages.size() && stages[l + 1].input_dim != stages[l].M)
      throw ConfigError("stage " + std::to_string(l + 2) + " input_dim must equal stage " +
                        std::to_string(l + 1) + " M");
  }
}

WeightedDataset WeightedDataset::from_items(const std::vector<std::vector<double>>& rows,
                                            std::vector<double> probs) {
  if (rows.empty()) throw ArgumentError("dataset is empty");
  if (rows.size() != probs.size()) throw ArgumentError("one probability per row required");
  WeightedDataset d;
  d.vectors = Matrix(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d.vectors.cols()) throw ArgumentError("dataset rows differ in length");
    std::copy(rows[i].begin(), rows[i].end(), d.vectors.row(i).begin());
  }
  d.probs = std::move(probs);
  d.validate();
  return d;
}

WeightedDataset WeightedDataset::uniform(Matrix vectors) {
  WeightedDataset d;
  const std::size_t count = vectors.rows();
  d.vectors = std::move(vectors);
  d.probs.assign(count, count ? 1.0 / static_cast<double>(count) : 0.0);
  d.validate();
  return d;
}

void WeightedDataset::validate() const {
  if (probs.empty()) throw ArgumentError("dataset is empty");
  if (vectors.rows() != probs.size()) throw ArgumentError("one probability per row required");
  if (vectors.cols() == 0) throw ArgumentError("dataset vectors are empty");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw ArgumentError("dataset probabilities must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ArgumentError("dataset probabilities must sum to 1");
}

std::vector<double> WeightedDataset::mean() const {
  std::vector<double> m(dim(), 0.0);
  for (std::size_t i = 0; i < size(); ++i) {
    const auto x = item(i);
    for (std::size_t j = 0; j < m.size(); ++j) m[j] += probs[i] * x[j];
  }
  return m;
}

double safe_sigmoid(double u) noexcept {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double q;
  if (u >= 0.0) {
    q = 1.0 / (1.0 + std::exp(-u));
  } else {
    const double e = std::exp(u);
    q = e / (1.0 + e);
  }
  return std::clamp(q, eps, 1.0 - eps);
}

namespace detail {

void check_dim(const StageParams& stage, std::span<const double> x, const char* what) {
  if (x.size() != stage.input_dim)
    throw ArgumentError(std::string(what) + ": input has length " + std::to_string(x.size()) +
                        ", stage expects " + std::to_string(stage.input_dim));
}

void check_compatible(const ChainParams& chain, const WeightedDataset& data) {
  chain.validate();
  data.validate();
  if (data.dim() != chain.input_dim())
    throw ArgumentError("dataset dimension " + std::to_string(data.dim()) +
                        " does not match stage 1 input_dim " + std::to_string(chain.input_dim()));
}

}  // namespace detail

std::vector<double> unnormalized_response(const StageParams& stage, std::span<const double> x) {
  detail::check_dim(stage, x, "unnormalized_response");
  std::vector<double> q(stage.M);
  for (std::size_t y = 0; y < stage.M; ++y)
    q[y] = safe_sigmoid(dot(stage.weights.row(y), x) + stage.biases[y]);
  return q;
}

StageActivation posterior(const StageParams& stage, std::span<const double> x) {
  StageActivation act;
  act.unnormalized = unnormalized_response(stage, x);
  const double norm = std::accumulate(act.unnormalized.begin(), act.unnormalized.end(), 0.0);
  act.posterior.resize(stage.M);
  for (std::size_t y = 0; y < stage.M; ++y) act.posterior[y] = act.unnormalized[y] / norm;
  return act;
}

StageTerms bound_terms_for(const StageParams& stage, std::span<const double> x,
                           std::span<const double> post) {
  detail::check_dim(stage, x, "stage_bound_terms");
  const double n = static_cast<double>(stage.n);
  std::vector<double> residual(x.begin(), x.end());
  double spread = 0.0;
  for (std::size_t y = 0; y < stage.M; ++y) {
    const auto r = stage.recons.row(y);
    spread += post[y] * squared_distance(x, r);
    for (std::size_t j = 0; j < residual.size(); ++j) residual[j] -= post[y] * r[j];
  }
  StageTerms t;
  t.d1 = (2.0 / n) * spread;
  t.d2 = (2.0 * (n - 1.0) / n) * dot(residual, residual);
  return t;
}

StageTerms stage_bound_terms(const StageParams& stage, std::span<const double> x) {
  return bound_terms_for(stage, x, posterior(stage, x).posterior);
}

std::vector<StageActivation> chain_forward(const ChainParams& chain, std::span<const double> x) {
  chain.validate();
  if (x.size() != chain.input_dim())
    throw ArgumentError("chain_forward: input length does not match stage 1");
  std::vector<StageActivation> acts;
  acts.reserve(chain.size());
  acts.push_back(posterior(chain.stages[0], x));
  for (std::size_t l = 1; l < chain.size(); ++l)
    acts.push_back(posterior(chain.stages[l], acts.back().posterior));
  return acts;
}

}  // namespace svq
