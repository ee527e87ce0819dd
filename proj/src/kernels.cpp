// OpenMP dataset kernels. Items are grouped into fixed-size blocks; each block
// is reduced serially and the block partials are summed in block order, so
// results are bit-identical for any thread count.

#include <omp.h>

#include <algorithm>
#include <vector>

#include "svq/core.hpp"
#include "svq/gradients.hpp"

namespace svq {

namespace {

constexpr std::size_t kBlock = 16;

std::size_t block_count(std::size_t items) { return (items + kBlock - 1) / kBlock; }

// Forward/backward pass for one item with preallocated buffers.
class ItemKernel {
 public:
  explicit ItemKernel(const ChainParams& chain) : chain_(chain) {
    const std::size_t L = chain.size();
    q_.resize(L);
    p_.resize(L);
    dist_.resize(L);
    resid_.resize(L);
    dP_.resize(L);
    g_in_.resize(L);
    terms_.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
      const auto& s = chain.stages[l];
      q_[l].resize(s.M);
      p_[l].resize(s.M);
      dist_[l].resize(s.M);
      dP_[l].resize(s.M);
      resid_[l].resize(s.input_dim);
      g_in_[l].resize(s.input_dim);
    }
  }

  void forward(std::span<const double> x) {
    x0_ = x;
    for (std::size_t l = 0; l < chain_.size(); ++l) {
      const auto& s = chain_.stages[l];
      const auto in = input(l);
      auto& q = q_[l];
      auto& p = p_[l];
      double norm = 0.0;
      for (std::size_t y = 0; y < s.M; ++y) {
        q[y] = safe_sigmoid(dot(s.weights.row(y), in) + s.biases[y]);
        norm += q[y];
      }
      auto& R = resid_[l];
      std::copy(in.begin(), in.end(), R.begin());
      double spread = 0.0;
      for (std::size_t y = 0; y < s.M; ++y) {
        p[y] = q[y] / norm;
        const auto r = s.recons.row(y);
        dist_[l][y] = squared_distance(in, r);
        spread += p[y] * dist_[l][y];
        for (std::size_t j = 0; j < s.input_dim; ++j) R[j] -= p[y] * r[j];
      }
      const double n = static_cast<double>(s.n);
      terms_[l].d1 = (2.0 / n) * spread;
      terms_[l].d2 = (2.0 * (n - 1.0) / n) * dot(R, R);
    }
  }

  const std::vector<StageTerms>& terms() const { return terms_; }

  void backward(double prob, GradientSet& acc) {
    for (std::size_t l = chain_.size(); l-- > 0;) {
      const auto& s = chain_.stages[l];
      const auto in = input(l);
      const auto& q = q_[l];
      const auto& p = p_[l];
      const auto& R = resid_[l];
      auto& dP = dP_[l];
      auto& g = acc.per_stage[l];
      const double c = prob * chain_.stage_weights[l];
      const double n = static_cast<double>(s.n);
      const double alpha2 = 4.0 / n;
      const double beta2 = 4.0 * (n - 1.0) / n;
      const bool has_upstream = l + 1 < chain_.size();

      double norm = 0.0;
      double mean_dP = 0.0;
      for (std::size_t y = 0; y < s.M; ++y) {
        const auto r = s.recons.row(y);
        dP[y] = c * (0.5 * alpha2 * dist_[l][y] - beta2 * dot(r, R));
        if (has_upstream) dP[y] += g_in_[l + 1][y];
        auto gx = g.g_x.row(y);
        const double cp = c * p[y];
        for (std::size_t j = 0; j < s.input_dim; ++j)
          gx[j] -= cp * (alpha2 * (in[j] - r[j]) + beta2 * R[j]);
        norm += q[y];
        mean_dP += p[y] * dP[y];
      }

      const bool need_input = l > 0;
      auto& gi = g_in_[l];
      if (need_input)
        for (std::size_t j = 0; j < s.input_dim; ++j) gi[j] = 4.0 * c * R[j];

      for (std::size_t y = 0; y < s.M; ++y) {
        const double gu = q[y] * (1.0 - q[y]) * (dP[y] - mean_dP) / norm;
        g.g_b[y] += gu;
        auto gw = g.g_w.row(y);
        const auto w = s.weights.row(y);
        for (std::size_t j = 0; j < s.input_dim; ++j) gw[j] += gu * in[j];
        if (need_input)
          for (std::size_t j = 0; j < s.input_dim; ++j) gi[j] += gu * w[j];
      }
    }
  }

 private:
  std::span<const double> input(std::size_t l) const {
    return l == 0 ? x0_ : std::span<const double>(p_[l - 1]);
  }

  const ChainParams& chain_;
  std::span<const double> x0_;
  std::vector<std::vector<double>> q_, p_, dist_, resid_, dP_, g_in_;
  std::vector<StageTerms> terms_;
};

void add_weighted(std::vector<StageTerms>& acc, const std::vector<StageTerms>& t, double prob) {
  for (std::size_t l = 0; l < acc.size(); ++l) {
    acc[l].d1 += prob * t[l].d1;
    acc[l].d2 += prob * t[l].d2;
  }
}

Objective finish(const ChainParams& chain, const std::vector<std::vector<StageTerms>>& blocks) {
  Objective obj;
  obj.per_stage.assign(chain.size(), {});
  for (const auto& b : blocks) {
    for (std::size_t l = 0; l < chain.size(); ++l) {
      obj.per_stage[l].d1 += b[l].d1;
      obj.per_stage[l].d2 += b[l].d2;
    }
  }
  for (std::size_t l = 0; l < chain.size(); ++l)
    obj.total += chain.stage_weights[l] * obj.per_stage[l].sum();
  return obj;
}

}  // namespace

Objective chain_objective(const ChainParams& chain, const WeightedDataset& data) {
  detail::check_compatible(chain, data);
  const std::size_t items = data.size();
  const auto blocks = static_cast<std::ptrdiff_t>(block_count(items));
  std::vector<std::vector<StageTerms>> partial(blocks, std::vector<StageTerms>(chain.size()));

#pragma omp parallel
  {
    ItemKernel kernel(chain);
#pragma omp for schedule(static)
    for (std::ptrdiff_t b = 0; b < blocks; ++b) {
      const std::size_t end = std::min(items, static_cast<std::size_t>(b + 1) * kBlock);
      for (std::size_t i = static_cast<std::size_t>(b) * kBlock; i < end; ++i) {
        kernel.forward(data.item(i));
        add_weighted(partial[b], kernel.terms(), data.probs[i]);
      }
    }
  }
  return finish(chain, partial);
}

GradientResult chain_gradients(const ChainParams& chain, const WeightedDataset& data) {
  detail::check_compatible(chain, data);
  const std::size_t items = data.size();
  const auto blocks = static_cast<std::ptrdiff_t>(block_count(items));
  std::vector<std::vector<StageTerms>> partial(blocks, std::vector<StageTerms>(chain.size()));
  std::vector<GradientSet> grads(blocks, GradientSet::zeros_like(chain));

#pragma omp parallel
  {
    ItemKernel kernel(chain);
#pragma omp for schedule(static)
    for (std::ptrdiff_t b = 0; b < blocks; ++b) {
      const std::size_t end = std::min(items, static_cast<std::size_t>(b + 1) * kBlock);
      for (std::size_t i = static_cast<std::size_t>(b) * kBlock; i < end; ++i) {
        kernel.forward(data.item(i));
        add_weighted(partial[b], kernel.terms(), data.probs[i]);
        kernel.backward(data.probs[i], grads[b]);
      }
    }
  }

  GradientResult res{finish(chain, partial), std::move(grads.front())};
  for (std::ptrdiff_t b = 1; b < blocks; ++b) res.grads += grads[b];
  return res;
}

}  // namespace svq
