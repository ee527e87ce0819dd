#include "svq/reference.hpp"

namespace svq::reference {

Objective chain_objective(const ChainParams& chain, const WeightedDataset& data) {
  detail::check_compatible(chain, data);
  Objective obj;
  obj.per_stage.assign(chain.size(), {});
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto acts = chain_forward(chain, data.item(i));
    std::span<const double> input = data.item(i);
    for (std::size_t l = 0; l < chain.size(); ++l) {
      const auto t = bound_terms_for(chain.stages[l], input, acts[l].posterior);
      obj.per_stage[l].d1 += data.probs[i] * t.d1;
      obj.per_stage[l].d2 += data.probs[i] * t.d2;
      input = acts[l].posterior;
    }
  }
  for (std::size_t l = 0; l < chain.size(); ++l)
    obj.total += chain.stage_weights[l] * obj.per_stage[l].sum();
  return obj;
}

GradientResult chain_gradients(const ChainParams& chain, const WeightedDataset& data) {
  GradientResult res{reference::chain_objective(chain, data), GradientSet::zeros_like(chain)};
  const std::size_t L = chain.size();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto acts = chain_forward(chain, data.item(i));
    std::vector<double> upstream;
    for (std::size_t l = L; l-- > 0;) {
      const std::span<const double> input =
          l == 0 ? data.item(i) : std::span<const double>(acts[l - 1].posterior);
      auto local = stage_backward(chain.stages[l], input, acts[l],
                                  data.probs[i] * chain.stage_weights[l], upstream);
      res.grads.per_stage[l] += local.grads;
      upstream = std::move(local.g_input);
    }
  }
  return res;
}

}  // namespace svq::reference
