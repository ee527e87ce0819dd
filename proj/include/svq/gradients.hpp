#pragma once

// Hand-coded derivatives of the weighted D1+D2 bound, with reverse
// accumulation across linked stages, and a central-difference oracle.

#include <cstddef>
#include <span>
#include <vector>

#include "svq/core.hpp"

namespace svq {

struct StageGradients {
  Matrix g_w;                // M x input_dim
  std::vector<double> g_b;   // M
  Matrix g_x;                // M x input_dim, w.r.t. reconstruction vectors

  static StageGradients zeros_like(const StageParams& stage);
  StageGradients& operator+=(const StageGradients& other);
};

struct GradientSet {
  std::vector<StageGradients> per_stage;

  static GradientSet zeros_like(const ChainParams& chain);
  GradientSet& operator+=(const GradientSet& other);
};

struct LocalGradients {
  StageGradients grads;
  std::vector<double> g_input;  // derivative w.r.t. the stage input vector
};

/// Gradients of `weight * (d1 + d2)` for one sample with respect to the
/// stage parameters and the stage input. `upstream` (empty or length M) is an
/// extra derivative of the downstream objective with respect to this stage's
/// posterior; it is how later stages feed back into earlier ones.
LocalGradients stage_backward(const StageParams& stage, std::span<const double> x,
                              const StageActivation& act, double weight,
                              std::span<const double> upstream = {});

LocalGradients stage_local_gradients(const StageParams& stage, std::span<const double> x,
                                     double weight);

struct GradientResult {
  Objective objective;
  GradientSet grads;
};

/// Total objective and its gradient for every stage, including the
/// contributions propagated back from later stages. OpenMP over items with a
/// deterministic blocked reduction.
GradientResult chain_gradients(const ChainParams& chain, const WeightedDataset& data);

enum class ParamFamily { weight, bias, recon };

struct ParamAddress {
  std::size_t stage = 0;
  ParamFamily family = ParamFamily::weight;
  std::size_t row = 0;
  std::size_t col = 0;  // ignored for biases
};

/// Reference to the scalar at `addr`; ArgumentError if it does not exist.
double& param_at(ChainParams& chain, const ParamAddress& addr);
double gradient_at(const GradientSet& grads, const ParamAddress& addr);
std::vector<ParamAddress> all_addresses(const ChainParams& chain);

/// (F(theta + h) - F(theta - h)) / 2h with F the chain objective total.
double finite_difference_gradient(const ChainParams& chain, const WeightedDataset& data,
                                  const ParamAddress& addr, double h);

}  // namespace svq
