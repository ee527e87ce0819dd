#pragma once

// Stage and chain parameter types, posteriors and the D1/D2 distortion bound.

#include <cstddef>
#include <span>
#include <vector>

#include "svq/matrix.hpp"

namespace svq {

/// One folded-Markov-chain stage: sigmoidal encoder and M reconstruction
/// vectors. `n` is the number of code indices sampled per input.
struct StageParams {
  std::size_t M = 0;
  std::size_t n = 0;
  std::size_t input_dim = 0;
  Matrix weights;               // M x input_dim
  std::vector<double> biases;   // M
  Matrix recons;                // M x input_dim

  static StageParams zeros(std::size_t M, std::size_t n, std::size_t input_dim);

  /// Throws ConfigError on any shape or finiteness violation.
  void validate() const;

  bool operator==(const StageParams&) const = default;
};

/// Ordered stages; the input of stage l+1 is the posterior vector of stage l.
struct ChainParams {
  std::vector<StageParams> stages;
  std::vector<double> stage_weights;

  std::size_t size() const noexcept { return stages.size(); }
  std::size_t input_dim() const { return stages.front().input_dim; }

  /// Checks the linking rule and weight signs (ConfigError).
  void validate() const;

  bool operator==(const ChainParams&) const = default;
};

/// Finite distribution over input vectors: row i of `vectors` has
/// probability `probs[i]`.
struct WeightedDataset {
  Matrix vectors;
  std::vector<double> probs;

  std::size_t size() const noexcept { return probs.size(); }
  std::size_t dim() const noexcept { return vectors.cols(); }
  std::span<const double> item(std::size_t i) const { return vectors.row(i); }

  /// Rows paired with probabilities; probabilities must sum to 1.
  static WeightedDataset from_items(const std::vector<std::vector<double>>& rows,
                                    std::vector<double> probs);
  /// Equal weight on every row.
  static WeightedDataset uniform(Matrix vectors);

  /// ArgumentError if empty, shapes disagree, a probability is negative, or
  /// the total differs from 1 by more than 1e-12.
  void validate() const;

  std::vector<double> mean() const;
};

struct StageActivation {
  std::vector<double> posterior;     // Pr(y|x)
  std::vector<double> unnormalized;  // Q(y|x)
};

struct StageTerms {
  double d1 = 0.0;
  double d2 = 0.0;
  double sum() const noexcept { return d1 + d2; }
  bool operator==(const StageTerms&) const = default;
};

struct Objective {
  double total = 0.0;
  std::vector<StageTerms> per_stage;
};

/// Logistic function evaluated without overflow and clamped to
/// [eps, 1 - eps] so that Q(1-Q) and the normaliser never vanish.
double safe_sigmoid(double u) noexcept;

std::vector<double> unnormalized_response(const StageParams& stage, std::span<const double> x);
StageActivation posterior(const StageParams& stage, std::span<const double> x);

/// Per-sample d1 = (2/n) sum_y P(y) |x - x'(y)|^2 and
/// d2 = (2(n-1)/n) |x - sum_y P(y) x'(y)|^2 for a given posterior.
StageTerms bound_terms_for(const StageParams& stage, std::span<const double> x,
                           std::span<const double> post);
StageTerms stage_bound_terms(const StageParams& stage, std::span<const double> x);

std::vector<StageActivation> chain_forward(const ChainParams& chain, std::span<const double> x);

/// Exact expectation of the weighted bound over the dataset. Items are
/// processed in parallel; the reduction order is fixed, so the result does
/// not depend on the thread count.
Objective chain_objective(const ChainParams& chain, const WeightedDataset& data);

namespace detail {
void check_dim(const StageParams& stage, std::span<const double> x, const char* what);
void check_compatible(const ChainParams& chain, const WeightedDataset& data);
}  // namespace detail

}  // namespace svq
