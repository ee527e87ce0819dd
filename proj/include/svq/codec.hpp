#pragma once

// Stochastic encoder/decoder and a Monte-Carlo estimate of the constrained
// reconstruction distortion.

#include <cstddef>
#include <span>
#include <vector>

#include "svq/core.hpp"
#include "svq/rng.hpp"

namespace svq {

/// n sampled code indices, zero-based (0 .. M-1).
struct CodeVector {
  std::vector<std::size_t> indices;
  bool operator==(const CodeVector&) const = default;
};

/// n independent inverse-CDF draws from the posterior, in index order.
CodeVector sample_code(const StageActivation& act, std::size_t n, Rng& rng);

/// Mean of the reconstruction rows addressed by `code`.
std::vector<double> decode(const StageParams& stage, const CodeVector& code);

struct DistortionEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Draws K code vectors per item and averages 2 |x - decode(code)|^2 under
/// the dataset probabilities. Each item uses its own substream derived from
/// one draw of `rng`, so results do not depend on scheduling.
DistortionEstimate estimate_constrained_distortion(const StageParams& stage,
                                                   const WeightedDataset& data, std::size_t K,
                                                   Rng& rng);

}  // namespace svq
