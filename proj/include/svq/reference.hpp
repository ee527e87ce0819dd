#pragma once

// Serial, allocation-heavy versions of the dataset kernels. They share no
// code with the parallel kernels beyond the per-stage primitives and are kept
// to cross-check them and as the benchmark baseline.

#include "svq/gradients.hpp"

namespace svq::reference {

Objective chain_objective(const ChainParams& chain, const WeightedDataset& data);
GradientResult chain_gradients(const ChainParams& chain, const WeightedDataset& data);

}  // namespace svq::reference
