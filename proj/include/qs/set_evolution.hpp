#pragma once

#include <random>

#include "qs/sparse_dae.hpp"

namespace qs {

// One SET topology update: per layer, remove the zeta-fraction weakest
// positive and negative weights, then regrow the same count uniformly over
// absent positions with fresh N(0, init_scale^2) weights, the same scale as
// the initialization. Biases are untouched and per-layer nnz is conserved
// exactly.
EvolutionEpochEntry evolve(SparseDae& model, double zeta, std::mt19937_64& rng,
                           std::size_t epoch = 0);

}  // namespace qs
