#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>

#include "pgn/nn.hpp"

namespace pgn::nn {

struct SpectralEstimate {
  double sigma = 0.0;
  Tensor u;  // unit left singular vector estimate
};

/// Power-iteration estimate of the largest singular value of a 2-D `w`,
/// starting from the unit vector `u` (length rows). A zero matrix yields
/// sigma 0 and returns `u` unchanged.
SpectralEstimate spectral_norm(const Tensor& w, const Tensor& u, int iterations);

/// Right singular vector estimate normalize(W^T u); zero when W^T u vanishes.
Tensor right_vector(const Tensor& w, const Tensor& u);

/// Weight tensor viewed as (rows, everything-else).
Tensor as_matrix(const Tensor& w);

/// Indices of layers that own a weight (affine and conv).
std::vector<std::size_t> weighted_layers(const NetworkSpec& spec);

/// Adds a random unit power-iteration vector for every weighted layer that lacks one.
void ensure_power_vectors(ParameterStore& params, const NetworkSpec& spec, std::uint64_t seed);

/// Runs `iterations` power-iteration steps on every weighted layer, updating the stored vectors.
void advance_power_iteration(ParameterStore& params, const NetworkSpec& spec, int iterations = 1);

/// One power-iteration step per weighted layer, then every weight divided by its sigma estimate.
/// The returned store carries the normalized weights and the advanced vectors.
ParameterStore apply_spectral_normalization(const ParameterStore& params, const NetworkSpec& spec);

/// Product over layers of sigma(W_k), each from power iteration run for at least
/// `iterations` steps and then until the estimate stops changing. Activation constants (all <= 1
/// here) count as 1; a convolution additionally counts ceil(kernel/stride) for
/// overlapping patches. `depth` restricts the product to the first `depth` layers.
double lipschitz_upper_bound(const NetworkSpec& spec, const ParameterStore& params, int iterations = 100,
                             std::optional<std::size_t> depth = std::nullopt);

/// max |f(x) - f(y)| / |x - y| over the pairs; coincident pairs are skipped.
double empirical_lipschitz(const std::function<double(const Tensor&)>& f,
                           std::span<const std::pair<Tensor, Tensor>> pairs);

}  // namespace pgn::nn
