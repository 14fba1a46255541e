#pragma once
// Executable checks of the normalizer's bounds and of the machinery it relies on,
// run on randomly initialized networks.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pgn/autodiff.hpp"

namespace pgn::verify {

struct CheckResult {
  std::string name;
  std::size_t samples = 0;
  double worst = 0.0;      // largest observed violation measure
  double tolerance = 0.0;  // pass iff worst <= tolerance
  bool passed = true;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool passed() const;
  const CheckResult& get(const std::string& name) const;
  /// One line per check plus an overall line.
  std::string format() const;
};

/// Maps the raw output f and its per-sample input-gradient norm to the normalized output.
using NormalizeFn = std::function<ad::Var(const ad::Var& f, const ad::Var& grad_norm)>;

struct VerifyOptions {
  std::uint64_t seed = 0;
  std::size_t samples = 1000;  // input points per network for the bound checks
  std::size_t networks = 10;
  std::size_t min_depth = 2;   // affine layers per discriminator
  std::size_t max_depth = 4;
  std::size_t width = 64;
  std::size_t input_dim = 8;
  double leaky_slope = 0.1;
  /// Normalizer under test; the library's penalty gradient normalization when empty.
  NormalizeFn normalize;
};

/// |grad_x D^| and |D^| bounded by 1 on random leaky-ReLU MLPs.
CheckResult check_gradient_bound(const VerifyOptions& options);
CheckResult check_value_bound(const VerifyOptions& options);
/// Autodiff |grad_x D^| against central differences on a subset of points.
CheckResult check_bound_finite_difference(const VerifyOptions& options);
/// |grad_x D^| = (g / (g + |1 - f|))^2 with g = |grad_x f|.
CheckResult check_gradient_identity(const VerifyOptions& options);
/// Closed-form weight gradient of D^ for a one-hidden-layer network against autodiff.
CheckResult check_weight_gradient(const VerifyOptions& options);
/// Autodiff against central differences on random compositions of the op set.
CheckResult check_autodiff_oracle(const VerifyOptions& options);
/// Hessian-vector products by double backward against differences of gradients.
CheckResult check_double_backward(const VerifyOptions& options);
/// Hessian of a piecewise-linear network is zero.
CheckResult check_piecewise_linear_hessian(const VerifyOptions& options);
/// Power iteration against a dense SVD, and sigma(W / sigma) = 1.
CheckResult check_spectral_norm(const VerifyOptions& options);
/// Empirical Lipschitz constant and sampled gradient norms of spectrally normalized
/// networks stay under the layer-wise bound, and the bound does not grow with depth.
CheckResult check_lipschitz(const VerifyOptions& options);

VerifyReport run_all(const VerifyOptions& options);

}  // namespace pgn::verify
