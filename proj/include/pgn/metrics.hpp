#pragma once

#include <cstddef>

#include "pgn/normalizers.hpp"
#include "pgn/tensor.hpp"

namespace pgn::metrics {

struct Gaussian {
  Tensor mean;  // (d)
  Tensor cov;   // (d, d)
};

/// Mean and unbiased (n-1) covariance of samples flattened to (n, d).
Gaussian fit_gaussian(const Tensor& samples);

/// |mu1 - mu2|^2 + tr(C1 + C2 - 2 (C1 C2)^(1/2)).
///
/// The trace of the square root is taken from the eigenvalues of the symmetric
/// product C1^(1/2) C2 C1^(1/2) (and its mirror, averaged so the result is
/// symmetric in its arguments); eigenvalues down to -1e-10 are clamped to 0.
/// Throws std::invalid_argument when a covariance is asymmetric beyond 1e-8
/// or has an eigenvalue below -1e-10.
double frechet_gaussian(const Tensor& mu1, const Tensor& cov1, const Tensor& mu2, const Tensor& cov2);
double frechet_gaussian(const Gaussian& a, const Gaussian& b);

/// Number of centers with at least `min_count` samples within 3*std.
std::size_t mode_coverage(const Tensor& samples, const Tensor& centers, double std, std::size_t min_count);

/// Fraction of samples within 3*std of some center; 0 when there are no centers.
double high_quality_ratio(const Tensor& samples, const Tensor& centers, double std);

struct GradNormStats {
  double mean = 0.0;
  double max = 0.0;
};

/// Per-sample |grad_x D^(x)| over `batch`, where D^ is `d` under `kind`. `d` must
/// record onto `tape`.
GradNormStats grad_norm_stats(ad::Tape& tape, const norm::Discriminator& d, const norm::NormalizerKind& kind,
                              const Tensor& batch);

struct MetricsReport {
  double frechet = 0.0;
  std::size_t mode_coverage = 0;
  std::size_t num_modes = 0;
  double high_quality_ratio = 0.0;
  GradNormStats grad_norm;
};

}  // namespace pgn::metrics
