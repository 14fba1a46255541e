#include "pgn/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pgn::metrics {

namespace {

using Mat = Eigen::MatrixXd;

Mat to_matrix(const Tensor& t, std::size_t d) {
  if (t.numel() != d * d) throw ShapeError::mismatch("frechet_gaussian", t.shape(), Shape{d, d});
  Mat m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = t[i * d + j];
  return m;
}

void require_symmetric(const Mat& m) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8)
    throw std::invalid_argument("frechet_gaussian: covariance is not symmetric");
}

Eigen::VectorXd clamped_eigenvalues(const Eigen::SelfAdjointEigenSolver<Mat>& es) {
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -1e-10) throw std::invalid_argument("frechet_gaussian: matrix is not positive semi-definite");
    ev[i] = std::max(ev[i], 0.0);
  }
  return ev;
}

Mat psd_sqrt(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  const Eigen::VectorXd ev = clamped_eigenvalues(es);
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

// tr sqrt(A B) = tr sqrt(A^(1/2) B A^(1/2))
double trace_sqrt_product(const Mat& a, const Mat& b) {
  const Mat ra = psd_sqrt(a);
  Mat inner = ra * b * ra;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(inner, Eigen::EigenvaluesOnly);
  Eigen::VectorXd ev = es.eigenvalues();
  double t = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) t += std::sqrt(std::max(ev[i], 0.0));
  return t;
}

}  // namespace

Gaussian fit_gaussian(const Tensor& samples) {
  if (samples.rank() == 0 || samples.shape()[0] < 2)
    throw std::invalid_argument("fit_gaussian: need at least two samples");
  const std::size_t n = samples.shape()[0], d = samples.numel() / n;
  Tensor mean = Tensor::zeros({d});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += samples[i * d + j];
  for (double& v : mean.data()) v /= static_cast<double>(n);
  Tensor cov = Tensor::zeros({d, d});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < d; ++a) {
      const double da = samples[i * d + a] - mean[a];
      for (std::size_t b = a; b < d; ++b) cov[a * d + b] += da * (samples[i * d + b] - mean[b]);
    }
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a; b < d; ++b) {
      cov[a * d + b] /= static_cast<double>(n - 1);
      cov[b * d + a] = cov[a * d + b];
    }
  return {std::move(mean), std::move(cov)};
}

double frechet_gaussian(const Tensor& mu1, const Tensor& cov1, const Tensor& mu2, const Tensor& cov2) {
  const std::size_t d = mu1.numel();
  if (mu2.numel() != d) throw ShapeError::mismatch("frechet_gaussian", mu1.shape(), mu2.shape());
  const Mat c1 = to_matrix(cov1, d), c2 = to_matrix(cov2, d);
  require_symmetric(c1);
  require_symmetric(c2);
  if (mu1.values() == mu2.values() && cov1.values() == cov2.values()) {
    (void)clamped_eigenvalues(Eigen::SelfAdjointEigenSolver<Mat>(c1, Eigen::EigenvaluesOnly));
    return 0.0;
  }
  double mean_term = 0.0;
  for (std::size_t i = 0; i < d; ++i) mean_term += (mu1[i] - mu2[i]) * (mu1[i] - mu2[i]);
  const double cross = 0.5 * (trace_sqrt_product(c1, c2) + trace_sqrt_product(c2, c1));
  // Each sum pairs the two arguments directly, so swapping them gives the same bits.
  return std::max(0.0, mean_term + (c1.trace() + c2.trace()) - 2.0 * cross);
}

double frechet_gaussian(const Gaussian& a, const Gaussian& b) { return frechet_gaussian(a.mean, a.cov, b.mean, b.cov); }

namespace {

// Index of the nearest center within radius, or -1.
long nearest_within(const Tensor& samples, std::size_t i, const Tensor& centers, double radius) {
  const std::size_t d = centers.cols();
  long best = -1;
  double best_d2 = radius * radius;
  for (std::size_t k = 0; k < centers.rows(); ++k) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = samples[i * d + j] - centers[k * d + j];
      d2 += diff * diff;
    }
    if (d2 <= best_d2) {
      best_d2 = d2;
      best = static_cast<long>(k);
    }
  }
  return best;
}

}  // namespace

std::size_t mode_coverage(const Tensor& samples, const Tensor& centers, double std, std::size_t min_count) {
  if (centers.rank() != 2 || centers.rows() == 0) return 0;
  const std::size_t n = samples.numel() / centers.cols();
  std::vector<std::size_t> counts(centers.rows(), 0);
  for (std::size_t i = 0; i < n; ++i)
    if (long k = nearest_within(samples, i, centers, 3.0 * std); k >= 0) ++counts[static_cast<std::size_t>(k)];
  return static_cast<std::size_t>(
      std::count_if(counts.begin(), counts.end(), [&](std::size_t c) { return c >= min_count; }));
}

double high_quality_ratio(const Tensor& samples, const Tensor& centers, double std) {
  if (centers.rank() != 2 || centers.rows() == 0) return 0.0;
  const std::size_t n = samples.numel() / centers.cols();
  if (n == 0) return 0.0;
  std::size_t good = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (nearest_within(samples, i, centers, 3.0 * std) >= 0) ++good;
  return static_cast<double>(good) / static_cast<double>(n);
}

GradNormStats grad_norm_stats(ad::Tape& tape, const norm::Discriminator& d, const norm::NormalizerKind& kind,
                              const Tensor& batch) {
  if (batch.rank() == 0 || batch.shape()[0] == 0) throw std::invalid_argument("grad_norm_stats: empty batch");
  ad::Var x = tape.variable(batch);
  norm::NormalizedOutput out = norm::normalize(kind, d, x);
  const Tensor norms = norm::input_grad_norm(out.value, x, false).value();
  GradNormStats s;
  for (double v : norms.data()) {
    s.mean += v;
    s.max = std::max(s.max, v);
  }
  s.mean /= static_cast<double>(norms.numel());
  return s;
}

}  // namespace pgn::metrics
