#include "pgn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace pgn::nn {

namespace {

// W v for W (rows x cols), v (cols)
std::vector<double> mat_vec(const Tensor& w, std::span<const double> v) {
  const std::size_t rows = w.rows(), cols = w.cols();
  std::vector<double> out(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += w[i * cols + j] * v[j];
    out[i] = s;
  }
  return out;
}

// W^T u
std::vector<double> mat_t_vec(const Tensor& w, std::span<const double> u) {
  const std::size_t rows = w.rows(), cols = w.cols();
  std::vector<double> out(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out[j] += w[i * cols + j] * u[i];
  return out;
}

bool normalize(std::vector<double>& v) {
  const double n = l2_norm(v);
  if (n == 0.0) return false;
  for (double& x : v) x /= n;
  return true;
}

Tensor random_unit(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  do {
    for (double& x : v) x = normal(rng);
  } while (!normalize(v));
  return Tensor({n}, std::move(v));
}

// Power iteration run past `min_iterations` until sigma stops changing, so slow
// convergence on matrices with a small spectral gap does not understate sigma.
double converged_sigma(const Tensor& w, Tensor u, int min_iterations) {
  SpectralEstimate est = spectral_norm(w, u, std::max(min_iterations, 1));
  for (int done = min_iterations; done < 100000; done += 50) {
    const SpectralEstimate next = spectral_norm(w, est.u, 50);
    const bool settled = std::abs(next.sigma - est.sigma) <= 1e-15 * std::max(next.sigma, 1e-300);
    est = next;
    if (settled) break;
  }
  return est.sigma;
}

}  // namespace

Tensor as_matrix(const Tensor& w) {
  if (w.rank() == 0 || w.numel() == 0) throw ShapeError("as_matrix: empty weight");
  const std::size_t rows = w.shape()[0];
  return w.reshaped({rows, w.numel() / rows});
}

Tensor right_vector(const Tensor& w, const Tensor& u) {
  const Tensor m = as_matrix(w);
  if (u.numel() != m.rows()) throw ShapeError::mismatch("right_vector", m.shape(), u.shape());
  std::vector<double> v = mat_t_vec(m, u.data());
  if (!normalize(v)) std::fill(v.begin(), v.end(), 0.0);
  const std::size_t n = v.size();
  return Tensor({n}, std::move(v));
}

SpectralEstimate spectral_norm(const Tensor& w, const Tensor& u, int iterations) {
  const Tensor m = as_matrix(w);
  if (u.numel() != m.rows()) throw ShapeError::mismatch("spectral_norm", m.shape(), u.shape());
  std::vector<double> uu(u.data().begin(), u.data().end());
  std::vector<double> v(m.cols(), 0.0);
  double sigma = 0.0;
  for (int it = 0; it < std::max(iterations, 1); ++it) {
    v = mat_t_vec(m, uu);
    if (!normalize(v)) return {0.0, u};
    std::vector<double> wv = mat_vec(m, v);
    sigma = l2_norm(wv);
    if (sigma == 0.0) return {0.0, u};
    for (double& x : wv) x /= sigma;
    uu = std::move(wv);
  }
  // sigma = |W v| = u_next^T W v
  const std::size_t n = uu.size();
  return {sigma, Tensor({n}, std::move(uu))};
}

std::vector<std::size_t> weighted_layers(const NetworkSpec& spec) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < spec.layers.size(); ++k)
    if (std::holds_alternative<AffineLayer>(spec.layers[k]) || std::holds_alternative<Conv2dLayer>(spec.layers[k]))
      out.push_back(k);
  return out;
}

void ensure_power_vectors(ParameterStore& params, const NetworkSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t k : weighted_layers(spec)) {
    if (params.contains(power_vector_name(k))) continue;
    params.add(power_vector_name(k), random_unit(params.get(weight_name(k)).shape()[0], rng));
  }
}

void advance_power_iteration(ParameterStore& params, const NetworkSpec& spec, int iterations) {
  for (std::size_t k : weighted_layers(spec)) {
    Tensor& u = params.get(power_vector_name(k));
    u = spectral_norm(params.get(weight_name(k)), u, iterations).u;
  }
}

ParameterStore apply_spectral_normalization(const ParameterStore& params, const NetworkSpec& spec) {
  ParameterStore out = params;
  for (std::size_t k : weighted_layers(spec)) {
    if (!out.contains(power_vector_name(k)))
      throw std::invalid_argument("apply_spectral_normalization: layer " + std::to_string(k) +
                                  " has no power-iteration vector");
    Tensor& w = out.get(weight_name(k));
    Tensor& u = out.get(power_vector_name(k));
    const SpectralEstimate est = spectral_norm(w, u, 1);
    u = est.u;
    if (est.sigma == 0.0) continue;
    for (double& x : w.data()) x /= est.sigma;
  }
  return out;
}

double lipschitz_upper_bound(const NetworkSpec& spec, const ParameterStore& params, int iterations,
                             std::optional<std::size_t> depth) {
  std::mt19937_64 rng(0x51a3c0deULL);
  double bound = 1.0;
  const std::size_t limit = std::min(depth.value_or(spec.layers.size()), spec.layers.size());
  for (std::size_t k : weighted_layers(spec)) {
    if (k >= limit) break;
    const Tensor& w = params.get(weight_name(k));
    const Tensor start = params.contains(power_vector_name(k)) ? params.get(power_vector_name(k))
                                                                : random_unit(w.shape()[0], rng);
    double factor = converged_sigma(w, start, iterations);
    if (const auto* c = std::get_if<Conv2dLayer>(&spec.layers[k]))
      factor *= static_cast<double>((c->kernel + c->stride - 1) / c->stride);
    bound *= factor;
  }
  return bound;
}

double empirical_lipschitz(const std::function<double(const Tensor&)>& f,
                           std::span<const std::pair<Tensor, Tensor>> pairs) {
  double best = 0.0;
  for (const auto& [x, y] : pairs) {
    if (x.numel() != y.numel()) throw ShapeError::mismatch("empirical_lipschitz", x.shape(), y.shape());
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.numel(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
    if (d2 == 0.0) continue;
    best = std::max(best, std::abs(f(x) - f(y)) / std::sqrt(d2));
  }
  return best;
}

}  // namespace pgn::nn
