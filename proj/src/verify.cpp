#include "pgn/verify.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <stdexcept>

#include "pgn/nn.hpp"
#include "pgn/normalizers.hpp"
#include "pgn/spectral.hpp"

namespace pgn::verify {

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult& VerifyReport::get(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw std::out_of_range("no verify check named " + name);
}

std::string VerifyReport::format() const {
  std::string out;
  char buf[512];
  for (const auto& c : checks) {
    std::snprintf(buf, sizeof buf, "%-28s %-4s samples=%-6zu worst=%.6e tol=%.1e%s%s\n", c.name.c_str(),
                  c.passed ? "PASS" : "FAIL", c.samples, c.worst, c.tolerance, c.detail.empty() ? "" : "  ",
                  c.detail.c_str());
    out += buf;
  }
  out += passed() ? "verify: all checks passed\n" : "verify: FAILED\n";
  return out;
}

namespace {

using ad::Var;

struct RandomNet {
  nn::NetworkSpec spec;
  nn::ParameterStore params;
};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Tensor normal_tensor(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.data()) v = n(rng);
  return t;
}

// Leaky-ReLU MLP with Kaiming weights and small random biases, so kinks are not aligned at the origin.
RandomNet random_mlp(const VerifyOptions& o, std::size_t depth, std::mt19937_64& rng) {
  const std::vector<std::size_t> hidden(depth - 1, o.width);
  RandomNet net;
  net.spec = nn::make_mlp(nn::Role::Discriminator, o.input_dim, hidden, 1,
                          {nn::Activation::LeakyRelu, o.leaky_slope});
  net.params = nn::kaiming_init(net.spec, rng());
  std::normal_distribution<double> bias(0.0, 0.1);
  for (auto& e : net.params)
    if (e.name.ends_with(".bias"))
      for (double& v : e.value.data()) v = bias(rng);
  return net;
}

std::size_t pick_depth(const VerifyOptions& o, std::size_t index) {
  const std::size_t span = o.max_depth - o.min_depth + 1;
  return o.min_depth + index % span;
}

NormalizeFn normalizer_of(const VerifyOptions& o) {
  if (o.normalize) return o.normalize;
  return [](const Var& f, const Var& g) { return norm::pgn_normalize(f, g); };
}

struct Evaluated {
  Tensor raw;
  Tensor raw_grad_norm;
  Tensor value;
  Tensor value_grad_norm;
};

// Normalized output and its per-sample input-gradient norm for a batch.
Evaluated evaluate_normalized(const RandomNet& net, const NormalizeFn& normalize, const Tensor& x) {
  ad::Tape tape;
  const nn::BoundParameters params = nn::bind(tape, net.params, false);
  Var xv = tape.variable(x);
  Var f = nn::net_forward(net.spec, params, xv);
  Var g = norm::input_grad_norm(f, xv, true);
  Var v = normalize(f, g);
  Var vg = norm::input_grad_norm(v, xv, false);
  return {f.value(), g.value(), v.value(), vg.value()};
}

double normalized_scalar(const RandomNet& net, const NormalizeFn& normalize, const Tensor& point) {
  return evaluate_normalized(net, normalize, point.reshaped({1, point.numel()})).value.item();
}

CheckResult make_result(std::string name, double tolerance) {
  CheckResult r;
  r.name = std::move(name);
  r.tolerance = tolerance;
  return r;
}

void finish(CheckResult& r) {
  r.passed = std::isfinite(r.worst) && r.worst <= r.tolerance;
  if (r.samples == 0) {
    r.passed = true;
    r.detail = "warning: no samples, vacuous pass";
  }
}

template <class Body>
CheckResult bound_check(const VerifyOptions& o, std::string name, std::uint64_t stream, Body body) {
  CheckResult r = make_result(std::move(name), 1.0 + 1e-6);
  std::mt19937_64 rng(derive_seed(o.seed, stream));
  const NormalizeFn normalize = normalizer_of(o);
  for (std::size_t k = 0; k < o.networks && o.samples > 0; ++k) {
    const RandomNet net = random_mlp(o, pick_depth(o, k), rng);
    const Tensor x = normal_tensor({o.samples, o.input_dim}, rng, 2.0);
    const Evaluated e = evaluate_normalized(net, normalize, x);
    for (double v : body(e).data()) r.worst = std::max(r.worst, std::abs(v));
    r.samples += o.samples;
  }
  finish(r);
  return r;
}

// Random scalar functions built from the op set, recorded as recipes so they can be re-evaluated.
struct Recipe {
  std::function<Var(const Var& x, double& kink_margin)> build;
  std::size_t dim = 0;
  bool smooth = true;
};

Var kinked(const Var& a, double& margin, Var (*op)(const Var&)) {
  for (double v : a.value().data()) margin = std::min(margin, std::abs(v));
  return op(a);
}

using Builder = std::function<Var(const Var&, double&)>;

Builder random_expression(std::mt19937_64& rng, std::size_t dim, int depth, bool allow_kinks, bool& smooth) {
  if (depth == 0) return [](const Var& x, double&) { return x; };
  std::uniform_int_distribution<int> pick(0, allow_kinks ? 19 : 15);
  const int op = pick(rng);
  Builder a = random_expression(rng, dim, depth - 1, allow_kinks, smooth);
  std::uniform_real_distribution<double> coef(-1.5, 1.5);
  switch (op) {
    case 0: return [a](const Var& x, double& m) { return tanh(a(x, m)); };
    case 1: return [a](const Var& x, double& m) { return sigmoid(a(x, m)); };
    case 2: return [a](const Var& x, double& m) { return softplus(a(x, m)); };
    case 3: return [a](const Var& x, double& m) { return exp(0.3 * tanh(a(x, m))); };
    case 4: return [a](const Var& x, double& m) { return log(1.0 + square(a(x, m))); };
    case 5: return [a](const Var& x, double& m) { return sqrt(1.0 + square(a(x, m))); };
    case 6: {
      const double c = coef(rng);
      return [a, c](const Var& x, double& m) { return c * a(x, m) + c * c; };
    }
    case 7: {
      Builder b = random_expression(rng, dim, depth - 1, allow_kinks, smooth);
      return [a, b](const Var& x, double& m) { return a(x, m) + b(x, m); };
    }
    case 8: {
      Builder b = random_expression(rng, dim, depth - 1, allow_kinks, smooth);
      return [a, b](const Var& x, double& m) { return a(x, m) - b(x, m); };
    }
    case 9: {
      Builder b = random_expression(rng, dim, depth - 1, allow_kinks, smooth);
      return [a, b](const Var& x, double& m) { return a(x, m) * b(x, m); };
    }
    case 10: {
      Builder b = random_expression(rng, dim, depth - 1, allow_kinks, smooth);
      return [a, b](const Var& x, double& m) { return a(x, m) / (1.5 + square(b(x, m))); };
    }
    case 11: {
      const Tensor w = normal_tensor({dim, dim}, rng, 1.0 / std::sqrt(static_cast<double>(dim)));
      return [a, w](const Var& x, double& m) {
        Var h = a(x, m);
        return matmul(h, h.tape().constant(w));
      };
    }
    case 12: {
      const Tensor w = normal_tensor({dim, dim}, rng, 1.0 / std::sqrt(static_cast<double>(dim)));
      return [a, w, dim](const Var& x, double& m) {
        Var h = a(x, m);
        Var col = reshape(h, {dim, 1});
        return transpose(matmul(h.tape().constant(w), col));
      };
    }
    case 13:
      return [a, dim](const Var& x, double& m) {
        Var h = a(x, m);
        return h * expand(mean(h), {1, dim});
      };
    case 14:
      return [a, dim](const Var& x, double& m) {
        Var h = a(x, m);
        return h / expand(1.0 + row_l2_norm(h), {1, dim});
      };
    case 15: {
      const Tensor mask = normal_tensor({1, dim}, rng);
      return [a, mask](const Var& x, double& m) { return mask_mul(a(x, m), mask); };
    }
    case 16: smooth = false; return [a](const Var& x, double& m) { return kinked(a(x, m), m, &ad::relu); };
    case 17:
      smooth = false;
      return [a](const Var& x, double& m) {
        Var h = a(x, m);
        for (double v : h.value().data()) m = std::min(m, std::abs(v));
        return leaky_relu(h, 0.2);
      };
    case 18: smooth = false; return [a](const Var& x, double& m) { return kinked(a(x, m), m, &ad::abs); };
    default:
      smooth = false;
      return [a](const Var& x, double& m) {
        Var h = a(x, m);
        for (double v : h.value().data()) m = std::min(m, std::abs(v));
        return h + 0.5 * expand(sum(abs(h)), h.shape());
      };
  }
}

Recipe random_recipe(std::mt19937_64& rng, bool allow_kinks) {
  std::uniform_int_distribution<std::size_t> dim_pick(2, 6);
  std::uniform_int_distribution<int> depth_pick(2, 5);
  std::uniform_int_distribution<int> head(0, 2);
  Recipe r;
  r.dim = dim_pick(rng);
  Builder body = random_expression(rng, r.dim, depth_pick(rng), allow_kinks, r.smooth);
  const int h = head(rng);
  r.build = [body, h](const Var& x, double& m) {
    Var out = body(x, m);
    if (h == 0) return sum(out);
    if (h == 1) return mean(square(out));
    return l2_norm(out);
  };
  return r;
}

double recipe_value(const Recipe& r, const Tensor& x) {
  ad::Tape tape;
  double margin = INFINITY;
  return r.build(tape.constant(x), margin).item();
}

Tensor recipe_gradient(const Recipe& r, const Tensor& x, double& margin) {
  ad::Tape tape;
  Var xv = tape.variable(x);
  Var y = r.build(xv, margin);
  const Var wrt[] = {xv};
  return ad::backward(y, wrt)[0].value();
}

double relative_error(const Tensor& got, const Tensor& want) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < got.numel(); ++i) {
    diff = std::max(diff, std::abs(got[i] - want[i]));
    scale = std::max(scale, std::abs(want[i]));
  }
  return diff / std::max(scale, 1e-3);
}

double dense_sigma_max(const Tensor& w) {
  const Tensor m = nn::as_matrix(w);
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m.at(i, j);
  return Eigen::JacobiSVD<Eigen::MatrixXd>(e).singularValues()(0);
}

Tensor random_unit(std::size_t n, std::mt19937_64& rng) {
  Tensor u = normal_tensor({n}, rng);
  const double len = l2_norm(u.data());
  for (double& v : u.data()) v /= len;
  return u;
}

}  // namespace

CheckResult check_gradient_bound(const VerifyOptions& o) {
  return bound_check(o, "pgn_gradient_bound", 1, [](const Evaluated& e) { return e.value_grad_norm; });
}

CheckResult check_value_bound(const VerifyOptions& o) {
  return bound_check(o, "pgn_value_bound", 1, [](const Evaluated& e) { return e.value; });
}

CheckResult check_bound_finite_difference(const VerifyOptions& o) {
  CheckResult r = make_result("pgn_bound_finite_difference", 1e-5);
  std::mt19937_64 rng(derive_seed(o.seed, 2));
  const NormalizeFn normalize = normalizer_of(o);
  const std::size_t points = std::min<std::size_t>(20, o.samples);
  for (std::size_t k = 0; k < o.networks && points > 0; ++k) {
    const RandomNet net = random_mlp(o, pick_depth(o, k), rng);
    const Tensor x = normal_tensor({points, o.input_dim}, rng, 2.0);
    const Evaluated e = evaluate_normalized(net, normalize, x);
    for (std::size_t i = 0; i < points; ++i) {
      const auto row = x.data().subspan(i * o.input_dim, o.input_dim);
      const Tensor point({o.input_dim}, std::vector<double>(row.begin(), row.end()));
      const Tensor fd = ad::finite_difference_gradient(
          [&](const Tensor& p) { return normalized_scalar(net, normalize, p); }, point, 1e-6);
      const double fd_norm = l2_norm(fd.data());
      r.worst = std::max(r.worst, std::abs(fd_norm - e.value_grad_norm[i]) / std::max(1.0, fd_norm));
      ++r.samples;
    }
  }
  finish(r);
  return r;
}

CheckResult check_gradient_identity(const VerifyOptions& o) {
  CheckResult r = make_result("gradient_norm_identity", 1e-6);
  std::mt19937_64 rng(derive_seed(o.seed, 3));
  const NormalizeFn normalize = normalizer_of(o);
  const std::size_t total = o.samples == 0 ? 0 : 500;
  for (std::size_t k = 0; r.samples < total; ++k) {
    const std::size_t batch = std::min<std::size_t>(50, total - r.samples);
    const RandomNet net = random_mlp(o, pick_depth(o, k), rng);
    const Evaluated e = evaluate_normalized(net, normalize, normal_tensor({batch, o.input_dim}, rng, 2.0));
    for (std::size_t i = 0; i < batch; ++i) {
      const double g = e.raw_grad_norm[i];
      const double closed = std::pow(g / (g + std::abs(1.0 - e.raw[i])), 2);
      r.worst = std::max(r.worst, std::abs(e.value_grad_norm[i] - closed));
    }
    r.samples += batch;
  }
  finish(r);
  return r;
}

CheckResult check_weight_gradient(const VerifyOptions& o) {
  CheckResult r = make_result("weight_gradient_closed_form", 1e-8);
  std::mt19937_64 rng(derive_seed(o.seed, 4));
  const std::size_t instances = o.samples == 0 ? 0 : 50;
  const double eps = norm::kDenominatorEps;
  for (std::size_t k = 0; k < instances; ++k) {
    VerifyOptions shape = o;
    shape.input_dim = 2 + k % 5;
    shape.width = 3 + k % 7;
    const RandomNet net = random_mlp(shape, 2, rng);
    const std::vector<std::size_t> weighted = nn::weighted_layers(net.spec);
    const std::string w1n = nn::weight_name(weighted[0]), b1n = nn::bias_name(weighted[0]);
    const std::string w2n = nn::weight_name(weighted[1]), b2n = nn::bias_name(weighted[1]);
    const Tensor x = normal_tensor({1, shape.input_dim}, rng, 2.0);

    ad::Tape tape;
    const nn::BoundParameters params = nn::bind(tape, net.params, true);
    Var xv = tape.variable(x);
    Var f = nn::net_forward(net.spec, params, xv);
    Var g = norm::input_grad_norm(f, xv, true);
    Var fhat = norm::pgn_normalize(f, g);
    const Var wrt[] = {params.get(w1n), params.get(b1n), params.get(w2n), params.get(b2n)};
    const ad::GradientMap grads = ad::backward(fhat, wrt);

    // f = w2 . phi(W1 x + b1) + b2 with phi leaky ReLU; g = |W1^T (phi'(h) * w2)|.
    const Tensor& w1 = net.params.get(w1n);
    const Tensor& b1 = net.params.get(b1n);
    const Tensor& w2 = net.params.get(w2n);
    const std::size_t hidden = w1.rows(), in = w1.cols();
    std::vector<double> h(hidden), d(hidden), act(hidden), v(hidden), rvec(in, 0.0), w1r(hidden, 0.0);
    double fv = net.params.get(b2n)[0];
    for (std::size_t i = 0; i < hidden; ++i) {
      h[i] = b1[i];
      for (std::size_t j = 0; j < in; ++j) h[i] += w1.at(i, j) * x[j];
      d[i] = h[i] >= 0 ? 1.0 : o.leaky_slope;
      act[i] = d[i] * h[i];
      v[i] = d[i] * w2[i];
      fv += w2[i] * act[i];
    }
    for (std::size_t j = 0; j < in; ++j)
      for (std::size_t i = 0; i < hidden; ++i) rvec[j] += w1.at(i, j) * v[i];
    const double gv = std::sqrt(std::inner_product(rvec.begin(), rvec.end(), rvec.begin(), 0.0));
    for (std::size_t i = 0; i < hidden; ++i)
      for (std::size_t j = 0; j < in; ++j) w1r[i] += w1.at(i, j) * rvec[j];
    const double num = 1.0 - fv;
    const double den = gv + std::abs(num) + eps;
    auto combine = [&](double df, double dg) { return (-(gv + eps) * df - num * dg) / (den * den); };

    double worst = 0.0;
    for (std::size_t i = 0; i < hidden; ++i)
      for (std::size_t j = 0; j < in; ++j)
        worst = std::max(worst, std::abs(grads[0].value()[i * in + j] -
                                         combine(v[i] * x[j], v[i] * rvec[j] / gv)));
    for (std::size_t i = 0; i < hidden; ++i) {
      worst = std::max(worst, std::abs(grads[1].value()[i] - combine(v[i], 0.0)));
      worst = std::max(worst, std::abs(grads[2].value()[i] - combine(act[i], d[i] * w1r[i] / gv)));
    }
    worst = std::max(worst, std::abs(grads[3].value()[0] - combine(1.0, 0.0)));
    r.worst = std::max(r.worst, worst);
    ++r.samples;
  }
  finish(r);
  return r;
}

CheckResult check_autodiff_oracle(const VerifyOptions& o) {
  CheckResult r = make_result("autodiff_finite_difference", 1e-5);
  std::mt19937_64 rng(derive_seed(o.seed, 5));
  const std::size_t functions = o.samples == 0 ? 0 : 100;
  std::size_t skipped = 0;
  while (r.samples < functions) {
    const Recipe recipe = random_recipe(rng, true);
    bool done = false;
    for (int attempt = 0; attempt < 50 && !done; ++attempt) {
      const Tensor x = normal_tensor({1, recipe.dim}, rng);
      double margin = INFINITY;
      const Tensor grad = recipe_gradient(recipe, x, margin);
      if (margin < 1e-3) continue;
      const Tensor fd = ad::finite_difference_gradient([&](const Tensor& p) { return recipe_value(recipe, p); }, x, 1e-5);
      r.worst = std::max(r.worst, relative_error(grad, fd));
      done = true;
    }
    if (done) ++r.samples; else ++skipped;
  }
  if (skipped) r.detail = std::to_string(skipped) + " functions had no kink-free point";
  finish(r);
  return r;
}

CheckResult check_double_backward(const VerifyOptions& o) {
  CheckResult r = make_result("double_backward", 1e-5);
  std::mt19937_64 rng(derive_seed(o.seed, 6));
  const std::size_t functions = o.samples == 0 ? 0 : 30;
  for (; r.samples < functions; ++r.samples) {
    const Recipe recipe = random_recipe(rng, false);
    const Tensor x = normal_tensor({1, recipe.dim}, rng);
    const Tensor dir = normal_tensor({1, recipe.dim}, rng);
    ad::Tape tape;
    Var xv = tape.variable(x);
    double margin = INFINITY;
    Var y = recipe.build(xv, margin);
    const Var wrt[] = {xv};
    Var grad = ad::backward(y, wrt, true)[0];
    const Tensor hv = ad::backward(sum(mask_mul(grad, dir)), wrt)[0].value();

    const double h = 1e-5;
    Tensor up = x, down = x;
    for (std::size_t i = 0; i < x.numel(); ++i) {
      up[i] += h * dir[i];
      down[i] -= h * dir[i];
    }
    double unused = INFINITY;
    const Tensor gu = recipe_gradient(recipe, up, unused), gd = recipe_gradient(recipe, down, unused);
    Tensor fd = Tensor::zeros(x.shape());
    for (std::size_t i = 0; i < x.numel(); ++i) fd[i] = (gu[i] - gd[i]) / (2 * h);
    r.worst = std::max(r.worst, relative_error(hv, fd));
  }
  finish(r);
  return r;
}

CheckResult check_piecewise_linear_hessian(const VerifyOptions& o) {
  CheckResult r = make_result("piecewise_linear_hessian", 0.0);
  std::mt19937_64 rng(derive_seed(o.seed, 7));
  for (std::size_t k = 0; k < o.networks && o.samples > 0; ++k) {
    const RandomNet net = random_mlp(o, pick_depth(o, k), rng);
    const std::size_t batch = std::min<std::size_t>(o.samples, 100);
    ad::Tape tape;
    const nn::BoundParameters params = nn::bind(tape, net.params, false);
    Var x = tape.variable(normal_tensor({batch, o.input_dim}, rng, 2.0));
    const Var wrt[] = {x};
    Var grad = ad::backward(sum(nn::net_forward(net.spec, params, x)), wrt, true)[0];
    const Tensor hv = ad::backward(sum(mask_mul(grad, normal_tensor(grad.shape(), rng))), wrt)[0].value();
    for (double v : hv.data()) r.worst = std::max(r.worst, std::abs(v));
    r.samples += batch;
  }
  finish(r);
  return r;
}

CheckResult check_spectral_norm(const VerifyOptions& o) {
  CheckResult r = make_result("spectral_norm_power_iteration", 1e-6);
  std::mt19937_64 rng(derive_seed(o.seed, 8));
  std::uniform_int_distribution<std::size_t> side(1, 16);
  const std::size_t matrices = o.samples == 0 ? 0 : 100;
  for (; r.samples < matrices; ++r.samples) {
    const std::size_t rows = side(rng), cols = side(rng);
    const Tensor w = normal_tensor({rows, cols}, rng);
    const nn::SpectralEstimate est = nn::spectral_norm(w, random_unit(rows, rng), 100);
    r.worst = std::max(r.worst, std::abs(est.sigma - dense_sigma_max(w)));
    Tensor scaled = w;
    for (double& v : scaled.data()) v /= est.sigma;
    r.worst = std::max(r.worst, std::abs(dense_sigma_max(scaled) - 1.0));
  }
  finish(r);
  return r;
}

CheckResult check_lipschitz(const VerifyOptions& o) {
  CheckResult r = make_result("lipschitz_bound", 1e-6);
  std::mt19937_64 rng(derive_seed(o.seed, 9));
  double growth = 0.0, pair_excess = -INFINITY, grad_excess = -INFINITY;
  for (std::size_t k = 0; k < o.networks && o.samples > 0; ++k) {
    RandomNet net = random_mlp(o, pick_depth(o, k), rng);
    nn::ensure_power_vectors(net.params, net.spec, rng());
    // Converged vectors, so every layer meets the 1-Lipschitz premise to rounding.
    nn::advance_power_iteration(net.params, net.spec, 5000);
    const nn::ParameterStore normalized = nn::apply_spectral_normalization(net.params, net.spec);
    const double bound = nn::lipschitz_upper_bound(net.spec, normalized, 100);

    double previous = INFINITY;
    for (std::size_t layer : nn::weighted_layers(net.spec)) {
      const double prefix = nn::lipschitz_upper_bound(net.spec, normalized, 100, layer + 1);
      if (std::isfinite(previous)) growth = std::max(growth, prefix - previous);
      previous = prefix;
    }

    auto f = [&](const Tensor& p) { return nn::evaluate(net.spec, normalized, p.reshaped({1, p.numel()})).item(); };
    std::vector<std::pair<Tensor, Tensor>> pairs;
    std::uniform_real_distribution<double> scale(1e-3, 1.0);
    for (std::size_t i = 0; i < 10000; ++i) {
      Tensor a = normal_tensor({o.input_dim}, rng, 2.0);
      Tensor b = a;
      const Tensor step = normal_tensor({o.input_dim}, rng, scale(rng));
      for (std::size_t j = 0; j < b.numel(); ++j) b[j] += step[j];
      pairs.emplace_back(std::move(a), std::move(b));
    }
    pair_excess = std::max(pair_excess, nn::empirical_lipschitz(f, pairs) - bound);

    ad::Tape tape;
    const nn::BoundParameters params = nn::bind(tape, normalized, false);
    Var x = tape.variable(normal_tensor({o.samples, o.input_dim}, rng, 2.0));
    const Tensor norms = norm::input_grad_norm(nn::net_forward(net.spec, params, x), x, false).value();
    for (double g : norms.data()) grad_excess = std::max(grad_excess, g - bound);
    r.samples += pairs.size() + o.samples;
  }
  r.worst = std::max({growth, pair_excess, grad_excess, 0.0});
  char buf[160];
  std::snprintf(buf, sizeof buf, "pairs-bound=%.3e grad-bound=%.3e prefix growth=%.3e", pair_excess, grad_excess,
                growth);
  r.detail = buf;
  finish(r);
  return r;
}

VerifyReport run_all(const VerifyOptions& o) {
  if (o.min_depth < 2 || o.max_depth < o.min_depth) throw std::invalid_argument("verify: need 2 <= min_depth <= max_depth");
  if (o.width == 0 || o.input_dim == 0) throw std::invalid_argument("verify: width and input_dim must be positive");
  VerifyReport report;
  report.checks = {check_gradient_bound(o),       check_value_bound(o),          check_bound_finite_difference(o),
                   check_gradient_identity(o),    check_weight_gradient(o),      check_autodiff_oracle(o),
                   check_double_backward(o),      check_piecewise_linear_hessian(o), check_spectral_norm(o),
                   check_lipschitz(o)};
  return report;
}

}  // namespace pgn::verify
