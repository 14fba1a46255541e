#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pgn/autodiff.hpp"
#include "pgn/nn.hpp"

using namespace pgn;
using ad::Tape;
using ad::Var;

namespace {

Tensor from(const oracle::Mat& m) { return Tensor({m.rows, m.cols}, m.a); }

Tensor grad_of(const Var& y, const Var& x, bool create_graph = false) {
  const Var wrt[] = {x};
  return ad::backward(y, wrt, create_graph)[0].value();
}

}  // namespace

TEST_CASE("relu zeroes negatives and keeps zero") {
  Tape t;
  CHECK(relu(t.constant(Tensor::vector({-1, 0, 2}))).value() == Tensor::vector({0, 0, 2}));
}

TEST_CASE("l2_norm of a 3-4 vector is 5") {
  Tape t;
  CHECK(l2_norm(t.constant(Tensor::vector({3, 4}))).item() == 5.0);
}

TEST_CASE("matmul agrees with a triple loop") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const oracle::Mat a = oracle::random_matrix(2, 3, rng), b = oracle::random_matrix(3, 2, rng);
    Tape t;
    const Tensor got = matmul(t.constant(from(a)), t.constant(from(b))).value();
    CHECK(max_abs_diff(got, from(oracle::triple_loop_matmul(a, b))) <= 1e-12);
  }
}

TEST_CASE("elementwise ops reject mismatched shapes and name both") {
  Tape t;
  Var a = t.constant(Tensor::zeros({2, 3})), b = t.constant(Tensor::zeros({3, 2}));
  try {
    (void)(a + b);
    FAIL("expected a shape error");
  } catch (const ShapeError& e) {
    const std::string what = e.what();
    CHECK(what.find("[2, 3]") != std::string::npos);
    CHECK(what.find("[3, 2]") != std::string::npos);
  }
  CHECK_THROWS_AS(matmul(a, a), ShapeError);
}

TEST_CASE("scalar broadcast in elementwise ops") {
  Tape t;
  Var a = t.constant(Tensor::vector({1, 2, 3}));
  Var s = t.constant(Tensor::scalar(2));
  CHECK((a * s).value() == Tensor::vector({2, 4, 6}));
  CHECK((s - a).value() == Tensor::vector({1, 0, -1}));
}

TEST_CASE("l2_norm of zero is zero with zero derivative") {
  Tape t;
  Var x = t.variable(Tensor::zeros({3}));
  Var y = l2_norm(x);
  CHECK(y.item() == 0.0);
  CHECK(grad_of(y, x) == Tensor::zeros({3}));
}

TEST_CASE("backward of sum of squares") {
  Tape t;
  Var x = t.variable(Tensor::vector({1, 2, 3}));
  CHECK(grad_of(sum(square(x)), x) == Tensor::vector({2, 4, 6}));
}

TEST_CASE("backward of the euclidean norm") {
  Tape t;
  Var x = t.variable(Tensor::vector({3, 4}));
  const Tensor g = grad_of(l2_norm(x), x);
  CHECK(g[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(g[1] == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("second order: derivative of |grad sum(x^3)| at 1 is 6") {
  Tape t;
  Var x = t.variable(Tensor::vector({1.0}));
  const Var wrt[] = {x};
  Var g = l2_norm(ad::backward(sum(x * x * x), wrt, true)[0]);
  CHECK(grad_of(g, x)[0] == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("relu and leaky_relu derivatives at zero take the right branch") {
  Tape t;
  Var x = t.variable(Tensor::vector({0.0}));
  CHECK(grad_of(sum(relu(x)), x)[0] == 1.0);
  CHECK(grad_of(sum(leaky_relu(x, 0.2)), x)[0] == 1.0);
  CHECK(grad_of(sum(abs(x)), x)[0] == 1.0);
}

TEST_CASE("backward errors") {
  Tape t, other;
  Var x = t.variable(Tensor::vector({1, 2}));
  const Var wrt[] = {x};
  CHECK_THROWS_AS(ad::backward(x * 2.0, wrt), std::invalid_argument);
  Var y = other.variable(Tensor::vector({1.0}));
  const Var foreign[] = {y};
  CHECK_THROWS_AS(ad::backward(sum(x), foreign), std::invalid_argument);
  Var c = t.constant(Tensor::vector({1.0}));
  const Var constant[] = {c};
  CHECK_THROWS_AS(ad::backward(sum(x) * c, constant), std::invalid_argument);
}

TEST_CASE("finite differences: quadratic, constant and non-finite") {
  auto sq = [](const Tensor& x) { return x[0] * x[0] + x[1] * x[1]; };
  const Tensor g = ad::finite_difference_gradient(sq, Tensor::vector({1, 2}), 1e-5);
  CHECK(std::abs(g[0] - 2) <= 1e-8);
  CHECK(std::abs(g[1] - 4) <= 1e-8);
  CHECK(ad::finite_difference_gradient([](const Tensor&) { return 3.0; }, Tensor::vector({1, 2}), 1e-5) ==
        Tensor::zeros({2}));
  try {
    ad::finite_difference_gradient([](const Tensor& x) { return x[1] > 2 ? NAN : 0.0; }, Tensor::vector({0, 2}), 1e-3);
    FAIL("expected a domain error");
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("coordinate 1") != std::string::npos);
  }
  CHECK_THROWS_AS(ad::finite_difference_gradient(sq, Tensor::vector({1, 2}), 0.0), std::invalid_argument);
}

TEST_CASE("backward of a leaky-ReLU MLP matches central differences") {
  std::mt19937_64 rng(11);
  const std::size_t hidden[] = {16};
  const nn::NetworkSpec spec =
      nn::make_mlp(nn::Role::Discriminator, 4, hidden, 1, {nn::Activation::LeakyRelu, 0.2});
  const nn::ParameterStore params = nn::kaiming_init(spec, 3);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 10; ++trial) {
    oracle::Vec x(4);
    for (double& v : x) v = n(rng);
    Tape t;
    Var xv = t.variable(Tensor({1, 4}, x));
    const Tensor g = grad_of(sum(nn::net_forward(spec, nn::bind(t, params, false), xv)), xv);
    const oracle::Vec fd = oracle::central_difference(
        [&](const oracle::Vec& p) { return nn::evaluate(spec, params, Tensor({1, 4}, p)).item(); }, x, 1e-5);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(g[i] - fd[i]) <= 1e-5 * std::max(1.0, std::abs(fd[i])));
  }
}

TEST_CASE("gradient is linear in the function") {
  Tape t;
  Var x = t.variable(Tensor::vector({0.3, -1.2, 2.0}));
  Var f = sum(tanh(x) * x);
  Var g = l2_norm(exp(x * 0.5));
  const Tensor gf = grad_of(f, x), gg = grad_of(g, x), gc = grad_of(2.5 * f - 1.5 * g, x);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(gc[i] - (2.5 * gf[i] - 1.5 * gg[i])) <= 1e-12);
}

TEST_CASE("input Hessian of a piecewise-linear network is zero") {
  const std::size_t hidden[] = {32, 32};
  const nn::NetworkSpec spec =
      nn::make_mlp(nn::Role::Discriminator, 5, hidden, 1, {nn::Activation::LeakyRelu, 0.1});
  const nn::ParameterStore params = nn::kaiming_init(spec, 5);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  Tensor x = Tensor::zeros({20, 5}), c = Tensor::zeros({20, 5});
  for (double& v : x.data()) v = n(rng);
  for (double& v : c.data()) v = n(rng);
  Tape t;
  Var xv = t.variable(x);
  Var grad = ad::backward(sum(nn::net_forward(spec, nn::bind(t, params, false), xv)),
                          std::span<const Var>(&xv, 1), true)[0];
  CHECK(grad_of(sum(mask_mul(grad, c)), xv) == Tensor::zeros({20, 5}));
}

TEST_CASE("replay reproduces recorded values bit for bit") {
  Tape t;
  Var x = t.variable(Tensor::vector({0.1, 0.7, -0.4}));
  Var y = sum(sigmoid(x) * softplus(x) / (1.0 + square(x))) + l2_norm(x);
  (void)ad::backward(y, std::span<const Var>(&x, 1), true);
  const std::vector<Tensor> replayed = t.replay();
  REQUIRE(replayed.size() == t.size());
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(replayed[i].bit_equal(t.node(i).value));
}

TEST_CASE("first-order backward leaves the tape as it was") {
  Tape t;
  Var x = t.variable(Tensor::vector({1, 2}));
  Var y = sum(square(x));
  const std::size_t before = t.size();
  (void)grad_of(y, x);
  CHECK(t.size() == before + 1);  // the returned gradient constant
}

TEST_CASE("im2col and col2im are adjoint") {
  const ad::ConvGeometry g{2, 5, 4, 3, 3, 2, 1};
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  Tensor x = Tensor::zeros({2, 5, 4, 3});
  for (double& v : x.data()) v = n(rng);
  Tape t;
  Var cols = im2col(t.constant(x), g);
  CHECK(cols.shape() == Shape{2 * g.out_height() * g.out_width(), g.patch_size()});
  Tensor y = Tensor::zeros(cols.shape());
  for (double& v : y.data()) v = n(rng);
  const Tensor back = col2im(t.constant(y), g).value();
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < y.numel(); ++i) lhs += cols.value()[i] * y[i];
  for (std::size_t i = 0; i < x.numel(); ++i) rhs += x[i] * back[i];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}
