#include "pgn/autodiff.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace pgn::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Shape broadcast_shape(const char* op, const Shape& a, const Shape& b) {
  if (a == b) return a;
  if (numel_of(b) == 1) return a;
  if (numel_of(a) == 1) return b;
  throw ShapeError::mismatch(op, a, b);
}

template <class F>
Tensor binary(const char* op, const Tensor& a, const Tensor& b, F f) {
  Shape shape = broadcast_shape(op, a.shape(), b.shape());
  std::vector<double> out(numel_of(shape));
  const bool sa = a.numel() == 1 && a.shape() != shape;
  const bool sb = b.numel() == 1 && b.shape() != shape;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(a[sa ? 0 : i], b[sb ? 0 : i]);
  return Tensor(std::move(shape), std::move(out));
}

template <class F>
Tensor unary(const Tensor& a, F f) {
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(a[i]);
  return Tensor(a.shape(), std::move(out));
}

void require_2d(const char* op, const Tensor& a) {
  if (a.rank() != 2) throw ShapeError(std::string(op) + ": expected 2-D tensor, got " + to_string(a.shape()));
}

Tensor matmul_kernel(const Tensor& a, const Tensor& b) {
  require_2d("matmul", a);
  require_2d("matmul", b);
  if (a.cols() != b.rows()) throw ShapeError::mismatch("matmul", a.shape(), b.shape());
  Tensor c = Tensor::zeros({a.rows(), b.cols()});
  Eigen::Map<const RowMat> ma(a.data().data(), a.rows(), a.cols());
  Eigen::Map<const RowMat> mb(b.data().data(), b.rows(), b.cols());
  Eigen::Map<RowMat> mc(c.data().data(), a.rows(), b.cols());
  mc.noalias() = ma * mb;
  return c;
}

Tensor transpose_kernel(const Tensor& a) {
  require_2d("transpose", a);
  const std::size_t r = a.rows(), c = a.cols();
  Tensor t = Tensor::zeros({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) t[j * r + i] = a[i * c + j];
  return t;
}

double sum_kernel(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  return s;
}

// Dimensions of a 2-D broadcast pair, or nullopt when `from` is a plain scalar.
struct Broadcast2d {
  std::size_t rows, cols;
  bool rows_bcast, cols_bcast;
};

Broadcast2d broadcast_2d(const char* op, const Shape& small, const Shape& big) {
  if (small.size() != 2 || big.size() != 2) throw ShapeError::mismatch(op, small, big);
  const bool rb = small[0] == 1 && big[0] != 1;
  const bool cb = small[1] == 1 && big[1] != 1;
  if ((small[0] != big[0] && !rb) || (small[1] != big[1] && !cb)) throw ShapeError::mismatch(op, small, big);
  return {big[0], big[1], rb, cb};
}

Tensor expand_kernel(const Tensor& a, const Shape& target) {
  if (a.shape() == target) return a;
  if (a.numel() == 1) return Tensor::filled(target, a[0]);
  const Broadcast2d b = broadcast_2d("expand", a.shape(), target);
  Tensor out = Tensor::zeros(target);
  const std::size_t ac = a.shape()[1];
  for (std::size_t i = 0; i < b.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j)
      out[i * b.cols + j] = a[(b.rows_bcast ? 0 : i) * ac + (b.cols_bcast ? 0 : j)];
  return out;
}

Tensor sum_to_kernel(const Tensor& a, const Shape& target) {
  if (a.shape() == target) return a;
  if (numel_of(target) == 1) return Tensor(target, {sum_kernel(a)});
  const Broadcast2d b = broadcast_2d("sum_to", target, a.shape());
  Tensor out = Tensor::zeros(target);
  const std::size_t tc = target[1];
  for (std::size_t i = 0; i < b.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j)
      out[(b.rows_bcast ? 0 : i) * tc + (b.cols_bcast ? 0 : j)] += a[i * b.cols + j];
  return out;
}

Tensor row_l2_norm_kernel(const Tensor& a) {
  require_2d("row_l2_norm", a);
  const std::size_t r = a.rows(), c = a.cols();
  Tensor out = Tensor::zeros({r, 1});
  for (std::size_t i = 0; i < r; ++i) out[i] = pgn::l2_norm(a.data().subspan(i * c, c));
  return out;
}

void check_geometry(const char* op, const ConvGeometry& g) {
  if (g.kernel == 0 || g.stride == 0 || g.height + 2 * g.padding < g.kernel || g.width + 2 * g.padding < g.kernel)
    throw ShapeError(std::string(op) + ": invalid convolution geometry");
}

Tensor im2col_kernel(const Tensor& a, const ConvGeometry& g) {
  check_geometry("im2col", g);
  const Shape in{g.batch, g.height, g.width, g.channels};
  if (a.shape() != in) throw ShapeError::mismatch("im2col", a.shape(), in);
  const std::size_t oh = g.out_height(), ow = g.out_width(), p = g.patch_size();
  Tensor out = Tensor::zeros({g.batch * oh * ow, p});
  for (std::size_t b = 0; b < g.batch; ++b)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x) {
        double* row = out.data().data() + ((b * oh + y) * ow + x) * p;
        for (std::size_t ky = 0; ky < g.kernel; ++ky)
          for (std::size_t kx = 0; kx < g.kernel; ++kx) {
            const long iy = static_cast<long>(y * g.stride + ky) - static_cast<long>(g.padding);
            const long ix = static_cast<long>(x * g.stride + kx) - static_cast<long>(g.padding);
            if (iy < 0 || ix < 0 || iy >= static_cast<long>(g.height) || ix >= static_cast<long>(g.width)) continue;
            const double* src = a.data().data() + ((b * g.height + iy) * g.width + ix) * g.channels;
            std::copy(src, src + g.channels, row + (ky * g.kernel + kx) * g.channels);
          }
      }
  return out;
}

Tensor col2im_kernel(const Tensor& a, const ConvGeometry& g) {
  check_geometry("col2im", g);
  const std::size_t oh = g.out_height(), ow = g.out_width(), p = g.patch_size();
  const Shape in{g.batch * oh * ow, p};
  if (a.shape() != in) throw ShapeError::mismatch("col2im", a.shape(), in);
  Tensor out = Tensor::zeros({g.batch, g.height, g.width, g.channels});
  for (std::size_t b = 0; b < g.batch; ++b)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x) {
        const double* row = a.data().data() + ((b * oh + y) * ow + x) * p;
        for (std::size_t ky = 0; ky < g.kernel; ++ky)
          for (std::size_t kx = 0; kx < g.kernel; ++kx) {
            const long iy = static_cast<long>(y * g.stride + ky) - static_cast<long>(g.padding);
            const long ix = static_cast<long>(x * g.stride + kx) - static_cast<long>(g.padding);
            if (iy < 0 || ix < 0 || iy >= static_cast<long>(g.height) || ix >= static_cast<long>(g.width)) continue;
            double* dst = out.data().data() + ((b * g.height + iy) * g.width + ix) * g.channels;
            const double* src = row + (ky * g.kernel + kx) * g.channels;
            for (std::size_t c = 0; c < g.channels; ++c) dst[c] += src[c];
          }
      }
  return out;
}

double stable_softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Forward value of a non-leaf node. Shared by recording and replay so both
// produce identical bits.
Tensor evaluate(const Tape::Node& n, const Tensor* a, const Tensor* b) {
  switch (n.op) {
    case Op::Leaf: return n.value;
    case Op::Add: return binary("add", *a, *b, [](double x, double y) { return x + y; });
    case Op::Sub: return binary("sub", *a, *b, [](double x, double y) { return x - y; });
    case Op::Mul: return binary("mul", *a, *b, [](double x, double y) { return x * y; });
    case Op::Div: return binary("div", *a, *b, [](double x, double y) { return x / y; });
    case Op::Neg: return unary(*a, [](double x) { return -x; });
    case Op::AddScalar: return unary(*a, [c = n.attr](double x) { return x + c; });
    case Op::MulScalar: return unary(*a, [c = n.attr](double x) { return x * c; });
    case Op::MatMul: return matmul_kernel(*a, *b);
    case Op::Transpose: return transpose_kernel(*a);
    case Op::Sum: return Tensor::scalar(sum_kernel(*a));
    case Op::Mean: return Tensor::scalar(sum_kernel(*a) / static_cast<double>(a->numel()));
    case Op::Expand: return expand_kernel(*a, n.target);
    case Op::SumTo: return sum_to_kernel(*a, n.target);
    case Op::Abs: return unary(*a, [](double x) { return std::abs(x); });
    case Op::Relu: return unary(*a, [](double x) { return x > 0 ? x : 0.0; });
    case Op::LeakyRelu: return unary(*a, [s = n.attr](double x) { return x >= 0 ? x : s * x; });
    case Op::Tanh: return unary(*a, [](double x) { return std::tanh(x); });
    case Op::Exp: return unary(*a, [](double x) { return std::exp(x); });
    case Op::Log: return unary(*a, [](double x) { return std::log(x); });
    case Op::Sigmoid: return unary(*a, stable_sigmoid);
    case Op::Softplus: return unary(*a, stable_softplus);
    case Op::Square: return unary(*a, [](double x) { return x * x; });
    case Op::Sqrt: return unary(*a, [](double x) { return std::sqrt(x); });
    case Op::L2Norm: return Tensor::scalar(pgn::l2_norm(a->data()));
    case Op::RowL2Norm: return row_l2_norm_kernel(*a);
    case Op::Reshape: return a->reshaped(n.target);
    case Op::MaskMul:
      if (a->shape() != n.aux.shape()) throw ShapeError::mismatch("mask_mul", a->shape(), n.aux.shape());
      return binary("mask_mul", *a, n.aux, [](double x, double m) { return x * m; });
    case Op::Im2Col: return im2col_kernel(*a, n.geometry);
    case Op::Col2Im: return col2im_kernel(*a, n.geometry);
  }
  throw std::logic_error("evaluate: unknown op");
}

Tape& same_tape(const Var& a, const Var& b) {
  if (!a.valid() || !b.valid() || &a.tape() != &b.tape())
    throw std::invalid_argument("operands live on different tapes");
  return a.tape();
}

Var make(Op op, const Var& a, double attr = 0.0) {
  if (!a.valid()) throw std::invalid_argument(std::string(op_name(op)) + ": invalid operand");
  Tape::Node n;
  n.op = op;
  n.inputs = {a.id(), 0};
  n.arity = 1;
  n.attr = attr;
  return a.tape().record(std::move(n));
}

Var make(Op op, const Var& a, const Var& b) {
  Tape& t = same_tape(a, b);
  Tape::Node n;
  n.op = op;
  n.inputs = {a.id(), b.id()};
  n.arity = 2;
  return t.record(std::move(n));
}

Var make_shaped(Op op, const Var& a, const Shape& target) {
  Tape::Node n;
  n.op = op;
  n.inputs = {a.id(), 0};
  n.arity = 1;
  n.target = target;
  return a.tape().record(std::move(n));
}

Var make_conv(Op op, const Var& a, const ConvGeometry& g) {
  Tape::Node n;
  n.op = op;
  n.inputs = {a.id(), 0};
  n.arity = 1;
  n.geometry = g;
  return a.tape().record(std::move(n));
}

// Sums a broadcast gradient back down to the operand's shape.
Var reduce_to(const Var& g, const Shape& shape) { return g.shape() == shape ? g : sum_to(g, shape); }

Tensor derivative_mask(const Tensor& x, double negative_slope) {
  return unary(x, [negative_slope](double v) { return v >= 0 ? 1.0 : negative_slope; });
}

// Vector-Jacobian product of node `id` with respect to input `slot`.
Var vjp(Tape& tape, std::size_t id, std::size_t slot, const Var& g) {
  const Tape::Node& n = tape.node(id);
  Var a = tape.var(n.inputs[0]);
  Var b = n.arity == 2 ? tape.var(n.inputs[1]) : Var{};
  Var out = tape.var(id);
  const Var& in = slot == 0 ? a : b;
  switch (n.op) {
    case Op::Leaf: break;
    case Op::Add: return reduce_to(g, in.shape());
    case Op::Sub: return reduce_to(slot == 0 ? g : -g, in.shape());
    case Op::Mul: return reduce_to(g * (slot == 0 ? b : a), in.shape());
    case Op::Div:
      if (slot == 0) return reduce_to(g / b, a.shape());
      return reduce_to(-(g * out) / b, b.shape());
    case Op::Neg: return -g;
    case Op::AddScalar: return g;
    case Op::MulScalar: return g * n.attr;
    case Op::MatMul: return slot == 0 ? matmul(g, transpose(b)) : matmul(transpose(a), g);
    case Op::Transpose: return transpose(g);
    case Op::Sum: return expand(g, a.shape());
    case Op::Mean: return expand(g * (1.0 / static_cast<double>(a.value().numel())), a.shape());
    case Op::Expand: return sum_to(g, a.shape());
    case Op::SumTo: return expand(g, a.shape());
    case Op::Abs: return mask_mul(g, unary(a.value(), [](double v) { return v >= 0 ? 1.0 : -1.0; }));
    case Op::Relu: return mask_mul(g, derivative_mask(a.value(), 0.0));
    case Op::LeakyRelu: return mask_mul(g, derivative_mask(a.value(), n.attr));
    case Op::Tanh: return g * (1.0 - square(out));
    case Op::Exp: return g * out;
    case Op::Log: return g / a;
    case Op::Sigmoid: return g * (out * (1.0 - out));
    case Op::Softplus: return g * sigmoid(a);
    case Op::Square: return g * a * 2.0;
    case Op::Sqrt: return g / out * 0.5;
    case Op::L2Norm:
    case Op::RowL2Norm: {
      // a / |a| with zero rows mapped to zero: shift the divisor to 1 there,
      // the numerator row is already zero.
      Tensor shift = unary(out.value(), [](double v) { return v == 0.0 ? 1.0 : 0.0; });
      Var ratio = g / (out + tape.constant(std::move(shift)));
      return expand(ratio, a.shape()) * a;
    }
    case Op::Reshape: return reshape(g, a.shape());
    case Op::MaskMul: return mask_mul(g, n.aux);
    case Op::Im2Col: return col2im(g, n.geometry);
    case Op::Col2Im: return im2col(g, n.geometry);
  }
  throw std::logic_error("vjp: unhandled op");
}

}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::Leaf: return "leaf";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Neg: return "neg";
    case Op::AddScalar: return "add_scalar";
    case Op::MulScalar: return "mul_scalar";
    case Op::MatMul: return "matmul";
    case Op::Transpose: return "transpose";
    case Op::Sum: return "sum";
    case Op::Mean: return "mean";
    case Op::Expand: return "expand";
    case Op::SumTo: return "sum_to";
    case Op::Abs: return "abs";
    case Op::Relu: return "relu";
    case Op::LeakyRelu: return "leaky_relu";
    case Op::Tanh: return "tanh";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sigmoid: return "sigmoid";
    case Op::Softplus: return "softplus";
    case Op::Square: return "square";
    case Op::Sqrt: return "sqrt";
    case Op::L2Norm: return "l2_norm";
    case Op::RowL2Norm: return "row_l2_norm";
    case Op::Reshape: return "reshape";
    case Op::MaskMul: return "mask_mul";
    case Op::Im2Col: return "im2col";
    case Op::Col2Im: return "col2im";
  }
  return "?";
}

const Tensor& Var::value() const {
  if (!tape_) throw std::invalid_argument("value of an empty Var");
  return tape_->node(id_).value;
}

Var Tape::variable(Tensor value) {
  Node n;
  n.requires_grad = true;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::var(std::size_t id) {
  if (id >= nodes_.size()) throw std::out_of_range("tape: node " + std::to_string(id) + " does not exist");
  return Var(this, id);
}

Var Tape::record(Node n) {
  const Tensor* a = n.arity > 0 ? &nodes_.at(n.inputs[0]).value : nullptr;
  const Tensor* b = n.arity > 1 ? &nodes_.at(n.inputs[1]).value : nullptr;
  n.value = evaluate(n, a, b);
  n.requires_grad = false;
  for (std::uint8_t k = 0; k < n.arity; ++k) n.requires_grad = n.requires_grad || nodes_[n.inputs[k]].requires_grad;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

std::vector<Tensor> Tape::replay() const {
  std::vector<Tensor> values;
  values.reserve(nodes_.size());
  for (const Node& n : nodes_) {
    if (n.op == Op::Leaf) {
      values.push_back(n.value);
      continue;
    }
    const Tensor* a = &values[n.inputs[0]];
    const Tensor* b = n.arity > 1 ? &values[n.inputs[1]] : nullptr;
    values.push_back(evaluate(n, a, b));
  }
  return values;
}

void Tape::truncate(std::size_t size) {
  if (size < nodes_.size()) nodes_.resize(size);
}

GradientMap::GradientMap(std::vector<std::size_t> ids, std::vector<Var> grads)
    : ids_(std::move(ids)), grads_(std::move(grads)) {}

const Var& GradientMap::at(const Var& v) const {
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (ids_[i] == v.id()) return grads_[i];
  throw std::out_of_range("gradient map: variable " + std::to_string(v.id()) + " was not requested");
}

GradientMap backward(const Var& output, std::span<const Var> wrt, bool create_graph) {
  if (!output.valid()) throw std::invalid_argument("backward: invalid output");
  Tape& tape = output.tape();
  if (!output.value().is_scalar())
    throw std::invalid_argument("backward: output must be scalar, got shape " + to_string(output.shape()));
  const std::size_t end = output.id() + 1;
  std::vector<char> needed(end, 0);
  std::size_t first = end;
  for (const Var& v : wrt) {
    if (!v.valid() || &v.tape() != &tape || v.id() >= tape.size())
      throw std::invalid_argument("backward: variable is not on the output's tape");
    if (!tape.node(v.id()).requires_grad)
      throw std::invalid_argument("backward: variable " + std::to_string(v.id()) + " is not differentiable");
    if (v.id() < end) {
      needed[v.id()] = 1;
      first = std::min(first, v.id());
    }
  }
  for (std::size_t i = first; i < end; ++i) {
    const Tape::Node& n = tape.node(i);
    if (needed[i] || !n.requires_grad) continue;
    for (std::uint8_t k = 0; k < n.arity; ++k)
      if (needed[n.inputs[k]]) needed[i] = 1;
  }

  const std::size_t mark = tape.size();
  std::vector<std::optional<Var>> grads(end);
  if (needed[output.id()]) grads[output.id()] = tape.constant(Tensor::filled(output.shape(), 1.0));
  for (std::size_t i = end; i-- > first;) {
    if (!needed[i] || !grads[i]) continue;
    const Tape::Node& n = tape.node(i);
    for (std::uint8_t k = 0; k < n.arity; ++k) {
      const std::size_t in = n.inputs[k];
      if (!needed[in]) continue;
      Var gi = vjp(tape, i, k, *grads[i]);
      grads[in] = grads[in] ? *grads[in] + gi : gi;
    }
  }

  std::vector<std::size_t> ids;
  std::vector<Var> result;
  if (create_graph) {
    for (const Var& v : wrt) {
      ids.push_back(v.id());
      result.push_back(v.id() < end && grads[v.id()] ? *grads[v.id()]
                                                     : tape.constant(Tensor::zeros(v.shape())));
    }
    return GradientMap(std::move(ids), std::move(result));
  }
  std::vector<Tensor> values;
  for (const Var& v : wrt)
    values.push_back(v.id() < end && grads[v.id()] ? grads[v.id()]->value() : Tensor::zeros(v.shape()));
  grads.clear();
  tape.truncate(mark);
  for (std::size_t i = 0; i < wrt.size(); ++i) {
    ids.push_back(wrt[i].id());
    result.push_back(tape.constant(std::move(values[i])));
  }
  return GradientMap(std::move(ids), std::move(result));
}

Var operator+(const Var& a, const Var& b) { return make(Op::Add, a, b); }
Var operator-(const Var& a, const Var& b) { return make(Op::Sub, a, b); }
Var operator*(const Var& a, const Var& b) { return make(Op::Mul, a, b); }
Var operator/(const Var& a, const Var& b) { return make(Op::Div, a, b); }
Var operator-(const Var& a) { return make(Op::Neg, a); }
Var operator+(const Var& a, double c) { return make(Op::AddScalar, a, c); }
Var operator+(double c, const Var& a) { return make(Op::AddScalar, a, c); }
Var operator-(const Var& a, double c) { return make(Op::AddScalar, a, -c); }
Var operator-(double c, const Var& a) { return make(Op::AddScalar, -a, c); }
Var operator*(const Var& a, double c) { return make(Op::MulScalar, a, c); }
Var operator*(double c, const Var& a) { return make(Op::MulScalar, a, c); }
Var operator/(const Var& a, double c) { return make(Op::MulScalar, a, 1.0 / c); }

Var matmul(const Var& a, const Var& b) { return make(Op::MatMul, a, b); }
Var transpose(const Var& a) { return make(Op::Transpose, a); }
Var sum(const Var& a) { return make(Op::Sum, a); }
Var mean(const Var& a) { return make(Op::Mean, a); }
Var expand(const Var& a, const Shape& target) { return make_shaped(Op::Expand, a, target); }
Var sum_to(const Var& a, const Shape& target) { return make_shaped(Op::SumTo, a, target); }
Var abs(const Var& a) { return make(Op::Abs, a); }
Var relu(const Var& a) { return make(Op::Relu, a); }
Var leaky_relu(const Var& a, double slope) { return make(Op::LeakyRelu, a, slope); }
Var tanh(const Var& a) { return make(Op::Tanh, a); }
Var exp(const Var& a) { return make(Op::Exp, a); }
Var log(const Var& a) { return make(Op::Log, a); }
Var sigmoid(const Var& a) { return make(Op::Sigmoid, a); }
Var softplus(const Var& a) { return make(Op::Softplus, a); }
Var square(const Var& a) { return make(Op::Square, a); }
Var sqrt(const Var& a) { return make(Op::Sqrt, a); }
Var l2_norm(const Var& a) { return make(Op::L2Norm, a); }
Var row_l2_norm(const Var& a) { return make(Op::RowL2Norm, a); }
Var reshape(const Var& a, const Shape& shape) { return make_shaped(Op::Reshape, a, shape); }
Var im2col(const Var& a, const ConvGeometry& g) { return make_conv(Op::Im2Col, a, g); }
Var col2im(const Var& a, const ConvGeometry& g) { return make_conv(Op::Col2Im, a, g); }

Var mask_mul(const Var& a, Tensor mask) {
  Tape::Node n;
  n.op = Op::MaskMul;
  n.inputs = {a.id(), 0};
  n.arity = 1;
  n.aux = std::move(mask);
  return a.tape().record(std::move(n));
}

Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f, const Tensor& x, double h) {
  if (!(h > 0)) throw std::invalid_argument("finite_difference_gradient: step must be positive");
  Tensor grad = Tensor::zeros(x.shape());
  Tensor probe = x;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down))
      throw std::domain_error("finite_difference_gradient: non-finite value at coordinate " + std::to_string(i));
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace pgn::ad
