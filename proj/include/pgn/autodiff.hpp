#pragma once

// Reverse-mode differentiation over a recorded tape.
//
// Every operation on a Var appends a node to the Var's tape. backward() walks
// the tape in reverse and expresses each vector-Jacobian product with the same
// Var operations, so with create_graph set the gradient is itself recorded and
// can be differentiated again. Without create_graph the nodes produced by the
// backward sweep are discarded and the gradients come back as constants.
//
// A tape is single-writer. Use one tape per thread.

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pgn/tensor.hpp"

namespace pgn::ad {

enum class Op : std::uint8_t {
  Leaf,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  AddScalar,
  MulScalar,
  MatMul,
  Transpose,
  Sum,
  Mean,
  Expand,
  SumTo,
  Abs,
  Relu,
  LeakyRelu,
  Tanh,
  Exp,
  Log,
  Sigmoid,
  Softplus,
  Square,
  Sqrt,
  L2Norm,
  RowL2Norm,
  Reshape,
  MaskMul,
  Im2Col,
  Col2Im,
};

const char* op_name(Op op);

/// Geometry of a 2-D convolution over NHWC activations.
struct ConvGeometry {
  std::size_t batch = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;

  std::size_t out_height() const { return (height + 2 * padding - kernel) / stride + 1; }
  std::size_t out_width() const { return (width + 2 * padding - kernel) / stride + 1; }
  std::size_t patch_size() const { return kernel * kernel * channels; }
};

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the node exists.
class Var {
 public:
  Var() = default;

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  double item() const { return value().item(); }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  struct Node {
    Op op = Op::Leaf;
    std::array<std::size_t, 2> inputs{};
    std::uint8_t arity = 0;
    bool requires_grad = false;
    double attr = 0.0;
    Tensor value;
    Tensor aux;           // constant operand (MaskMul)
    Shape target;         // Expand / SumTo / Reshape destination
    ConvGeometry geometry;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Differentiable leaf.
  Var variable(Tensor value);
  /// Non-differentiable leaf.
  Var constant(Tensor value);

  std::size_t size() const { return nodes_.size(); }
  const Node& node(std::size_t id) const { return nodes_.at(id); }
  Var var(std::size_t id);

  /// Recomputes every non-leaf node from its recorded inputs.
  std::vector<Tensor> replay() const;

  /// Drops every node with id >= size. Vars pointing past the end become dangling.
  void truncate(std::size_t size);

  Var record(Node node);

 private:
  std::deque<Node> nodes_;
};

/// Gradients for a list of requested variables, in request order.
class GradientMap {
 public:
  GradientMap() = default;
  GradientMap(std::vector<std::size_t> ids, std::vector<Var> grads);

  std::size_t size() const { return grads_.size(); }
  const Var& operator[](std::size_t i) const { return grads_.at(i); }
  /// Gradient for `v`; throws std::out_of_range if `v` was not requested.
  const Var& at(const Var& v) const;

 private:
  std::vector<std::size_t> ids_;
  std::vector<Var> grads_;
};

/// d output / d v for every v in wrt. `output` must hold one element.
///
/// Throws std::invalid_argument for a non-scalar output, a variable from
/// another tape or past the output, or a non-differentiable variable.
GradientMap backward(const Var& output, std::span<const Var> wrt, bool create_graph = false);

// Elementwise ops accept equal shapes, or a single-element operand that is
// broadcast against the other side.
Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);
Var operator-(const Var& a);
Var operator+(const Var& a, double c);
Var operator+(double c, const Var& a);
Var operator-(const Var& a, double c);
Var operator-(double c, const Var& a);
Var operator*(const Var& a, double c);
Var operator*(double c, const Var& a);
Var operator/(const Var& a, double c);

Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var sum(const Var& a);
Var mean(const Var& a);
/// Broadcasts a scalar, (r,1) or (1,c) tensor to a 2-D target (or a scalar to any shape).
Var expand(const Var& a, const Shape& target);
/// Adjoint of expand: sums over the broadcast dimensions.
Var sum_to(const Var& a, const Shape& target);
Var abs(const Var& a);
Var relu(const Var& a);
Var leaky_relu(const Var& a, double slope);
Var tanh(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var sigmoid(const Var& a);
Var softplus(const Var& a);
Var square(const Var& a);
Var sqrt(const Var& a);
/// Euclidean norm of all elements. The derivative at the zero tensor is zero.
Var l2_norm(const Var& a);
/// Per-row Euclidean norm of a 2-D tensor, shape (rows, 1).
Var row_l2_norm(const Var& a);
Var reshape(const Var& a, const Shape& shape);
/// Elementwise product with a constant tensor of the same shape.
Var mask_mul(const Var& a, Tensor mask);
/// (B,H,W,C) -> (B*OH*OW, K*K*C) patch matrix, zero padded.
Var im2col(const Var& a, const ConvGeometry& g);
/// Adjoint of im2col: scatter-adds patches back into (B,H,W,C).
Var col2im(const Var& a, const ConvGeometry& g);

/// Central differences (f(x+h e_i) - f(x-h e_i)) / 2h for every coordinate.
/// Throws std::domain_error naming the coordinate when f is non-finite.
Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f, const Tensor& x, double h);

}  // namespace pgn::ad
