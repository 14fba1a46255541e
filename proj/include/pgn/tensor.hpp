#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pgn {

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);
std::size_t numel_of(const Shape& shape);

/// Raised when operand shapes do not conform. The message names both shapes.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  static ShapeError mismatch(const std::string& op, const Shape& a, const Shape& b);
};

/// Dense row-major array of doubles. Plain value type: copies are deep.
///
/// A tensor with a single element counts as a scalar for broadcasting,
/// whatever its rank.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape);
  static Tensor filled(Shape shape, double value);
  static Tensor scalar(double value);
  static Tensor vector(std::initializer_list<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t numel() const { return data_.size(); }
  bool is_scalar() const { return data_.size() == 1; }

  /// Extent of dimension 0 / 1 of a 2-D tensor.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double at(std::size_t r, std::size_t c) const;
  double& at(std::size_t r, std::size_t c);

  /// Value of a single-element tensor.
  double item() const;

  Tensor reshaped(Shape shape) const;

  bool all_finite() const;

  /// Bitwise equality of shape and elements (NaN payloads included).
  bool bit_equal(const Tensor& other) const;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

double max_abs_diff(const Tensor& a, const Tensor& b);
double l2_norm(std::span<const double> v);

}  // namespace pgn
