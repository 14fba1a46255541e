#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pgn/autodiff.hpp"
#include "pgn/tensor.hpp"

namespace pgn::nn {

enum class Role { Generator, Discriminator };
enum class Activation { Relu, LeakyRelu, Tanh };

struct AffineLayer {
  std::size_t in = 0;
  std::size_t out = 0;
};

/// Convolution over NHWC activations. Weights are stored as (out_channels, kernel*kernel*in_channels).
struct Conv2dLayer {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t padding = 1;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t out_height() const { return (height + 2 * padding - kernel) / stride + 1; }
  std::size_t out_width() const { return (width + 2 * padding - kernel) / stride + 1; }
  ad::ConvGeometry geometry(std::size_t batch) const;
};

struct ActivationLayer {
  Activation kind = Activation::Relu;
  double slope = 0.0;  // leaky_relu negative slope
};

/// Changes the per-sample shape; element count is preserved.
struct ReshapeLayer {
  Shape to;
};

using LayerSpec = std::variant<AffineLayer, Conv2dLayer, ActivationLayer, ReshapeLayer>;

struct NetworkSpec {
  Role role = Role::Discriminator;
  Shape input;  // per-sample shape
  std::vector<LayerSpec> layers;

  /// Per-sample output shape. Throws std::invalid_argument naming the first
  /// incompatible layer, a discriminator whose output is not a single value,
  /// or a discriminator activation that is not piecewise linear.
  Shape output_shape() const;
  void validate() const { (void)output_shape(); }
  std::size_t input_size() const { return numel_of(input); }
  std::size_t output_size() const { return numel_of(output_shape()); }
};

/// Fully connected network: in -> hidden... -> out with `hidden_act` between
/// affine layers and an optional activation after the last one.
NetworkSpec make_mlp(Role role, std::size_t in, std::span<const std::size_t> hidden, std::size_t out,
                     ActivationLayer hidden_act, std::optional<ActivationLayer> output_act = std::nullopt);

/// Two stride-2 convolutions followed by an affine read-out, for C×H×W images.
NetworkSpec make_conv_discriminator(std::size_t channels, std::size_t height, std::size_t width,
                                    std::size_t base_channels, double slope);

std::string weight_name(std::size_t layer);
std::string bias_name(std::size_t layer);
std::string power_vector_name(std::size_t layer);

/// Named tensors in insertion order.
class ParameterStore {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    bool operator==(const Entry&) const = default;
  };

  void add(std::string name, Tensor value);
  bool contains(const std::string& name) const;
  const Tensor& get(const std::string& name) const;
  Tensor& get(const std::string& name);

  std::size_t size() const { return entries_.size(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  const Entry& operator[](std::size_t i) const { return entries_.at(i); }
  Entry& operator[](std::size_t i) { return entries_.at(i); }

  bool bit_equal(const ParameterStore& other) const;
  bool operator==(const ParameterStore&) const = default;

 private:
  std::vector<Entry> entries_;
};

/// Kaiming-normal weights (variance 2/fan_in) and zero biases. Deterministic in the seed.
ParameterStore kaiming_init(const NetworkSpec& spec, std::uint64_t seed);

/// Names of trainable tensors (weights and biases, not power-iteration vectors).
std::vector<std::string> trainable_names(const NetworkSpec& spec);

/// A parameter store placed on a tape.
struct BoundParameters {
  std::vector<std::string> names;
  std::vector<ad::Var> vars;

  const ad::Var& get(const std::string& name) const;
  /// Vars of the trainable entries, in trainable_names order.
  std::vector<ad::Var> trainable(const NetworkSpec& spec) const;
};

/// Records every tensor of `params` as a leaf: variables when `trainable`, constants otherwise.
BoundParameters bind(ad::Tape& tape, const ParameterStore& params, bool trainable);

struct ForwardOptions {
  /// Divide each weight by sigma = u^T W v, with u read from the store's power
  /// vectors and v = normalize(W^T u), both held constant on the tape.
  bool spectral_norm = false;
};

/// Applies the network to a batch `x` of shape (batch, input...). Every op is
/// recorded on x's tape. Throws std::invalid_argument naming the layer index on
/// dimension mismatch.
ad::Var net_forward(const NetworkSpec& spec, const BoundParameters& params, const ad::Var& x,
                    const ForwardOptions& options = {});

/// Convenience: forward pass on a scratch tape, returning the output values.
Tensor evaluate(const NetworkSpec& spec, const ParameterStore& params, const Tensor& x,
                const ForwardOptions& options = {});

}  // namespace pgn::nn
