#include "pgn/nn.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "pgn/spectral.hpp"

namespace pgn::nn {

namespace {

[[noreturn]] void layer_error(std::size_t k, const std::string& what) {
  throw std::invalid_argument("layer " + std::to_string(k) + ": " + what);
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

ad::ConvGeometry Conv2dLayer::geometry(std::size_t batch) const {
  return {batch, height, width, in_channels, kernel, stride, padding};
}

Shape NetworkSpec::output_shape() const {
  Shape cur = input;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    std::visit(overloaded{
                   [&](const AffineLayer& l) {
                     if (cur.size() != 1 || cur[0] != l.in)
                       layer_error(k, "affine expects " + std::to_string(l.in) + " inputs, got " + to_string(cur));
                     cur = {l.out};
                   },
                   [&](const Conv2dLayer& l) {
                     const Shape want{l.height, l.width, l.in_channels};
                     if (cur != want) layer_error(k, "conv2d expects " + to_string(want) + ", got " + to_string(cur));
                     if (l.kernel == 0 || l.stride == 0 || l.height + 2 * l.padding < l.kernel ||
                         l.width + 2 * l.padding < l.kernel)
                       layer_error(k, "conv2d geometry is invalid");
                     cur = {l.out_height(), l.out_width(), l.out_channels};
                   },
                   [&](const ActivationLayer& l) {
                     if (role == Role::Discriminator && l.kind == Activation::Tanh)
                       layer_error(k, "discriminator activations must be piecewise linear");
                     if (l.kind == Activation::LeakyRelu && (l.slope < 0 || l.slope > 1))
                       layer_error(k, "leaky_relu slope must lie in [0, 1]");
                   },
                   [&](const ReshapeLayer& l) {
                     if (numel_of(l.to) != numel_of(cur))
                       layer_error(k, "reshape " + to_string(cur) + " -> " + to_string(l.to) + " changes size");
                     cur = l.to;
                   },
               },
               layers[k]);
  }
  if (role == Role::Discriminator && numel_of(cur) != 1)
    throw std::invalid_argument("discriminator output must be a single value, got " + to_string(cur));
  return cur;
}

NetworkSpec make_mlp(Role role, std::size_t in, std::span<const std::size_t> hidden, std::size_t out,
                     ActivationLayer hidden_act, std::optional<ActivationLayer> output_act) {
  NetworkSpec spec;
  spec.role = role;
  spec.input = {in};
  std::size_t prev = in;
  for (std::size_t h : hidden) {
    spec.layers.push_back(AffineLayer{prev, h});
    spec.layers.push_back(hidden_act);
    prev = h;
  }
  spec.layers.push_back(AffineLayer{prev, out});
  if (output_act) spec.layers.push_back(*output_act);
  spec.validate();
  return spec;
}

NetworkSpec make_conv_discriminator(std::size_t channels, std::size_t height, std::size_t width,
                                    std::size_t base_channels, double slope) {
  NetworkSpec spec;
  spec.role = Role::Discriminator;
  spec.input = {height, width, channels};
  const ActivationLayer act{Activation::LeakyRelu, slope};
  Conv2dLayer c1{channels, base_channels, 3, 2, 1, height, width};
  Conv2dLayer c2{base_channels, 2 * base_channels, 3, 2, 1, c1.out_height(), c1.out_width()};
  spec.layers = {c1, act, c2, act};
  const std::size_t flat = c2.out_height() * c2.out_width() * c2.out_channels;
  spec.layers.push_back(ReshapeLayer{{flat}});
  spec.layers.push_back(AffineLayer{flat, 1});
  spec.validate();
  return spec;
}

std::string weight_name(std::size_t layer) { return "L" + std::to_string(layer) + ".weight"; }
std::string bias_name(std::size_t layer) { return "L" + std::to_string(layer) + ".bias"; }
std::string power_vector_name(std::size_t layer) { return "L" + std::to_string(layer) + ".u"; }

void ParameterStore::add(std::string name, Tensor value) {
  if (contains(name)) throw std::invalid_argument("parameter store: duplicate name " + name);
  entries_.push_back({std::move(name), std::move(value)});
}

bool ParameterStore::contains(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.name == name; });
}

const Tensor& ParameterStore::get(const std::string& name) const {
  for (const Entry& e : entries_)
    if (e.name == name) return e.value;
  throw std::out_of_range("parameter store: no tensor named " + name);
}

Tensor& ParameterStore::get(const std::string& name) {
  return const_cast<Tensor&>(static_cast<const ParameterStore&>(*this).get(name));
}

bool ParameterStore::bit_equal(const ParameterStore& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].name != other.entries_[i].name || !entries_[i].value.bit_equal(other.entries_[i].value))
      return false;
  return true;
}

ParameterStore kaiming_init(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  ParameterStore store;
  for (std::size_t k = 0; k < spec.layers.size(); ++k) {
    std::size_t rows = 0, fan_in = 0;
    if (const auto* a = std::get_if<AffineLayer>(&spec.layers[k])) {
      rows = a->out;
      fan_in = a->in;
    } else if (const auto* c = std::get_if<Conv2dLayer>(&spec.layers[k])) {
      rows = c->out_channels;
      fan_in = c->kernel * c->kernel * c->in_channels;
    } else {
      continue;
    }
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    Tensor w = Tensor::zeros({rows, fan_in});
    for (double& v : w.data()) v = normal(rng);
    store.add(weight_name(k), std::move(w));
    store.add(bias_name(k), Tensor::zeros({rows}));
  }
  return store;
}

std::vector<std::string> trainable_names(const NetworkSpec& spec) {
  std::vector<std::string> names;
  for (std::size_t k : weighted_layers(spec)) {
    names.push_back(weight_name(k));
    names.push_back(bias_name(k));
  }
  return names;
}

const ad::Var& BoundParameters::get(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return vars[i];
  throw std::out_of_range("bound parameters: no tensor named " + name);
}

std::vector<ad::Var> BoundParameters::trainable(const NetworkSpec& spec) const {
  std::vector<ad::Var> out;
  for (const std::string& n : trainable_names(spec)) out.push_back(get(n));
  return out;
}

BoundParameters bind(ad::Tape& tape, const ParameterStore& params, bool trainable) {
  BoundParameters b;
  for (const auto& e : params) {
    const bool is_vector = e.name.ends_with(".u");
    b.names.push_back(e.name);
    b.vars.push_back(trainable && !is_vector ? tape.variable(e.value) : tape.constant(e.value));
  }
  return b;
}

namespace {

ad::Var layer_weight(const BoundParameters& params, std::size_t k, const ForwardOptions& options) {
  ad::Var w = params.get(weight_name(k));
  if (!options.spectral_norm) return w;
  const Tensor& u = params.get(power_vector_name(k)).value();
  const Tensor v = right_vector(w.value(), u);
  // sigma = u^T W v = sum(W .* u v^T)
  const std::size_t rows = w.value().rows(), cols = w.value().cols();
  Tensor outer = Tensor::zeros({rows, cols});
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) outer[i * cols + j] = u[i] * v[j];
  ad::Var sigma = ad::sum(ad::mask_mul(w, std::move(outer)));
  if (sigma.item() == 0.0) return w;
  return w / sigma;
}

ad::Var add_bias(const ad::Var& y, const ad::Var& bias) {
  const std::size_t out = bias.value().numel();
  return y + ad::expand(ad::reshape(bias, {1, out}), y.shape());
}

}  // namespace

ad::Var net_forward(const NetworkSpec& spec, const BoundParameters& params, const ad::Var& x,
                    const ForwardOptions& options) {
  spec.validate();
  if (x.shape().empty()) throw std::invalid_argument("net_forward: input has no batch dimension");
  const std::size_t batch = x.shape()[0];
  Shape expected{batch};
  expected.insert(expected.end(), spec.input.begin(), spec.input.end());
  if (x.shape() != expected)
    throw std::invalid_argument("layer 0: input shape " + to_string(x.shape()) + " does not match " +
                                to_string(expected));
  ad::Var h = x;
  for (std::size_t k = 0; k < spec.layers.size(); ++k) {
    const LayerSpec& layer = spec.layers[k];
    if (const auto* a = std::get_if<AffineLayer>(&layer)) {
      (void)a;
      ad::Var w = layer_weight(params, k, options);
      h = add_bias(ad::matmul(h, ad::transpose(w)), params.get(bias_name(k)));
    } else if (const auto* c = std::get_if<Conv2dLayer>(&layer)) {
      ad::Var w = layer_weight(params, k, options);
      ad::Var cols = ad::im2col(h, c->geometry(batch));
      ad::Var y = add_bias(ad::matmul(cols, ad::transpose(w)), params.get(bias_name(k)));
      h = ad::reshape(y, {batch, c->out_height(), c->out_width(), c->out_channels});
    } else if (const auto* act = std::get_if<ActivationLayer>(&layer)) {
      switch (act->kind) {
        case Activation::Relu: h = ad::relu(h); break;
        case Activation::LeakyRelu: h = ad::leaky_relu(h, act->slope); break;
        case Activation::Tanh: h = ad::tanh(h); break;
      }
    } else if (const auto* r = std::get_if<ReshapeLayer>(&layer)) {
      Shape to{batch};
      to.insert(to.end(), r->to.begin(), r->to.end());
      h = ad::reshape(h, to);
    }
  }
  return h;
}

Tensor evaluate(const NetworkSpec& spec, const ParameterStore& params, const Tensor& x,
                const ForwardOptions& options) {
  ad::Tape tape;
  BoundParameters bound = bind(tape, params, false);
  return net_forward(spec, bound, tape.constant(x), options).value();
}

}  // namespace pgn::nn
