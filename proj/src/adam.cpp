#include <cmath>

#include "pgn/train.hpp"

namespace pgn::train {

AdamState AdamState::zeros_like(const nn::ParameterStore& params, std::span<const std::string> names) {
  AdamState s;
  for (const std::string& n : names) {
    s.m.push_back(Tensor::zeros(params.get(n).shape()));
    s.v.push_back(Tensor::zeros(params.get(n).shape()));
  }
  return s;
}

bool AdamState::bit_equal(const AdamState& other) const {
  if (t != other.t || m.size() != other.m.size() || v.size() != other.v.size()) return false;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (!m[i].bit_equal(other.m[i]) || !v[i].bit_equal(other.v[i])) return false;
  return true;
}

void adam_step(nn::ParameterStore& params, std::span<const std::string> names, std::span<const Tensor> grads,
               AdamState& state, double lr, double beta1, double beta2, double eps) {
  if (names.size() != grads.size() || names.size() != state.m.size())
    throw std::invalid_argument("adam_step: parameter, gradient and state counts differ");
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (grads[i].shape() != params.get(names[i]).shape())
      throw ShapeError::mismatch("adam_step " + names[i], params.get(names[i]).shape(), grads[i].shape());
    if (!grads[i].all_finite()) throw std::domain_error("adam_step: non-finite gradient for " + names[i]);
  }
  state.t += 1;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < names.size(); ++i) {
    Tensor& p = params.get(names[i]);
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    const Tensor& g = grads[i];
    for (std::size_t j = 0; j < p.numel(); ++j) {
      m[j] = beta1 * m[j] + (1.0 - beta1) * g[j];
      v[j] = beta2 * v[j] + (1.0 - beta2) * g[j] * g[j];
      p[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps);
    }
  }
}

void ema_update(nn::ParameterStore& ema, const nn::ParameterStore& current, double decay) {
  for (auto& e : ema) {
    const Tensor& cur = current.get(e.name);
    if (cur.shape() != e.value.shape()) throw ShapeError::mismatch("ema_update " + e.name, e.value.shape(), cur.shape());
    for (std::size_t j = 0; j < cur.numel(); ++j) e.value[j] = decay * e.value[j] + (1.0 - decay) * cur[j];
  }
}

}  // namespace pgn::train
