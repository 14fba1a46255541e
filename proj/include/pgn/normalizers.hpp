#pragma once

// Discriminator constraints and adversarial losses.
//
// Penalty gradient normalization maps the raw discriminator output f to
//
//     (1 - f) / (|grad_x f| + |1 - f| + eps)
//
// where |grad_x f| is computed per sample and kept on the tape, so training
// differentiates through the gradient norm as well. For networks with only
// piecewise-linear activations both the value and its input gradient are
// bounded by 1 in magnitude.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>

#include "pgn/autodiff.hpp"

namespace pgn::norm {

inline constexpr double kDenominatorEps = 1e-8;

enum class NormalizerType { None, PGN, GN, SN, GP };

struct NormalizerKind {
  NormalizerType type = NormalizerType::PGN;
  /// GN only: constant zeta; nullopt selects zeta = |f|.
  std::optional<double> gn_zeta;
  /// GP only: target gradient norm (0 or 1) and penalty weight.
  int gp_target = 1;
  double gp_lambda = 10.0;

  /// Throws std::invalid_argument when lambda <= 0, zeta <= 0 or the GP target is not 0/1.
  void validate() const;
};

NormalizerKind pgn();
NormalizerKind gn(std::optional<double> zeta = std::nullopt);
NormalizerKind sn();
NormalizerKind gp(int target, double lambda);
NormalizerKind none();

/// Type names: none, pgn, gn, sn, gp. Config files spell GP with its target, gp0 or gp1.
std::string to_string(NormalizerType t);
NormalizerType parse_normalizer(const std::string& s);

enum class LossKind { Hinge, NonSaturating, Wasserstein };
std::string to_string(LossKind k);
LossKind parse_loss(const std::string& s);

/// Raw discriminator applied to a batch on the batch's tape, result shape (batch, 1).
using Discriminator = std::function<ad::Var(const ad::Var& x)>;

struct NormalizedOutput {
  ad::Var value;      // what the loss sees, (batch, 1)
  ad::Var grad_norm;  // per-sample |grad_x f|, (batch, 1); empty for SN/GP/None
  ad::Var raw;        // f, (batch, 1)
};

ad::Var pgn_normalize(const ad::Var& f, const ad::Var& grad_norm, double eps = kDenominatorEps);
ad::Var gn_normalize(const ad::Var& f, const ad::Var& grad_norm, std::optional<double> zeta = std::nullopt,
                     double eps = kDenominatorEps);

/// Per-sample norm of d f_i / d x_i. `x` must be differentiable; `raw` is (batch, 1).
/// Samples must not interact inside the network.
ad::Var input_grad_norm(const ad::Var& raw, const ad::Var& x, bool create_graph = true);

/// Runs `d` on `x` and applies the normalizer. PGN and GN record the gradient norm with
/// create_graph so the result stays trainable; other kinds return the raw output.
NormalizedOutput normalize(const NormalizerKind& kind, const Discriminator& d, const ad::Var& x);

/// lambda * mean((grad_norm - target)^2)
ad::Var gradient_penalty(const ad::Var& grad_norm, int target, double lambda);

ad::Var d_loss(LossKind kind, const ad::Var& real, const ad::Var& fake);
ad::Var g_loss(LossKind kind, const ad::Var& fake);

/// Random horizontal flip (probability `flip_p`) and an independent integer
/// translation of up to `shift_fraction` * size pixels per axis, zero filled.
/// Images are (batch, height, width, channels).
Tensor augment_images(const Tensor& images, std::mt19937_64& rng, double flip_p = 0.5, double shift_fraction = 0.2);

/// lambda * mean((D(x) - D(augment(x)))^2) with D the normalized discriminator.
/// Throws std::invalid_argument when x is not a 4-D image batch.
ad::Var consistency_regularization(ad::Tape& tape, const std::function<ad::Var(const ad::Var&)>& normalized_d,
                                   const Tensor& x_real, const std::function<Tensor(const Tensor&)>& augment,
                                   double lambda);

}  // namespace pgn::norm
