#include "pgn/normalizers.hpp"

#include <stdexcept>

namespace pgn::norm {

void NormalizerKind::validate() const {
  if (type == NormalizerType::GN && gn_zeta && !(*gn_zeta > 0))
    throw std::invalid_argument("gn: constant zeta must be positive");
  if (type == NormalizerType::GP) {
    if (!(gp_lambda > 0)) throw std::invalid_argument("gp: lambda must be positive");
    if (gp_target != 0 && gp_target != 1) throw std::invalid_argument("gp: target must be 0 or 1");
  }
}

NormalizerKind pgn() { return {}; }
NormalizerKind gn(std::optional<double> zeta) {
  NormalizerKind k{NormalizerType::GN, zeta};
  k.validate();
  return k;
}
NormalizerKind sn() {
  NormalizerKind k;
  k.type = NormalizerType::SN;
  return k;
}
NormalizerKind gp(int target, double lambda) {
  NormalizerKind k{NormalizerType::GP, std::nullopt, target, lambda};
  k.validate();
  return k;
}
NormalizerKind none() {
  NormalizerKind k;
  k.type = NormalizerType::None;
  return k;
}

std::string to_string(NormalizerType t) {
  switch (t) {
    case NormalizerType::None: return "none";
    case NormalizerType::PGN: return "pgn";
    case NormalizerType::GN: return "gn";
    case NormalizerType::SN: return "sn";
    case NormalizerType::GP: return "gp";
  }
  return "?";
}

NormalizerType parse_normalizer(const std::string& s) {
  if (s == "none") return NormalizerType::None;
  if (s == "pgn") return NormalizerType::PGN;
  if (s == "gn") return NormalizerType::GN;
  if (s == "sn") return NormalizerType::SN;
  if (s == "gp") return NormalizerType::GP;
  throw std::invalid_argument("unknown normalizer '" + s + "'");
}

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::Hinge: return "hinge";
    case LossKind::NonSaturating: return "nonsaturating";
    case LossKind::Wasserstein: return "wasserstein";
  }
  return "?";
}

LossKind parse_loss(const std::string& s) {
  if (s == "hinge") return LossKind::Hinge;
  if (s == "nonsaturating") return LossKind::NonSaturating;
  if (s == "wasserstein") return LossKind::Wasserstein;
  throw std::invalid_argument("unknown loss '" + s + "'");
}

ad::Var pgn_normalize(const ad::Var& f, const ad::Var& grad_norm, double eps) {
  ad::Var numerator = 1.0 - f;
  return numerator / (grad_norm + ad::abs(numerator) + eps);
}

ad::Var gn_normalize(const ad::Var& f, const ad::Var& grad_norm, std::optional<double> zeta, double eps) {
  if (zeta) return f / (grad_norm + *zeta);
  return f / (grad_norm + ad::abs(f) + eps);
}

ad::Var input_grad_norm(const ad::Var& raw, const ad::Var& x, bool create_graph) {
  const ad::Var wrt[] = {x};
  ad::Var g = ad::backward(ad::sum(raw), wrt, create_graph)[0];
  const std::size_t batch = x.shape()[0];
  return ad::row_l2_norm(ad::reshape(g, {batch, x.value().numel() / batch}));
}

NormalizedOutput normalize(const NormalizerKind& kind, const Discriminator& d, const ad::Var& x) {
  NormalizedOutput out;
  out.raw = d(x);
  switch (kind.type) {
    case NormalizerType::PGN:
      out.grad_norm = input_grad_norm(out.raw, x);
      out.value = pgn_normalize(out.raw, out.grad_norm);
      break;
    case NormalizerType::GN:
      out.grad_norm = input_grad_norm(out.raw, x);
      out.value = gn_normalize(out.raw, out.grad_norm, kind.gn_zeta);
      break;
    default:
      out.value = out.raw;
      break;
  }
  return out;
}

ad::Var gradient_penalty(const ad::Var& grad_norm, int target, double lambda) {
  return ad::mean(ad::square(grad_norm - static_cast<double>(target))) * lambda;
}

ad::Var d_loss(LossKind kind, const ad::Var& real, const ad::Var& fake) {
  switch (kind) {
    case LossKind::Hinge: return ad::mean(ad::relu(1.0 - real)) + ad::mean(ad::relu(1.0 + fake));
    case LossKind::NonSaturating: return ad::mean(ad::softplus(-real)) + ad::mean(ad::softplus(fake));
    case LossKind::Wasserstein: return ad::mean(fake) - ad::mean(real);
  }
  throw std::logic_error("d_loss: unknown loss");
}

ad::Var g_loss(LossKind kind, const ad::Var& fake) {
  // -log sigmoid(t) = softplus(-t)
  if (kind == LossKind::NonSaturating) return ad::mean(ad::softplus(-fake));
  return -ad::mean(fake);
}

Tensor augment_images(const Tensor& images, std::mt19937_64& rng, double flip_p, double shift_fraction) {
  if (images.rank() != 4) throw std::invalid_argument("augment_images: expected (batch, height, width, channels)");
  const std::size_t n = images.shape()[0], h = images.shape()[1], w = images.shape()[2], c = images.shape()[3];
  const long max_dy = static_cast<long>(shift_fraction * static_cast<double>(h));
  const long max_dx = static_cast<long>(shift_fraction * static_cast<double>(w));
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<long> shift_y(-max_dy, max_dy), shift_x(-max_dx, max_dx);
  Tensor out = Tensor::zeros(images.shape());
  for (std::size_t b = 0; b < n; ++b) {
    const bool flip = coin(rng) < flip_p;
    const long dy = shift_y(rng), dx = shift_x(rng);
    for (long y = 0; y < static_cast<long>(h); ++y)
      for (long x = 0; x < static_cast<long>(w); ++x) {
        const long sy = y - dy;
        long sx = x - dx;
        if (sy < 0 || sx < 0 || sy >= static_cast<long>(h) || sx >= static_cast<long>(w)) continue;
        if (flip) sx = static_cast<long>(w) - 1 - sx;
        for (std::size_t ch = 0; ch < c; ++ch)
          out[((b * h + y) * w + x) * c + ch] = images[((b * h + sy) * w + sx) * c + ch];
      }
  }
  return out;
}

ad::Var consistency_regularization(ad::Tape& tape, const std::function<ad::Var(const ad::Var&)>& normalized_d,
                                   const Tensor& x_real, const std::function<Tensor(const Tensor&)>& augment,
                                   double lambda) {
  if (x_real.rank() != 4)
    throw std::invalid_argument("consistency_regularization: augmentations need image batches, got shape " +
                                pgn::to_string(x_real.shape()));
  ad::Var clean = normalized_d(tape.variable(x_real));
  ad::Var augmented = normalized_d(tape.variable(augment(x_real)));
  return ad::mean(ad::square(clean - augmented)) * lambda;
}

}  // namespace pgn::norm
