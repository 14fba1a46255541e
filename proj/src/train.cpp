#include "pgn/train.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <spdlog/spdlog.h>

#include "pgn/metrics.hpp"
#include "pgn/spectral.hpp"

namespace pgn::train {

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("train config: " + what); };
  if (!(alpha_g > 0)) fail("alpha_g must be positive");
  if (!(alpha_d > 0)) fail("alpha_d must be positive");
  if (!(beta1 >= 0 && beta1 < 1)) fail("beta1 must lie in [0, 1)");
  if (!(beta2 >= 0 && beta2 < 1)) fail("beta2 must lie in [0, 1)");
  if (!(adam_eps > 0)) fail("adam_eps must be positive");
  if (batch_size < 1) fail("batch_size must be at least 1");
  if (n_dis < 1) fail("n_dis must be at least 1");
  if (!(ema_decay >= 0 && ema_decay < 1)) fail("ema_decay must lie in [0, 1)");
  if (!(lambda_cr >= 0)) fail("lambda_cr must be non-negative");
  if (eval_samples < 2) fail("eval_samples must be at least 2");
  normalizer.validate();
}

std::string metrics_header() { return "step,loss_d,loss_g,grad_norm_mean,grad_norm_max,frechet,mode_coverage"; }

std::string format_row(const MetricsRow& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%" PRIu64 ",%.10g,%.10g,%.10g,%.10g,%.10g,%zu", r.step, r.loss_d, r.loss_g,
                r.grad_norm_mean, r.grad_norm_max, r.frechet, r.mode_coverage);
  return buf;
}

namespace {

std::string rng_text(const std::mt19937_64& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

std::mt19937_64 rng_from_text(const std::string& s) {
  std::mt19937_64 rng;
  std::istringstream is(s);
  is >> rng;
  if (!is) throw std::runtime_error("checkpoint: malformed rng state");
  return rng;
}

std::mt19937_64 eval_rng(std::uint64_t seed, std::uint64_t step) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), 0xe7a1u};
  return std::mt19937_64(seq);
}

bool uses_sn(const TrainConfig& c) { return c.normalizer.type == norm::NormalizerType::SN; }

std::size_t latent_dim(const TrainProblem& p) { return p.g_spec.input_size(); }

Tensor generate(const TrainProblem& p, const nn::ParameterStore& g, const Tensor& z) {
  return nn::evaluate(p.g_spec, g, z);
}

std::vector<Tensor> values_of(const ad::GradientMap& grads) {
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < grads.size(); ++i) out.push_back(grads[i].value());
  return out;
}

[[noreturn]] void diverged(const std::string& what, const Checkpoint& state, const std::mt19937_64& rng) {
  Checkpoint snapshot = state;
  snapshot.rng_state = rng_text(rng);
  throw DivergenceError(what, std::move(snapshot));
}

double discriminator_step(const TrainProblem& p, Checkpoint& s, std::mt19937_64& rng) {
  const TrainConfig& c = p.config;
  const Tensor z = data::sample_latent(c.batch_size, latent_dim(p), rng);
  const Tensor x_real = data::sample_real(p.dataset, c.batch_size, rng);
  const Tensor x_fake = generate(p, s.generator, z);
  if (uses_sn(c)) nn::advance_power_iteration(s.discriminator, p.d_spec, 1);

  ad::Tape tape;
  const nn::BoundParameters params = nn::bind(tape, s.discriminator, true);
  const norm::Discriminator d = make_discriminator(p, params);
  auto normalized = [&](const ad::Var& x) { return norm::normalize(c.normalizer, d, x); };

  ad::Var real_in = tape.variable(x_real);
  const norm::NormalizedOutput real = normalized(real_in);
  const norm::NormalizedOutput fake = normalized(tape.variable(x_fake));
  ad::Var loss = norm::d_loss(c.loss, real.value, fake.value);

  if (c.normalizer.type == norm::NormalizerType::GP) {
    ad::Var grad_norm;
    if (c.normalizer.gp_target == 1) {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      Tensor mixed = x_real;
      const std::size_t per = x_real.numel() / c.batch_size;
      for (std::size_t i = 0; i < c.batch_size; ++i) {
        const double t = unit(rng);
        for (std::size_t j = 0; j < per; ++j)
          mixed[i * per + j] = t * x_real[i * per + j] + (1.0 - t) * x_fake[i * per + j];
      }
      ad::Var x_hat = tape.variable(std::move(mixed));
      grad_norm = norm::input_grad_norm(d(x_hat), x_hat);
    } else {
      grad_norm = norm::input_grad_norm(real.raw, real_in);
    }
    loss = loss + norm::gradient_penalty(grad_norm, c.normalizer.gp_target, c.normalizer.gp_lambda);
  }
  if (c.lambda_cr > 0) {
    auto augment = [&](const Tensor& x) { return norm::augment_images(x, rng); };
    auto value = [&](const ad::Var& x) { return normalized(x).value; };
    loss = loss + norm::consistency_regularization(tape, value, x_real, augment, c.lambda_cr);
  }

  const double loss_value = loss.item();
  if (!std::isfinite(loss_value)) diverged("non-finite discriminator loss", s, rng);
  const std::vector<std::string> names = nn::trainable_names(p.d_spec);
  const std::vector<ad::Var> vars = params.trainable(p.d_spec);
  const std::vector<Tensor> grads = values_of(ad::backward(loss, vars));
  try {
    adam_step(s.discriminator, names, grads, s.adam_d, c.alpha_d, c.beta1, c.beta2, c.adam_eps);
  } catch (const std::domain_error& e) {
    diverged(e.what(), s, rng);
  }
  ++s.d_updates;
  return loss_value;
}

double generator_step(const TrainProblem& p, Checkpoint& s, std::mt19937_64& rng) {
  const TrainConfig& c = p.config;
  const Tensor z = data::sample_latent(c.batch_size, latent_dim(p), rng);
  ad::Tape tape;
  const nn::BoundParameters g_params = nn::bind(tape, s.generator, true);
  const nn::BoundParameters d_params = nn::bind(tape, s.discriminator, false);
  ad::Var fake = nn::net_forward(p.g_spec, g_params, tape.constant(z));
  const norm::NormalizedOutput out = norm::normalize(c.normalizer, make_discriminator(p, d_params), fake);
  ad::Var loss = norm::g_loss(c.loss, out.value);

  const double loss_value = loss.item();
  if (!std::isfinite(loss_value)) diverged("non-finite generator loss", s, rng);
  const std::vector<std::string> names = nn::trainable_names(p.g_spec);
  const std::vector<Tensor> grads = values_of(ad::backward(loss, g_params.trainable(p.g_spec)));
  try {
    adam_step(s.generator, names, grads, s.adam_g, c.alpha_g, c.beta1, c.beta2, c.adam_eps);
  } catch (const std::domain_error& e) {
    diverged(e.what(), s, rng);
  }
  ++s.g_updates;
  return loss_value;
}

}  // namespace

norm::Discriminator make_discriminator(const TrainProblem& problem, const nn::BoundParameters& params) {
  const nn::ForwardOptions options{uses_sn(problem.config)};
  return [&problem, &params, options](const ad::Var& x) { return nn::net_forward(problem.d_spec, params, x, options); };
}

Checkpoint initialize(const TrainProblem& problem) {
  problem.config.validate();
  const std::uint64_t seed = problem.config.seed;
  Checkpoint s;
  s.generator = nn::kaiming_init(problem.g_spec, seed * 2 + 1);
  s.discriminator = nn::kaiming_init(problem.d_spec, seed * 2 + 2);
  if (uses_sn(problem.config)) nn::ensure_power_vectors(s.discriminator, problem.d_spec, seed * 2 + 3);
  s.ema = s.generator;
  const std::vector<std::string> g_names = nn::trainable_names(problem.g_spec);
  const std::vector<std::string> d_names = nn::trainable_names(problem.d_spec);
  s.adam_g = AdamState::zeros_like(s.generator, g_names);
  s.adam_d = AdamState::zeros_like(s.discriminator, d_names);
  s.rng_state = rng_text(std::mt19937_64(seed));
  s.config_text = problem.config_text;
  return s;
}

MetricsRow evaluate_snapshot(const TrainProblem& p, const Checkpoint& s) {
  const TrainConfig& c = p.config;
  std::mt19937_64 rng = eval_rng(c.seed, s.step);
  MetricsRow row;
  row.step = s.step;

  const Tensor real = data::sample_real(p.dataset, c.eval_samples, rng);
  const Tensor fake = generate(p, s.ema, data::sample_latent(c.eval_samples, latent_dim(p), rng));
  row.frechet = metrics::frechet_gaussian(metrics::fit_gaussian(real), metrics::fit_gaussian(fake));
  if (const auto* syn = std::get_if<data::SyntheticDataset>(&p.dataset)) {
    const std::size_t min_count = std::max<std::size_t>(1, c.eval_samples / 1000);
    row.mode_coverage = metrics::mode_coverage(fake, syn->centers(), syn->std, min_count);
  }

  const Tensor batch = data::sample_real(p.dataset, std::min<std::size_t>(256, c.eval_samples), rng);
  ad::Tape scratch;
  const nn::BoundParameters d_params = nn::bind(scratch, s.discriminator, false);
  const metrics::GradNormStats stats =
      metrics::grad_norm_stats(scratch, make_discriminator(p, d_params), c.normalizer, batch);
  row.grad_norm_mean = stats.mean;
  row.grad_norm_max = stats.max;
  return row;
}

TrainResult train_pgn_gan(const TrainProblem& problem, std::optional<Checkpoint> resume, const TrainHooks& hooks) {
  const TrainConfig& c = problem.config;
  c.validate();
  problem.g_spec.validate();
  problem.d_spec.validate();
  if (problem.g_spec.output_shape() != data::sample_shape(problem.dataset))
    throw std::invalid_argument("generator output " + pgn::to_string(problem.g_spec.output_shape()) +
                                " does not match data shape " + pgn::to_string(data::sample_shape(problem.dataset)));
  if (problem.d_spec.input != data::sample_shape(problem.dataset))
    throw std::invalid_argument("discriminator input " + pgn::to_string(problem.d_spec.input) +
                                " does not match data shape " + pgn::to_string(data::sample_shape(problem.dataset)));

  TrainResult result;
  Checkpoint s = resume ? std::move(*resume) : initialize(problem);
  std::mt19937_64 rng = rng_from_text(s.rng_state);
  for (; s.step < c.total_steps;) {
    double loss_d = 0.0;
    for (std::size_t k = 0; k < c.n_dis; ++k) loss_d = discriminator_step(problem, s, rng);
    const double loss_g = generator_step(problem, s, rng);
    ema_update(s.ema, s.generator, c.ema_decay);
    ++s.step;
    s.rng_state = rng_text(rng);
    spdlog::debug("step {} loss_d {} loss_g {}", s.step, loss_d, loss_g);

    if (c.eval_every && s.step % c.eval_every == 0) {
      MetricsRow row = evaluate_snapshot(problem, s);
      row.loss_d = loss_d;
      row.loss_g = loss_g;
      spdlog::info("{}", format_row(row));
      result.metrics.push_back(row);
      if (hooks.on_metrics) hooks.on_metrics(row);
    }
    if (c.checkpoint_every && s.step % c.checkpoint_every == 0 && hooks.on_checkpoint) hooks.on_checkpoint(s);
  }
  result.final_state = std::move(s);
  return result;
}

}  // namespace pgn::train
