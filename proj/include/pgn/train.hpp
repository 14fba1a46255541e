#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgn/data.hpp"
#include "pgn/nn.hpp"
#include "pgn/normalizers.hpp"

namespace pgn::train {

struct TrainConfig {
  double alpha_g = 2e-4;
  double alpha_d = 2e-4;
  double beta1 = 0.0;
  double beta2 = 0.9;
  double adam_eps = 1e-8;
  std::size_t batch_size = 64;
  std::size_t n_dis = 5;
  std::uint64_t total_steps = 2000;
  double ema_decay = 0.999;
  norm::NormalizerKind normalizer;
  norm::LossKind loss = norm::LossKind::Hinge;
  double lambda_cr = 0.0;  // 0 disables consistency regularization
  std::uint64_t seed = 0;
  std::uint64_t eval_every = 100;       // 0 disables the metrics log
  std::uint64_t checkpoint_every = 0;   // 0 disables periodic checkpoints
  std::size_t eval_samples = 10000;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t t = 0;

  static AdamState zeros_like(const nn::ParameterStore& params, std::span<const std::string> names);
  bool bit_equal(const AdamState& other) const;
};

/// One bias-corrected Adam update of the named parameters. Throws
/// std::domain_error naming the parameter when a gradient is not finite.
void adam_step(nn::ParameterStore& params, std::span<const std::string> names, std::span<const Tensor> grads,
               AdamState& state, double lr, double beta1, double beta2, double eps);

/// ema <- decay * ema + (1 - decay) * current, entry by entry.
void ema_update(nn::ParameterStore& ema, const nn::ParameterStore& current, double decay);

struct Checkpoint {
  std::uint64_t step = 0;  // completed generator updates
  nn::ParameterStore generator;
  nn::ParameterStore discriminator;
  nn::ParameterStore ema;
  AdamState adam_g;
  AdamState adam_d;
  std::string rng_state;
  std::uint64_t d_updates = 0;
  std::uint64_t g_updates = 0;
  std::string config_text;

  bool bit_equal(const Checkpoint& other) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
/// Throws io::FormatError on a malformed file.
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct MetricsRow {
  std::uint64_t step = 0;
  double loss_d = 0.0;
  double loss_g = 0.0;
  double grad_norm_mean = 0.0;
  double grad_norm_max = 0.0;
  double frechet = 0.0;
  std::size_t mode_coverage = 0;
};

std::string metrics_header();
std::string format_row(const MetricsRow& row);

struct TrainProblem {
  nn::NetworkSpec g_spec;
  nn::NetworkSpec d_spec;
  data::Dataset dataset;
  TrainConfig config;
  std::string config_text;  // echoed into checkpoints
};

/// Raised when a loss or gradient turns non-finite. Carries the state at the failing step.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, Checkpoint state)
      : std::runtime_error(what), state_(std::move(state)) {}
  const Checkpoint& state() const { return state_; }

 private:
  Checkpoint state_;
};

struct TrainHooks {
  std::function<void(const MetricsRow&)> on_metrics;
  std::function<void(const Checkpoint&)> on_checkpoint;
};

struct TrainResult {
  Checkpoint final_state;
  std::vector<MetricsRow> metrics;
};

/// Fresh state: Kaiming-initialized networks, EMA equal to the generator, zeroed Adam moments.
Checkpoint initialize(const TrainProblem& problem);

/// Runs generator updates from the state's step up to config.total_steps. Each one is
/// preceded by n_dis discriminator updates; the EMA follows every generator update.
TrainResult train_pgn_gan(const TrainProblem& problem, std::optional<Checkpoint> resume = std::nullopt,
                          const TrainHooks& hooks = {});

/// Metrics for one parameter snapshot, using the EMA generator. Deterministic in (seed, step).
MetricsRow evaluate_snapshot(const TrainProblem& problem, const Checkpoint& state);

/// Raw discriminator closure for a bound parameter set.
norm::Discriminator make_discriminator(const TrainProblem& problem, const nn::BoundParameters& params);

}  // namespace pgn::train
