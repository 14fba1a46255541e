#pragma once
// Run configuration files: flat `key = value` lines, `#` starts a comment.
//
//   key               default         meaning
//   task              ring8           ring8 | grid25 | swissroll | squares | images
//   normalizer        pgn             none | pgn | gn | sn | gp0 | gp1
//   loss              hinge           hinge | nonsaturating | wasserstein
//   alpha_g, alpha_d  2e-4            Adam learning rates
//   beta1, beta2      0, 0.9          Adam moment decays
//   batch_size        64
//   n_dis             5               discriminator updates per generator update
//   steps             2000            generator updates
//   ema_decay         0.999           generator weight averaging
//   lambda_cr         0               consistency regularization weight (image tasks)
//   seed              0
//   out_dir           run
//   eval_every        100             metrics row period, 0 disables
//   checkpoint_every  500             checkpoint period, 0 disables
//   g_hidden          128,128         generator hidden widths
//   d_hidden          128,128,128     discriminator hidden widths (channels for image tasks)
//   latent_dim        16
//   activation        leaky_relu      relu | leaky_relu, for both networks' hidden layers
//   leaky_slope       0.1
//   g_output          auto            auto | linear | tanh; auto is tanh for images, linear otherwise
//   gp_lambda         10              gp0 / gp1 penalty weight
//   gn_zeta           abs             abs (zeta = |f|) or a positive constant
//   eval_samples      10000           samples per metrics evaluation
//   data_dir          (empty)         image directory for task = images
//
// The squares task is a built-in set of 256 single-channel 8x8 images.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgn/train.hpp"

namespace pgn::cli {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::string task = "ring8";
  std::string normalizer = "pgn";
  std::string loss = "hinge";
  double alpha_g = 2e-4;
  double alpha_d = 2e-4;
  double beta1 = 0.0;
  double beta2 = 0.9;
  std::size_t batch_size = 64;
  std::size_t n_dis = 5;
  std::uint64_t steps = 2000;
  double ema_decay = 0.999;
  double lambda_cr = 0.0;
  std::uint64_t seed = 0;
  std::string out_dir = "run";
  std::uint64_t eval_every = 100;
  std::uint64_t checkpoint_every = 500;
  std::vector<std::size_t> g_hidden{128, 128};
  std::vector<std::size_t> d_hidden{128, 128, 128};
  std::size_t latent_dim = 16;
  std::string activation = "leaky_relu";
  double leaky_slope = 0.1;
  std::string g_output = "auto";
  double gp_lambda = 10.0;
  std::string gn_zeta = "abs";
  std::size_t eval_samples = 10000;
  std::string data_dir;

  bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError naming the key for unknown keys, malformed values or malformed lines.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
/// Every key in canonical order, one `key = value` line each.
std::string serialize(const RunConfig& config);
/// Applies one `key=value` override, with the same checks as parse_config.
void set_value(RunConfig& config, const std::string& key, const std::string& value);

std::vector<std::string> config_keys();

bool is_image_task(const RunConfig& config);
train::TrainConfig train_config(const RunConfig& config);
nn::NetworkSpec generator_spec(const RunConfig& config, const Shape& sample_shape);
nn::NetworkSpec discriminator_spec(const RunConfig& config, const Shape& sample_shape);
data::Dataset make_dataset(const RunConfig& config);
/// Dataset, both specs and the training settings; config_text is the serialized config.
train::TrainProblem make_problem(const RunConfig& config);

}  // namespace pgn::cli
