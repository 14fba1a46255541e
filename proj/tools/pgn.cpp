#include <CLI11.hpp>
#include <iostream>

#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "pgn/commands.hpp"

int main(int argc, char** argv) {
  // Log lines go to stderr as "[level] message"; SPDLOG_LEVEL=debug shows per-step losses.
  spdlog::set_default_logger(spdlog::stderr_logger_mt("pgn"));
  spdlog::set_pattern("[%l] %v");
  spdlog::cfg::load_env_levels();

  CLI::App app{"Penalty gradient normalized GAN lab"};
  app.require_subcommand(1);

  pgn::cli::TrainArgs train;
  std::string resume, out_dir;
  auto* train_cmd = app.add_subcommand("train", "Train a GAN from a config file");
  train_cmd->add_option("config", train.config, "Run config (key = value lines)")->required();
  train_cmd->add_option("--resume", resume, "Checkpoint to resume from");
  train_cmd->add_option("--out", out_dir, "Output directory, overrides out_dir");

  pgn::cli::VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Check the normalizer bounds on random networks");
  verify_cmd->add_option("--seed", verify.seed, "Random seed");
  verify_cmd->add_option("--samples", verify.samples, "Input points per network");
  verify_cmd->add_option("--net", verify.net,
                         "Network overrides: networks,min_depth,max_depth,width,input_dim,leaky_slope as key=value");

  pgn::cli::SampleArgs sample;
  bool raw = false;
  auto* sample_cmd = app.add_subcommand("sample", "Draw generator samples from a checkpoint");
  sample_cmd->add_option("checkpoint", sample.checkpoint)->required();
  sample_cmd->add_option("--n", sample.n, "Number of samples");
  sample_cmd->add_option("--out", sample.out, "CSV file, or directory for image tasks")->required();
  sample_cmd->add_flag("--use-ema", sample.use_ema, "Sample from the averaged generator (default)");
  sample_cmd->add_flag("--raw", raw, "Sample from the raw generator weights");
  sample_cmd->add_option("--seed", sample.seed, "Latent seed");

  pgn::cli::EvalArgs eval;
  std::string eval_samples;
  auto* eval_cmd = app.add_subcommand("eval", "Metrics for a checkpoint against its dataset");
  eval_cmd->add_option("checkpoint", eval.checkpoint)->required();
  eval_cmd->add_option("config", eval.config, "Config naming the dataset")->required();
  eval_cmd->add_option("--samples", eval_samples, "Evaluate a CSV of 2-D samples instead of the generator");
  eval_cmd->add_flag("--real-vs-real", eval.real_vs_real, "Compare two draws of the real data");
  eval_cmd->add_option("--seed", eval.seed, "Sampling seed");

  std::string inspect_path;
  auto* inspect_cmd = app.add_subcommand("inspect-checkpoint", "List the tensors stored in a checkpoint");
  inspect_cmd->add_option("checkpoint", inspect_path)->required();

  CLI11_PARSE(app, argc, argv);

  if (*train_cmd) {
    if (!resume.empty()) train.resume = resume;
    if (!out_dir.empty()) train.out_dir = out_dir;
    return pgn::cli::cmd_train(train, std::cout, std::cerr);
  }
  if (*verify_cmd) return pgn::cli::cmd_verify(verify, std::cout, std::cerr);
  if (*sample_cmd) {
    if (raw) sample.use_ema = false;
    return pgn::cli::cmd_sample(sample, std::cout, std::cerr);
  }
  if (*eval_cmd) {
    if (!eval_samples.empty()) eval.samples = eval_samples;
    return pgn::cli::cmd_eval(eval, std::cout, std::cerr);
  }
  return pgn::cli::cmd_inspect_checkpoint(inspect_path, std::cout, std::cerr);
}
