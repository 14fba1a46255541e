#pragma once
// Command implementations behind the `pgn` executable. Each returns the process exit code.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "pgn/verify.hpp"

namespace pgn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitDiverged = 2;

struct TrainArgs {
  std::filesystem::path config;
  std::optional<std::filesystem::path> resume;
  std::optional<std::filesystem::path> out_dir;
};

/// Writes metrics.csv, checkpoints/step_<n>.pgn, final.pgn and a sample export under the output
/// directory. A resumed run keeps the metrics rows up to the checkpoint's step and appends.
int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err);

struct VerifyArgs {
  std::uint64_t seed = 0;
  std::size_t samples = 1000;
  /// Comma-separated overrides: networks, min_depth, max_depth, width, input_dim, leaky_slope.
  std::string net;
};

verify::VerifyOptions verify_options(const VerifyArgs& args);
int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err);

struct SampleArgs {
  std::filesystem::path checkpoint;
  std::size_t n = 1000;
  std::filesystem::path out;
  bool use_ema = true;
  std::uint64_t seed = 0;
};

/// 2-D tasks write one CSV; image tasks write `out` as a directory of PGM/PPM files.
int cmd_sample(const SampleArgs& args, std::ostream& out, std::ostream& err);

struct EvalArgs {
  std::filesystem::path checkpoint;
  std::filesystem::path config;
  /// Evaluate these 2-D samples instead of drawing from the checkpoint's EMA generator.
  std::optional<std::filesystem::path> samples;
  /// Compare two independent draws of the real data.
  bool real_vs_real = false;
  std::uint64_t seed = 0;
};

std::string eval_header();
/// Prints eval_header() and one CSV row.
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);

int cmd_inspect_checkpoint(const std::filesystem::path& checkpoint, std::ostream& out, std::ostream& err);

}  // namespace pgn::cli
