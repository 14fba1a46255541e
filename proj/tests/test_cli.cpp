#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pgn/commands.hpp"
#include "pgn/config.hpp"
#include "pgn/data.hpp"

using namespace pgn;
using namespace pgn::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("pgn_test_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

/// A small, fast ring8 config rooted in `dir`.
fs::path small_config(const fs::path& dir, int steps = 6, const std::string& extra = "") {
  const fs::path cfg = dir / "run.cfg";
  write_text(cfg,
             "# small run\n"
             "steps = " + std::to_string(steps) + "\n" +
             "batch_size = 16\n"
             "n_dis = 2\n"
             "g_hidden = 16\n"
             "d_hidden = 16,16\n"
             "latent_dim = 4\n"
             "eval_every = 2\n"
             "checkpoint_every = 3\n"
             "eval_samples = 500\n"
             "out_dir = " +
                 (dir / "out").string() + "\n" + extra);
  return cfg;
}

struct Captured {
  std::ostringstream out, err;
};

}  // namespace

TEST_CASE("config parsing: defaults, comments and overrides") {
  const RunConfig c = parse_config("# comment\n  normalizer = gn   # trailing\n\nsteps=10\nd_hidden = 4, 5\n");
  CHECK(c.normalizer == "gn");
  CHECK(c.steps == 10);
  CHECK(c.d_hidden == std::vector<std::size_t>{4, 5});
  CHECK(c.task == "ring8");
  CHECK(parse_config("") == RunConfig{});
}

TEST_CASE("config errors name the key") {
  CHECK_THROWS_WITH_AS(parse_config("colour = blue\n"), doctest::Contains("colour"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("steps = many\n"), doctest::Contains("steps"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("normalizer = bn\n"), doctest::Contains("normalizer"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("seed = 1\nseed = 2\n"), doctest::Contains("seed"), ConfigError);
  CHECK_THROWS_AS(parse_config("just some words\n"), ConfigError);
  CHECK_THROWS_WITH_AS(train_config(parse_config("lambda_cr = 5\n")), doctest::Contains("lambda_cr"), ConfigError);
  CHECK_THROWS_WITH_AS(train_config(parse_config("n_dis = 0\n")), doctest::Contains("n_dis"), ConfigError);
}

TEST_CASE("config round trip") {
  RunConfig c;
  set_value(c, "alpha_d", "4e-4");
  set_value(c, "normalizer", "gp0");
  set_value(c, "g_hidden", "7,8,9");
  set_value(c, "ema_decay", "0.1");
  set_value(c, "gn_zeta", "0.25");
  const std::string text = serialize(c);
  CHECK(parse_config(text) == c);
  CHECK(serialize(parse_config(text)) == text);
  std::size_t lines = 0;
  for (char ch : text) lines += ch == '\n';
  CHECK(lines == config_keys().size());
}

TEST_CASE("config maps onto training settings and networks") {
  RunConfig c = parse_config("normalizer = gp1\ngp_lambda = 5\nn_dis = 3\n");
  const train::TrainConfig t = train_config(c);
  CHECK(t.normalizer.type == norm::NormalizerType::GP);
  CHECK(t.normalizer.gp_target == 1);
  CHECK(t.normalizer.gp_lambda == 5.0);
  CHECK(t.n_dis == 3);
  const nn::NetworkSpec g = generator_spec(c, {2});
  CHECK(g.input_size() == 16);
  CHECK(g.output_size() == 2);
  CHECK(discriminator_spec(c, {2}).output_size() == 1);
  c.task = "squares";
  const train::TrainProblem p = make_problem(c);
  CHECK(p.g_spec.output_shape() == Shape{8, 8, 1});
  CHECK(p.d_spec.output_size() == 1);
}

TEST_CASE("train with zero steps writes only the initial checkpoint") {
  TempDir dir("zero");
  Captured io;
  CHECK(cmd_train({small_config(dir.path, 0), {}, {}}, io.out, io.err) == kExitOk);
  CHECK(fs::exists(dir.path / "out" / "final.pgn"));
  CHECK_FALSE(fs::exists(dir.path / "out" / "metrics.csv"));
  Captured insp;
  CHECK(cmd_inspect_checkpoint(dir.path / "out" / "final.pgn", insp.out, insp.err) == kExitOk);
  CHECK(insp.out.str().rfind("step 0\n", 0) == 0);
}

TEST_CASE("train writes metrics, checkpoints and samples; resume reproduces the log") {
  TempDir dir("train");
  const fs::path cfg = small_config(dir.path);
  Captured io;
  REQUIRE(cmd_train({cfg, {}, {}}, io.out, io.err) == kExitOk);
  const fs::path out = dir.path / "out";
  const std::string metrics = read_text(out / "metrics.csv");
  CHECK(metrics.rfind("step,loss_d,loss_g,grad_norm_mean,grad_norm_max,frechet,mode_coverage\n", 0) == 0);
  CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 4);
  CHECK(fs::exists(out / "checkpoints" / "step_000003.pgn"));
  CHECK(fs::exists(out / "checkpoints" / "step_000006.pgn"));
  CHECK(fs::exists(out / "final.pgn"));
  CHECK(data::read_points_csv(out / "samples.csv").rows() == 1000);

  // Resuming into a copy of the run directory keeps the rows logged before the checkpoint.
  fs::copy(out, dir.path / "resumed", fs::copy_options::recursive);
  fs::remove(dir.path / "resumed" / "final.pgn");
  Captured again;
  REQUIRE(cmd_train({cfg, out / "checkpoints" / "step_000003.pgn", dir.path / "resumed"}, again.out, again.err) ==
          kExitOk);
  CHECK(read_text(dir.path / "resumed" / "metrics.csv") == metrics);
  // The config echo records the overridden out_dir; everything else matches.
  train::Checkpoint resumed = train::load_checkpoint(dir.path / "resumed" / "final.pgn");
  const train::Checkpoint straight = train::load_checkpoint(out / "final.pgn");
  CHECK(resumed.config_text.find("resumed") != std::string::npos);
  resumed.config_text = straight.config_text;
  CHECK(resumed.bit_equal(straight));
}

TEST_CASE("train rejects bad configs and mismatched resumes") {
  TempDir dir("bad");
  Captured io;
  write_text(dir.path / "bad.cfg", "stepz = 3\n");
  CHECK(cmd_train({dir.path / "bad.cfg", {}, {}}, io.out, io.err) == kExitError);
  CHECK(io.err.str().find("stepz") != std::string::npos);

  REQUIRE(cmd_train({small_config(dir.path, 0), {}, {}}, io.out, io.err) == kExitOk);
  write_text(dir.path / "wide.cfg", "steps = 1\nd_hidden = 32\nout_dir = " + (dir.path / "wide").string() + "\n");
  Captured mismatch;
  CHECK(cmd_train({dir.path / "wide.cfg", dir.path / "out" / "final.pgn", {}}, mismatch.out, mismatch.err) ==
        kExitError);
  CHECK(mismatch.err.str().find("resume") != std::string::npos);
}

TEST_CASE("sample: empty output, determinism and corrupt checkpoints") {
  TempDir dir("sample");
  Captured io;
  REQUIRE(cmd_train({small_config(dir.path, 2), {}, {}}, io.out, io.err) == kExitOk);
  const fs::path ckpt = dir.path / "out" / "final.pgn";
  CHECK(cmd_sample({ckpt, 0, dir.path / "empty.csv", true, 0}, io.out, io.err) == kExitOk);
  CHECK(fs::file_size(dir.path / "empty.csv") == 0);
  CHECK(cmd_sample({ckpt, 50, dir.path / "a.csv", true, 3}, io.out, io.err) == kExitOk);
  CHECK(cmd_sample({ckpt, 50, dir.path / "b.csv", true, 3}, io.out, io.err) == kExitOk);
  CHECK(read_text(dir.path / "a.csv") == read_text(dir.path / "b.csv"));
  CHECK(cmd_sample({ckpt, 50, dir.path / "raw.csv", false, 3}, io.out, io.err) == kExitOk);
  CHECK(read_text(dir.path / "raw.csv") != read_text(dir.path / "a.csv"));

  write_text(dir.path / "junk.pgn", "not a checkpoint");
  Captured bad;
  CHECK(cmd_sample({dir.path / "junk.pgn", 5, dir.path / "c.csv", true, 0}, bad.out, bad.err) == kExitError);
  CHECK_FALSE(bad.err.str().empty());
}

TEST_CASE("eval: real-vs-real floor, ranges and dimension checks") {
  TempDir dir("eval");
  const fs::path cfg = dir.path / "eval.cfg";
  write_text(cfg, "steps = 0\ng_hidden = 16\nd_hidden = 16,16\nout_dir = " + (dir.path / "out").string() + "\n");
  Captured io;
  REQUIRE(cmd_train({cfg, {}, {}}, io.out, io.err) == kExitOk);
  const fs::path ckpt = dir.path / "out" / "final.pgn";

  Captured rr;
  REQUIRE(cmd_eval({ckpt, cfg, {}, true, 0}, rr.out, rr.err) == kExitOk);
  std::istringstream lines(rr.out.str());
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK(header == eval_header());
  CHECK(std::stod(row.substr(0, row.find(','))) <= 0.01);

  Captured untrained;
  REQUIRE(cmd_eval({ckpt, cfg, {}, false, 0}, untrained.out, untrained.err) == kExitOk);
  std::istringstream l2(untrained.out.str());
  std::getline(l2, header);
  std::getline(l2, row);
  std::vector<std::string> fields;
  std::stringstream ss(row);
  for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
  REQUIRE(fields.size() == 6);
  CHECK(std::stoul(fields[1]) <= 8);
  CHECK(fields[2] == "8");
  CHECK(std::stod(fields[3]) >= 0.0);
  CHECK(std::stod(fields[3]) <= 1.0);

  write_text(dir.path / "grid.cfg", "task = squares\n");
  Captured mismatch;
  CHECK(cmd_eval({ckpt, dir.path / "grid.cfg", {}, false, 0}, mismatch.out, mismatch.err) == kExitError);
}

TEST_CASE("verify options and the vacuous run") {
  const verify::VerifyOptions o = verify_options({3, 10, "networks=2,max_depth=3,width=8"});
  CHECK(o.seed == 3);
  CHECK(o.samples == 10);
  CHECK(o.networks == 2);
  CHECK(o.max_depth == 3);
  CHECK(o.width == 8);
  CHECK_THROWS_AS(verify_options({0, 10, "depth=3"}), std::invalid_argument);
  Captured io;
  CHECK(cmd_verify({0, 0, ""}, io.out, io.err) == kExitOk);
  CHECK(io.err.str().find("warning") != std::string::npos);
}
