#include "pgn/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pgn/config.hpp"
#include "pgn/metrics.hpp"
#include "pgn/tensor_io.hpp"

namespace pgn::cli {

namespace fs = std::filesystem;

namespace {

std::string step_name(std::uint64_t step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%06llu.pgn", static_cast<unsigned long long>(step));
  return buf;
}

// Shape mismatch between a stored parameter set and the one a spec expects, or empty.
std::string store_mismatch(const char* what, const nn::ParameterStore& stored, const nn::ParameterStore& expected) {
  if (stored.size() != expected.size())
    return std::string(what) + ": checkpoint has " + std::to_string(stored.size()) + " tensors, config expects " +
           std::to_string(expected.size());
  for (const auto& e : expected) {
    if (!stored.contains(e.name)) return std::string(what) + ": checkpoint lacks " + e.name;
    if (stored.get(e.name).shape() != e.value.shape())
      return std::string(what) + ": " + e.name + " has shape " + pgn::to_string(stored.get(e.name).shape()) +
             ", config expects " + pgn::to_string(e.value.shape());
  }
  return "";
}

std::string checkpoint_mismatch(const train::TrainProblem& p, const train::Checkpoint& c) {
  const train::Checkpoint fresh = train::initialize(p);
  if (auto m = store_mismatch("generator", c.generator, fresh.generator); !m.empty()) return m;
  if (auto m = store_mismatch("discriminator", c.discriminator, fresh.discriminator); !m.empty()) return m;
  if (auto m = store_mismatch("ema", c.ema, fresh.ema); !m.empty()) return m;
  if (c.adam_g.m.size() != fresh.adam_g.m.size() || c.adam_d.m.size() != fresh.adam_d.m.size())
    return "optimizer state does not match the networks";
  return "";
}

// Keeps the header and rows up to `step`, so a resumed run appends where the checkpoint left off.
void prepare_metrics(const fs::path& path, std::optional<std::uint64_t> resume_step) {
  std::vector<std::string> keep{train::metrics_header()};
  if (resume_step && fs::exists(path)) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (std::stoull(line.substr(0, line.find(','))) <= *resume_step) keep.push_back(line);
    }
  }
  std::ofstream out(path, std::ios::trunc);
  for (const auto& l : keep) out << l << '\n';
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

Tensor generate_samples(const train::TrainProblem& p, const nn::ParameterStore& g, std::size_t n,
                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return nn::evaluate(p.g_spec, g, data::sample_latent(n, p.g_spec.input_size(), rng));
}

void export_samples(const train::TrainProblem& p, const Tensor& samples, std::size_t n, const fs::path& out) {
  if (p.g_spec.output_shape().size() == 1) {
    data::write_points_csv(out, samples);
    return;
  }
  fs::create_directories(out);
  const std::size_t per = n == 0 ? 0 : samples.numel() / n;
  const Shape shape = p.g_spec.output_shape();
  const char* ext = shape[2] == 3 ? ".ppm" : ".pgm";
  for (std::size_t i = 0; i < n; ++i) {
    const auto span = samples.data().subspan(i * per, per);
    char name[32];
    std::snprintf(name, sizeof name, "sample_%05zu%s", i, ext);
    data::write_image(out / name, Tensor(shape, std::vector<double>(span.begin(), span.end())));
  }
}

train::TrainProblem problem_from_checkpoint(const train::Checkpoint& ckpt) {
  return make_problem(parse_config(ckpt.config_text));
}

}  // namespace

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  train::TrainProblem problem;
  fs::path dir;
  std::optional<train::Checkpoint> resume;
  try {
    RunConfig config = load_config(args.config);
    if (args.out_dir) config.out_dir = args.out_dir->string();
    problem = make_problem(config);
    dir = config.out_dir;
    if (args.resume) {
      resume = train::load_checkpoint(*args.resume);
      if (auto m = checkpoint_mismatch(problem, *resume); !m.empty()) {
        err << "resume: " << m << '\n';
        return kExitError;
      }
      resume->config_text = problem.config_text;
    }
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kExitError;
  }

  try {
    fs::create_directories(dir);
    if (problem.config.total_steps == 0 && !resume) {
      train::save_checkpoint(train::initialize(problem), dir / "final.pgn");
      out << "wrote " << (dir / "final.pgn").string() << '\n';
      return kExitOk;
    }
    const fs::path csv = dir / "metrics.csv";
    prepare_metrics(csv, resume ? std::optional(resume->step) : std::nullopt);
    std::ofstream metrics(csv, std::ios::app);
    fs::create_directories(dir / "checkpoints");
    train::TrainHooks hooks;
    hooks.on_metrics = [&](const train::MetricsRow& row) { metrics << train::format_row(row) << '\n' << std::flush; };
    hooks.on_checkpoint = [&](const train::Checkpoint& s) {
      train::save_checkpoint(s, dir / "checkpoints" / step_name(s.step));
    };

    const train::TrainResult result = train::train_pgn_gan(problem, std::move(resume), hooks);
    train::save_checkpoint(result.final_state, dir / "final.pgn");
    const std::size_t n = problem.g_spec.output_shape().size() == 1 ? 1000 : 16;
    const Tensor samples = generate_samples(problem, result.final_state.ema, n, problem.config.seed);
    export_samples(problem, samples, n, problem.g_spec.output_shape().size() == 1 ? dir / "samples.csv" : dir / "samples");
    out << "trained " << result.final_state.step << " steps; wrote " << (dir / "final.pgn").string() << '\n';
    return kExitOk;
  } catch (const train::DivergenceError& e) {
    err << "training diverged at step " << e.state().step << ": " << e.what() << '\n';
    try {
      train::save_checkpoint(e.state(), dir / "diverged.pgn");
      err << "state saved to " << (dir / "diverged.pgn").string() << '\n';
    } catch (const std::exception& save_error) {
      err << "could not save diverged state: " << save_error.what() << '\n';
    }
    return kExitDiverged;
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kExitError;
  }
}

verify::VerifyOptions verify_options(const VerifyArgs& args) {
  verify::VerifyOptions o;
  o.seed = args.seed;
  o.samples = args.samples;
  std::stringstream ss(args.net);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--net: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    std::size_t used = 0;
    const double number = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("--net: invalid value for " + key);
    const auto count = static_cast<std::size_t>(number);
    if (key == "networks") o.networks = count;
    else if (key == "min_depth") o.min_depth = count;
    else if (key == "max_depth") o.max_depth = count;
    else if (key == "width") o.width = count;
    else if (key == "input_dim") o.input_dim = count;
    else if (key == "leaky_slope") o.leaky_slope = number;
    else throw std::invalid_argument("--net: unknown key '" + key + "'");
  }
  return o;
}

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const verify::VerifyOptions options = verify_options(args);
    if (options.samples == 0) err << "warning: --samples 0 runs no checks; the report passes vacuously\n";
    const verify::VerifyReport report = verify::run_all(options);
    out << report.format();
    return report.passed() ? kExitOk : kExitError;
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kExitError;
  }
}

int cmd_sample(const SampleArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const train::Checkpoint ckpt = train::load_checkpoint(args.checkpoint);
    const train::TrainProblem problem = problem_from_checkpoint(ckpt);
    if (auto m = checkpoint_mismatch(problem, ckpt); !m.empty()) throw std::runtime_error(m);
    if (args.n == 0 && problem.g_spec.output_shape().size() == 1) {
      std::ofstream empty(args.out, std::ios::trunc);
      if (!empty) throw std::runtime_error("cannot write " + args.out.string());
      out << "wrote 0 samples to " << args.out.string() << '\n';
      return kExitOk;
    }
    const nn::ParameterStore& g = args.use_ema ? ckpt.ema : ckpt.generator;
    const Tensor samples = args.n == 0 ? Tensor::zeros({0}) : generate_samples(problem, g, args.n, args.seed);
    export_samples(problem, samples, args.n, args.out);
    out << "wrote " << args.n << " samples to " << args.out.string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kExitError;
  }
}

std::string eval_header() { return "frechet,mode_coverage,num_modes,high_quality_ratio,grad_norm_mean,grad_norm_max"; }

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const train::Checkpoint ckpt = train::load_checkpoint(args.checkpoint);
    const train::TrainProblem trained = problem_from_checkpoint(ckpt);
    const RunConfig config = load_config(args.config);
    const data::Dataset dataset = make_dataset(config);
    const Shape shape = data::sample_shape(dataset);
    if (trained.g_spec.output_shape() != shape)
      throw std::invalid_argument("checkpoint generates " + pgn::to_string(trained.g_spec.output_shape()) +
                                  " samples but the dataset has " + pgn::to_string(shape));
    const std::size_t n = config.eval_samples;
    std::mt19937_64 rng(args.seed);
    const Tensor real = data::sample_real(dataset, n, rng);
    Tensor fake;
    if (args.real_vs_real) {
      fake = data::sample_real(dataset, n, rng);
    } else if (args.samples) {
      fake = data::read_points_csv(*args.samples);
      if (shape.size() != 1 || fake.rank() != 2 || fake.cols() != shape[0])
        throw std::invalid_argument("sample file " + args.samples->string() + " has shape " +
                                    pgn::to_string(fake.shape()) + ", expected rows of " + pgn::to_string(shape));
      if (fake.rows() < 2) throw std::invalid_argument("sample file needs at least two rows");
    } else {
      fake = nn::evaluate(trained.g_spec, ckpt.ema, data::sample_latent(n, trained.g_spec.input_size(), rng));
    }

    metrics::MetricsReport report;
    report.frechet = metrics::frechet_gaussian(metrics::fit_gaussian(real), metrics::fit_gaussian(fake));
    if (const auto* syn = std::get_if<data::SyntheticDataset>(&dataset)) {
      const Tensor centers = syn->centers();
      const std::size_t count = fake.numel() / shape[0];
      report.num_modes = centers.rank() == 2 ? centers.rows() : 0;
      report.mode_coverage = metrics::mode_coverage(fake, centers, syn->std, std::max<std::size_t>(1, count / 1000));
      report.high_quality_ratio = metrics::high_quality_ratio(fake, centers, syn->std);
    }
    const Tensor batch = data::sample_real(dataset, std::min<std::size_t>(256, n), rng);
    ad::Tape tape;
    const nn::BoundParameters d_params = nn::bind(tape, ckpt.discriminator, false);
    report.grad_norm = metrics::grad_norm_stats(tape, train::make_discriminator(trained, d_params),
                                                trained.config.normalizer, batch);

    char row[256];
    std::snprintf(row, sizeof row, "%.10g,%zu,%zu,%.10g,%.10g,%.10g", report.frechet, report.mode_coverage,
                  report.num_modes, report.high_quality_ratio, report.grad_norm.mean, report.grad_norm.max);
    out << eval_header() << '\n' << row << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kExitError;
  }
}

int cmd_inspect_checkpoint(const fs::path& checkpoint, std::ostream& out, std::ostream& err) {
  try {
    const io::TensorFile file = io::read_file(checkpoint);
    out << "step " << file.step << '\n';
    for (const auto& t : file.tensors) out << t.name << ' ' << pgn::to_string(t.value.shape()) << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace pgn::cli
