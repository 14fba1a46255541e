#include "pgn/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace pgn::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  throw ConfigError("config key '" + key + "': invalid value '" + value + "', expected " + expected);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) bad_value(key, v, "a number");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) bad_value(key, v, "a non-negative integer");
  return out;
}

std::vector<std::size_t> to_widths(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::uint64_t w = to_uint(key, trim(item));
    if (w == 0) bad_value(key, v, "positive widths");
    out.push_back(w);
  }
  if (out.empty()) bad_value(key, v, "a comma-separated list of widths");
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string fmt_widths(const std::vector<std::size_t>& w) {
  std::string s;
  for (std::size_t x : w) s += (s.empty() ? "" : ",") + std::to_string(x);
  return s;
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class M>
Field double_field(M RunConfig::*member, const char* key) {
  return {[=](RunConfig& c, const std::string& v) { c.*member = to_double(key, v); },
          [=](const RunConfig& c) { return fmt_double(c.*member); }};
}

template <class M>
Field uint_field(M RunConfig::*member, const char* key) {
  return {[=](RunConfig& c, const std::string& v) { c.*member = static_cast<M>(to_uint(key, v)); },
          [=](const RunConfig& c) { return std::to_string(c.*member); }};
}

Field choice_field(std::string RunConfig::*member, const char* key, std::initializer_list<const char*> allowed) {
  const std::vector<const char*> keep(allowed);
  return {[=](RunConfig& c, const std::string& v) {
            for (const char* a : keep)
              if (v == a) {
                c.*member = v;
                return;
              }
            std::string list;
            for (const char* a : keep) list += (list.empty() ? "" : "|") + std::string(a);
            bad_value(key, v, list);
          },
          [=](const RunConfig& c) { return c.*member; }};
}

Field widths_field(std::vector<std::size_t> RunConfig::*member, const char* key) {
  return {[=](RunConfig& c, const std::string& v) { c.*member = to_widths(key, v); },
          [=](const RunConfig& c) { return fmt_widths(c.*member); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"task", choice_field(&RunConfig::task, "task", {"ring8", "grid25", "swissroll", "squares", "images"})},
      {"normalizer", choice_field(&RunConfig::normalizer, "normalizer", {"none", "pgn", "gn", "sn", "gp0", "gp1"})},
      {"loss", choice_field(&RunConfig::loss, "loss", {"hinge", "nonsaturating", "wasserstein"})},
      {"alpha_g", double_field(&RunConfig::alpha_g, "alpha_g")},
      {"alpha_d", double_field(&RunConfig::alpha_d, "alpha_d")},
      {"beta1", double_field(&RunConfig::beta1, "beta1")},
      {"beta2", double_field(&RunConfig::beta2, "beta2")},
      {"batch_size", uint_field(&RunConfig::batch_size, "batch_size")},
      {"n_dis", uint_field(&RunConfig::n_dis, "n_dis")},
      {"steps", uint_field(&RunConfig::steps, "steps")},
      {"ema_decay", double_field(&RunConfig::ema_decay, "ema_decay")},
      {"lambda_cr", double_field(&RunConfig::lambda_cr, "lambda_cr")},
      {"seed", uint_field(&RunConfig::seed, "seed")},
      {"out_dir",
       {[](RunConfig& c, const std::string& v) {
          if (v.empty()) bad_value("out_dir", v, "a directory");
          c.out_dir = v;
        },
        [](const RunConfig& c) { return c.out_dir; }}},
      {"eval_every", uint_field(&RunConfig::eval_every, "eval_every")},
      {"checkpoint_every", uint_field(&RunConfig::checkpoint_every, "checkpoint_every")},
      {"g_hidden", widths_field(&RunConfig::g_hidden, "g_hidden")},
      {"d_hidden", widths_field(&RunConfig::d_hidden, "d_hidden")},
      {"latent_dim",
       {[](RunConfig& c, const std::string& v) {
          c.latent_dim = to_uint("latent_dim", v);
          if (c.latent_dim == 0) bad_value("latent_dim", v, "a positive integer");
        },
        [](const RunConfig& c) { return std::to_string(c.latent_dim); }}},
      {"activation", choice_field(&RunConfig::activation, "activation", {"relu", "leaky_relu"})},
      {"leaky_slope", double_field(&RunConfig::leaky_slope, "leaky_slope")},
      {"g_output", choice_field(&RunConfig::g_output, "g_output", {"auto", "linear", "tanh"})},
      {"gp_lambda", double_field(&RunConfig::gp_lambda, "gp_lambda")},
      {"gn_zeta",
       {[](RunConfig& c, const std::string& v) {
          if (v != "abs" && !(to_double("gn_zeta", v) > 0)) bad_value("gn_zeta", v, "abs or a positive number");
          c.gn_zeta = v;
        },
        [](const RunConfig& c) { return c.gn_zeta; }}},
      {"eval_samples", uint_field(&RunConfig::eval_samples, "eval_samples")},
      {"data_dir",
       {[](RunConfig& c, const std::string& v) { c.data_dir = v; }, [](const RunConfig& c) { return c.data_dir; }}},
  };
  return table;
}

const Field& field(const std::string& key) {
  for (const auto& [name, f] : fields())
    if (name == key) return f;
  throw ConfigError("unknown config key '" + key + "'");
}

nn::ActivationLayer hidden_activation(const RunConfig& c) {
  if (c.activation == "relu") return {nn::Activation::Relu, 0.0};
  return {nn::Activation::LeakyRelu, c.leaky_slope};
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [name, f] : fields()) keys.push_back(name);
  return keys;
}

void set_value(RunConfig& config, const std::string& key, const std::string& value) { field(key).set(config, value); }

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  std::map<std::string, std::size_t> seen;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    if (auto [it, fresh] = seen.emplace(key, lineno); !fresh)
      throw ConfigError("config key '" + key + "' repeated on lines " + std::to_string(it->second) + " and " +
                        std::to_string(lineno));
    set_value(c, key, trim(line.substr(eq + 1)));
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize(const RunConfig& config) {
  std::string out;
  for (const auto& [name, f] : fields()) out += name + " = " + f.get(config) + "\n";
  return out;
}

bool is_image_task(const RunConfig& c) { return c.task == "squares" || c.task == "images"; }

train::TrainConfig train_config(const RunConfig& c) {
  train::TrainConfig t;
  t.alpha_g = c.alpha_g;
  t.alpha_d = c.alpha_d;
  t.beta1 = c.beta1;
  t.beta2 = c.beta2;
  t.batch_size = c.batch_size;
  t.n_dis = c.n_dis;
  t.total_steps = c.steps;
  t.ema_decay = c.ema_decay;
  t.lambda_cr = c.lambda_cr;
  t.seed = c.seed;
  t.eval_every = c.eval_every;
  t.checkpoint_every = c.checkpoint_every;
  t.eval_samples = c.eval_samples;
  t.loss = norm::parse_loss(c.loss);
  if (c.normalizer == "gp0" || c.normalizer == "gp1") {
    t.normalizer = norm::gp(c.normalizer == "gp1" ? 1 : 0, c.gp_lambda);
  } else if (c.normalizer == "gn") {
    t.normalizer = norm::gn(c.gn_zeta == "abs" ? std::nullopt : std::optional<double>(std::stod(c.gn_zeta)));
  } else {
    t.normalizer.type = norm::parse_normalizer(c.normalizer);
  }
  if (t.lambda_cr > 0 && !is_image_task(c))
    throw ConfigError("config key 'lambda_cr': consistency regularization needs an image task");
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return t;
}

nn::NetworkSpec generator_spec(const RunConfig& c, const Shape& sample_shape) {
  const bool tanh_out = c.g_output == "tanh" || (c.g_output == "auto" && is_image_task(c));
  std::optional<nn::ActivationLayer> out_act;
  if (tanh_out) out_act = nn::ActivationLayer{nn::Activation::Tanh, 0.0};
  nn::NetworkSpec spec = nn::make_mlp(nn::Role::Generator, c.latent_dim, c.g_hidden, numel_of(sample_shape),
                                      hidden_activation(c), out_act);
  if (sample_shape.size() > 1) spec.layers.push_back(nn::ReshapeLayer{sample_shape});
  return spec;
}

nn::NetworkSpec discriminator_spec(const RunConfig& c, const Shape& sample_shape) {
  if (sample_shape.size() == 3) {
    const nn::ActivationLayer act = hidden_activation(c);
    return nn::make_conv_discriminator(sample_shape[2], sample_shape[0], sample_shape[1], c.d_hidden.front(),
                                       act.kind == nn::Activation::Relu ? 0.0 : act.slope);
  }
  return nn::make_mlp(nn::Role::Discriminator, numel_of(sample_shape), c.d_hidden, 1, hidden_activation(c));
}

data::Dataset make_dataset(const RunConfig& c) {
  if (c.task == "squares") return data::make_square_images(256, 8, 1, 1234);
  if (c.task == "images") {
    if (c.data_dir.empty()) throw ConfigError("config key 'data_dir': required for task = images");
    return data::ImageDataset::load(c.data_dir);
  }
  return data::SyntheticDataset{data::parse_synthetic(c.task)};
}

train::TrainProblem make_problem(const RunConfig& c) {
  train::TrainProblem p{.g_spec = {}, .d_spec = {}, .dataset = make_dataset(c), .config = train_config(c),
                        .config_text = serialize(c)};
  const Shape shape = data::sample_shape(p.dataset);
  p.g_spec = generator_spec(c, shape);
  p.d_spec = discriminator_spec(c, shape);
  try {
    p.g_spec.validate();
    p.d_spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("network: ") + e.what());
  }
  return p;
}

}  // namespace pgn::cli
