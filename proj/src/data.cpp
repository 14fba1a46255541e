#include "pgn/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "pgn/tensor_io.hpp"

namespace pgn::data {

std::string to_string(SyntheticKind k) {
  switch (k) {
    case SyntheticKind::Ring8: return "ring8";
    case SyntheticKind::Grid25: return "grid25";
    case SyntheticKind::SwissRoll: return "swissroll";
  }
  return "?";
}

SyntheticKind parse_synthetic(const std::string& s) {
  if (s == "ring8") return SyntheticKind::Ring8;
  if (s == "grid25") return SyntheticKind::Grid25;
  if (s == "swissroll") return SyntheticKind::SwissRoll;
  throw std::invalid_argument("unknown synthetic dataset '" + s + "'");
}

Tensor SyntheticDataset::centers() const {
  switch (kind) {
    case SyntheticKind::Ring8: {
      Tensor c = Tensor::zeros({8, 2});
      for (std::size_t k = 0; k < 8; ++k) {
        const double angle = static_cast<double>(k) * std::numbers::pi / 4.0;
        c[2 * k] = 2.0 * std::cos(angle);
        c[2 * k + 1] = 2.0 * std::sin(angle);
      }
      return c;
    }
    case SyntheticKind::Grid25: {
      Tensor c = Tensor::zeros({25, 2});
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
          c[2 * (i * 5 + j)] = i - 2.0;
          c[2 * (i * 5 + j) + 1] = j - 2.0;
        }
      return c;
    }
    case SyntheticKind::SwissRoll: return Tensor::zeros({0, 2});
  }
  return {};
}

ImageDataset ImageDataset::load(const std::filesystem::path& dir) {
  std::ifstream index(dir / "index.txt");
  if (!index) throw std::runtime_error("image dataset: missing " + (dir / "index.txt").string());
  ImageDataset ds;
  std::string line;
  while (std::getline(index, line)) {
    if (line.empty() || line[0] == '#') continue;
    const Tensor chw = io::read_file(dir / line).get("image");
    if (chw.rank() != 3) throw std::runtime_error("image dataset: " + line + " is not a C x H x W tensor");
    if (ds.images.empty()) {
      ds.channels = chw.shape()[0];
      ds.height = chw.shape()[1];
      ds.width = chw.shape()[2];
    } else if (chw.shape() != Shape{ds.channels, ds.height, ds.width}) {
      throw std::runtime_error("image dataset: " + line + " has shape " + pgn::to_string(chw.shape()) +
                               ", expected " + pgn::to_string(Shape{ds.channels, ds.height, ds.width}));
    }
    for (double v : chw.data())
      if (!(v >= -1.0 && v <= 1.0)) throw std::runtime_error("image dataset: " + line + " has values outside [-1, 1]");
    ds.images.push_back(chw_to_hwc(chw));
  }
  if (ds.images.empty()) throw std::runtime_error("image dataset: index lists no images");
  return ds;
}

void ImageDataset::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::ofstream index(dir / "index.txt");
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string name = "img" + std::to_string(i) + ".pgn";
    io::write_file(dir / name, io::TensorFile{0, {{"image", hwc_to_chw(images[i])}}});
    index << name << '\n';
  }
}

Shape sample_shape(const Dataset& d) {
  if (const auto* img = std::get_if<ImageDataset>(&d)) return {img->height, img->width, img->channels};
  return {2};
}

Tensor sample_real(const Dataset& d, std::size_t n, std::mt19937_64& rng) {
  if (n == 0) throw std::invalid_argument("sample_real: n must be at least 1");
  if (const auto* img = std::get_if<ImageDataset>(&d)) {
    if (img->images.empty()) throw std::invalid_argument("sample_real: image dataset is empty");
    const std::size_t per = img->height * img->width * img->channels;
    Tensor out = Tensor::zeros({n, img->height, img->width, img->channels});
    std::uniform_int_distribution<std::size_t> pick(0, img->images.size() - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const Tensor& src = img->images[pick(rng)];
      std::copy(src.data().begin(), src.data().end(), out.data().begin() + i * per);
    }
    return out;
  }
  const auto& syn = std::get<SyntheticDataset>(d);
  Tensor out = Tensor::zeros({n, 2});
  std::normal_distribution<double> noise(0.0, 1.0);
  if (syn.kind == SyntheticKind::SwissRoll) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = 1.5 * std::numbers::pi * (1.0 + 2.0 * unit(rng));
      out[2 * i] = t * std::cos(t) / 7.0 + syn.std * noise(rng);
      out[2 * i + 1] = t * std::sin(t) / 7.0 + syn.std * noise(rng);
    }
    return out;
  }
  const Tensor c = syn.centers();
  std::uniform_int_distribution<std::size_t> pick(0, c.rows() - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = pick(rng);
    out[2 * i] = c[2 * k] + syn.std * noise(rng);
    out[2 * i + 1] = c[2 * k + 1] + syn.std * noise(rng);
  }
  return out;
}

Tensor sample_latent(std::size_t n, std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor z = Tensor::zeros({n, dim});
  for (double& v : z.data()) v = normal(rng);
  return z;
}

ImageDataset make_square_images(std::size_t n, std::size_t size, std::size_t channels, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t side = std::max<std::size_t>(1, size / 3);
  std::uniform_int_distribution<std::size_t> pos(0, size - side);
  ImageDataset ds{channels, size, size, {}};
  for (std::size_t i = 0; i < n; ++i) {
    Tensor img = Tensor::filled({size, size, channels}, -1.0);
    const std::size_t y0 = pos(rng), x0 = pos(rng);
    for (std::size_t y = y0; y < y0 + side; ++y)
      for (std::size_t x = x0; x < x0 + side; ++x)
        for (std::size_t c = 0; c < channels; ++c) img[(y * size + x) * channels + c] = 1.0;
    ds.images.push_back(std::move(img));
  }
  return ds;
}

Tensor chw_to_hwc(const Tensor& chw) {
  const std::size_t c = chw.shape()[0], h = chw.shape()[1], w = chw.shape()[2];
  Tensor out = Tensor::zeros({h, w, c});
  for (std::size_t k = 0; k < c; ++k)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) out[(y * w + x) * c + k] = chw[(k * h + y) * w + x];
  return out;
}

Tensor hwc_to_chw(const Tensor& hwc) {
  const std::size_t h = hwc.shape()[0], w = hwc.shape()[1], c = hwc.shape()[2];
  Tensor out = Tensor::zeros({c, h, w});
  for (std::size_t k = 0; k < c; ++k)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) out[(k * h + y) * w + x] = hwc[(y * w + x) * c + k];
  return out;
}

void write_points_csv(const std::filesystem::path& path, const Tensor& samples) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "x,y\n";
  char buf[64];
  for (std::size_t i = 0; i < samples.numel() / 2; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", samples[2 * i], samples[2 * i + 1]);
    out << buf;
  }
}

Tensor read_points_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty() || line == "x,y") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
    values.push_back(std::stod(line.substr(0, comma)));
    values.push_back(std::stod(line.substr(comma + 1)));
  }
  const std::size_t n = values.size() / 2;
  return Tensor({n, 2}, std::move(values));
}

void write_image(const std::filesystem::path& path, const Tensor& hwc) {
  const std::size_t h = hwc.shape()[0], w = hwc.shape()[1], c = hwc.shape()[2];
  if (c != 1 && c != 3) throw std::invalid_argument("write_image: need 1 or 3 channels, got " + std::to_string(c));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << (c == 1 ? "P5" : "P6") << '\n' << w << ' ' << h << "\n255\n";
  for (double v : hwc.data()) {
    const double scaled = std::round((std::clamp(v, -1.0, 1.0) + 1.0) * 127.5);
    out.put(static_cast<char>(static_cast<unsigned char>(scaled)));
  }
}

}  // namespace pgn::data
