#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "pgn/tensor.hpp"

namespace pgn::data {

enum class SyntheticKind { Ring8, Grid25, SwissRoll };

std::string to_string(SyntheticKind k);
SyntheticKind parse_synthetic(const std::string& s);

/// 2-D mixture. ring8: eight centers on a radius-2 circle at multiples of 45
/// degrees. grid25: centers on {-2..2}^2. swissroll: a noisy spiral with no
/// discrete modes.
struct SyntheticDataset {
  SyntheticKind kind = SyntheticKind::Ring8;
  double std = 0.02;

  /// (modes, 2); empty for swissroll.
  Tensor centers() const;
};

/// Images held as (height, width, channels) tensors with values in [-1, 1].
///
/// On disk: a directory with `index.txt` listing one tensor file per line,
/// each holding one channels x height x width tensor named "image".
struct ImageDataset {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<Tensor> images;

  /// Throws std::runtime_error for an empty index, mixed shapes or out-of-range values.
  static ImageDataset load(const std::filesystem::path& dir);
  void save(const std::filesystem::path& dir) const;
};

using Dataset = std::variant<SyntheticDataset, ImageDataset>;

/// Per-sample shape: {2} or {height, width, channels}.
Shape sample_shape(const Dataset& d);

/// n samples drawn with replacement; synthetic sets pick a center uniformly and add
/// isotropic Gaussian noise. Throws std::invalid_argument for n == 0 or an empty image set.
Tensor sample_real(const Dataset& d, std::size_t n, std::mt19937_64& rng);

/// Standard normal latents, (n, dim).
Tensor sample_latent(std::size_t n, std::size_t dim, std::mt19937_64& rng);

/// Small synthetic image set: one bright square per image at a random position.
ImageDataset make_square_images(std::size_t n, std::size_t size, std::size_t channels, std::uint64_t seed);

/// CHW <-> HWC for a single image.
Tensor chw_to_hwc(const Tensor& chw);
Tensor hwc_to_chw(const Tensor& hwc);

/// Writes (n, 2) samples as `x,y` rows.
void write_points_csv(const std::filesystem::path& path, const Tensor& samples);
Tensor read_points_csv(const std::filesystem::path& path);

/// Binary PGM (1 channel) or PPM (3 channels), [-1, 1] mapped linearly to [0, 255].
void write_image(const std::filesystem::path& path, const Tensor& hwc);

}  // namespace pgn::data
