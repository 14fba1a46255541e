#pragma once

// Binary container shared by checkpoints and image datasets.
//
//   "PGN1" | u32 version=1 | u64 step | u64 count |
//   count x ( u32 name_len | name | u32 rank | rank x u64 extent | f64 data... ) |
//   u32 crc32 of every preceding byte
//
// All integers and doubles are little-endian.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgn/tensor.hpp"

namespace pgn::io {

inline constexpr char kMagic[4] = {'P', 'G', 'N', '1'};
inline constexpr std::uint32_t kVersion = 1;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NamedTensor {
  std::string name;
  Tensor value;
  bool operator==(const NamedTensor&) const = default;
};

struct TensorFile {
  std::uint64_t step = 0;
  std::vector<NamedTensor> tensors;

  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const;
};

std::uint32_t crc32(const std::uint8_t* data, std::size_t size);

std::vector<std::uint8_t> encode(const TensorFile& file);
/// Throws FormatError on bad magic, unsupported version, truncation or CRC mismatch.
TensorFile decode(const std::vector<std::uint8_t>& bytes);

void write_file(const std::filesystem::path& path, const TensorFile& file);
TensorFile read_file(const std::filesystem::path& path);

}  // namespace pgn::io
