#include "pgn/train.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <zlib.h>

#include "pgn/tensor_io.hpp"

namespace pgn::io {

static_assert(std::endian::native == std::endian::little, "container codec assumes a little-endian host");

namespace {

class Writer {
 public:
  template <class T>
  void put(T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& bytes, std::size_t limit) : bytes_(bytes), limit_(limit) {}

  template <class T>
  T get() {
    T v;
    get_bytes(&v, sizeof(T));
    return v;
  }
  void get_bytes(void* out, std::size_t n) {
    if (n > limit_ - pos_) throw FormatError("tensor file is truncated");
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t remaining() const { return limit_ - pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t limit_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint32_t crc32(const std::uint8_t* data, std::size_t size) {
  return static_cast<std::uint32_t>(::crc32_z(::crc32_z(0, nullptr, 0), data, size));
}

const Tensor& TensorFile::get(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t.value;
  throw FormatError("tensor file has no entry named " + name);
}

bool TensorFile::contains(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return true;
  return false;
}

std::vector<std::uint8_t> encode(const TensorFile& file) {
  Writer w;
  w.put_bytes(kMagic, 4);
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint64_t>(file.step);
  w.put<std::uint64_t>(file.tensors.size());
  for (const auto& [name, value] : file.tensors) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
    w.put_bytes(name.data(), name.size());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(value.rank()));
    for (std::size_t e : value.shape()) w.put<std::uint64_t>(e);
    w.put_bytes(value.data().data(), value.numel() * sizeof(double));
  }
  const std::uint32_t crc = crc32(w.bytes().data(), w.bytes().size());
  w.put<std::uint32_t>(crc);
  return std::move(w.bytes());
}

TensorFile decode(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError("not a PGN1 tensor file (bad magic)");
  if (bytes.size() < 8 + 16 + 4) throw FormatError("tensor file is truncated");
  Reader r(bytes, bytes.size() - 4);
  char magic[4];
  r.get_bytes(magic, 4);
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) throw FormatError("unsupported tensor file version " + std::to_string(version));
  TensorFile file;
  file.step = r.get<std::uint64_t>();
  const auto count = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto name_len = r.get<std::uint32_t>();
    if (name_len > r.remaining()) throw FormatError("tensor file is truncated");
    std::string name(name_len, '\0');
    r.get_bytes(name.data(), name_len);
    const auto rank = r.get<std::uint32_t>();
    if (rank > r.remaining() / 8) throw FormatError("tensor file is truncated");
    Shape shape(rank);
    std::size_t n = 1;
    for (auto& e : shape) {
      e = static_cast<std::size_t>(r.get<std::uint64_t>());
      if (e != 0 && n > r.remaining() / 8 / e) throw FormatError("tensor file is truncated");
      n *= e;
    }
    std::vector<double> data(n);
    r.get_bytes(data.data(), n * sizeof(double));
    file.tensors.push_back({std::move(name), Tensor(std::move(shape), std::move(data))});
  }
  if (r.remaining() != 0) throw FormatError("tensor file has trailing bytes before the checksum");
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - 4, 4);
  if (stored != crc32(bytes.data(), bytes.size() - 4)) throw FormatError("tensor file checksum mismatch");
  return file;
}

void write_file(const std::filesystem::path& path, const TensorFile& file) {
  const std::vector<std::uint8_t> bytes = encode(file);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

TensorFile read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode(bytes);
}

}  // namespace pgn::io

namespace pgn::train {

namespace {

Tensor text_tensor(const std::string& s) {
  std::vector<double> v(s.begin(), s.end());
  const std::size_t n = v.size();
  return Tensor({n}, std::move(v));
}

std::string tensor_text(const Tensor& t) {
  std::string s;
  s.reserve(t.numel());
  for (double c : t.data()) s.push_back(static_cast<char>(static_cast<int>(c)));
  return s;
}

void put_store(io::TensorFile& f, const std::string& prefix, const nn::ParameterStore& store) {
  for (const auto& e : store) f.tensors.push_back({prefix + e.name, e.value});
}

nn::ParameterStore get_store(const io::TensorFile& f, const std::string& prefix) {
  nn::ParameterStore store;
  for (const auto& t : f.tensors)
    if (t.name.starts_with(prefix)) store.add(t.name.substr(prefix.size()), t.value);
  return store;
}

void put_adam(io::TensorFile& f, const std::string& prefix, const AdamState& s) {
  for (std::size_t i = 0; i < s.m.size(); ++i) {
    f.tensors.push_back({prefix + "m/" + std::to_string(i), s.m[i]});
    f.tensors.push_back({prefix + "v/" + std::to_string(i), s.v[i]});
  }
  f.tensors.push_back({prefix + "t", Tensor::scalar(static_cast<double>(s.t))});
}

AdamState get_adam(const io::TensorFile& f, const std::string& prefix) {
  AdamState s;
  for (std::size_t i = 0; f.contains(prefix + "m/" + std::to_string(i)); ++i) {
    s.m.push_back(f.get(prefix + "m/" + std::to_string(i)));
    s.v.push_back(f.get(prefix + "v/" + std::to_string(i)));
  }
  s.t = static_cast<std::uint64_t>(f.get(prefix + "t").item());
  return s;
}

}  // namespace

bool Checkpoint::bit_equal(const Checkpoint& o) const {
  return step == o.step && generator.bit_equal(o.generator) && discriminator.bit_equal(o.discriminator) &&
         ema.bit_equal(o.ema) && adam_g.bit_equal(o.adam_g) && adam_d.bit_equal(o.adam_d) &&
         rng_state == o.rng_state && d_updates == o.d_updates && g_updates == o.g_updates &&
         config_text == o.config_text;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  io::TensorFile f;
  f.step = ckpt.step;
  put_store(f, "G/", ckpt.generator);
  put_store(f, "D/", ckpt.discriminator);
  put_store(f, "EMA/", ckpt.ema);
  put_adam(f, "adam_g/", ckpt.adam_g);
  put_adam(f, "adam_d/", ckpt.adam_d);
  f.tensors.push_back({"rng", text_tensor(ckpt.rng_state)});
  f.tensors.push_back(
      {"counters", Tensor::vector({static_cast<double>(ckpt.d_updates), static_cast<double>(ckpt.g_updates)})});
  f.tensors.push_back({"config", text_tensor(ckpt.config_text)});
  io::write_file(path, f);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const io::TensorFile f = io::read_file(path);
  Checkpoint c;
  c.step = f.step;
  c.generator = get_store(f, "G/");
  c.discriminator = get_store(f, "D/");
  c.ema = get_store(f, "EMA/");
  c.adam_g = get_adam(f, "adam_g/");
  c.adam_d = get_adam(f, "adam_d/");
  c.rng_state = tensor_text(f.get("rng"));
  const Tensor& counters = f.get("counters");
  if (counters.numel() != 2) throw io::FormatError("checkpoint: malformed counters");
  c.d_updates = static_cast<std::uint64_t>(counters[0]);
  c.g_updates = static_cast<std::uint64_t>(counters[1]);
  c.config_text = tensor_text(f.get("config"));
  return c;
}

}  // namespace pgn::train
