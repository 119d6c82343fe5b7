#include "s2g/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "s2g/error.hpp"

namespace s2g {

namespace {

constexpr char kMagic[8] = {'S', '2', 'G', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little,
                "checkpoint I/O assumes a little-endian host");
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw IoError("checkpoint: truncated");
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.topology.dim));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.topology.hidden));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.topology.blocks));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.topology.time_features));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.topology.num_classes));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.T));
  put<double>(out, ckpt.beta_start);
  put<double>(out, ckpt.beta_end);
  put<std::uint64_t>(out, ckpt.train_config_hash);
  put<std::uint64_t>(out, ckpt.params.size());
  for (double v : ckpt.params) put<double>(out, v);
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw IoError("checkpoint: bad magic");
  const std::string body = bytes.substr(sizeof kMagic);
  Reader r(body);
  {
    if (r.get<std::uint32_t>() != kVersion) throw IoError("checkpoint: unsupported version");
    Checkpoint c;
    c.topology.dim = r.get<std::uint32_t>();
    c.topology.hidden = r.get<std::uint32_t>();
    c.topology.blocks = r.get<std::uint32_t>();
    c.topology.time_features = r.get<std::uint32_t>();
    c.topology.num_classes = r.get<std::uint32_t>();
    c.T = static_cast<int>(r.get<std::uint32_t>());
    c.beta_start = r.get<double>();
    c.beta_end = r.get<double>();
    c.train_config_hash = r.get<std::uint64_t>();
    const auto count = r.get<std::uint64_t>();
    if (count != c.topology.param_count() || r.remaining() != count * sizeof(double))
      throw IoError("checkpoint: parameter count does not match topology");
    c.params.resize(count);
    for (auto& v : c.params) v = r.get<double>();
    return c;
  }
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  const std::string bytes = encode_checkpoint(ckpt);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace s2g
