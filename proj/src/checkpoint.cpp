#include "rlab/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <string>

#include "rlab/error.hpp"

namespace rlab {
namespace {

constexpr char kMagic[4] = {'R', 'L', 'A', 'B'};

template <typename U>
void put_le(std::ostream& os, U value) {
  unsigned char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFF);
  os.write(reinterpret_cast<const char*>(bytes), sizeof(U));
}

template <typename U>
bool get_le(std::istream& is, U& value) {
  unsigned char bytes[sizeof(U)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(U))) return false;
  value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return true;
}

[[noreturn]] void malformed(const std::filesystem::path& path, const std::string& why) {
  fail(ErrorKind::io, "malformed checkpoint " + path.string() + ": " + why);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelWeights& weights) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
  os.write(kMagic, 4);
  put_le<std::uint32_t>(os, kCheckpointVersion);
  put_le<std::uint64_t>(os, weights.dims.architecture_hash());
  weights.for_each([&](const char* name, const DenseArray& a) {
    const auto len = static_cast<std::uint32_t>(std::strlen(name));
    put_le<std::uint32_t>(os, len);
    os.write(name, len);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(a.shape().rank()));
    for (int d : a.shape().dims()) put_le<std::uint32_t>(os, static_cast<std::uint32_t>(d));
    for (float v : a.values()) put_le<std::uint32_t>(os, std::bit_cast<std::uint32_t>(v));
  });
  if (!os) fail(ErrorKind::io, "write failed for " + path.string());
}

ModelWeights load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::missing_artifact, "checkpoint not found: " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) malformed(path, "bad magic");
  std::uint32_t version = 0;
  std::uint64_t hash = 0;
  if (!get_le(is, version) || !get_le(is, hash)) malformed(path, "truncated header");
  if (version != kCheckpointVersion) malformed(path, "unsupported version " + std::to_string(version));

  std::map<std::string, DenseArray> tensors;
  while (is.peek() != std::char_traits<char>::eof()) {
    std::uint32_t len = 0, rank = 0;
    if (!get_le(is, len) || len == 0 || len > 256) malformed(path, "bad tensor name length");
    std::string name(len, '\0');
    if (!is.read(name.data(), len)) malformed(path, "truncated tensor name");
    if (!get_le(is, rank) || rank == 0 || rank > 4) malformed(path, "bad rank for " + name);
    std::vector<int> dims(rank);
    for (auto& d : dims) {
      std::uint32_t v = 0;
      if (!get_le(is, v) || v == 0 || v > (1u << 24)) malformed(path, "bad dims for " + name);
      d = static_cast<int>(v);
    }
    const Shape shape{std::span<const int>(dims)};
    std::vector<float> values(shape.numel());
    for (auto& v : values) {
      std::uint32_t bits = 0;
      if (!get_le(is, bits)) malformed(path, "truncated payload for " + name);
      v = std::bit_cast<float>(bits);
      if (!std::isfinite(v)) malformed(path, "non-finite value in " + name);
    }
    tensors.emplace(name, DenseArray(shape, std::move(values)));
  }

  auto find = [&](const char* name) -> const DenseArray& {
    auto it = tensors.find(name);
    if (it == tensors.end()) malformed(path, std::string("missing tensor ") + name);
    return it->second;
  };
  ModelDims dims;
  const DenseArray& patch_in = find("patch_in");
  const DenseArray& pos = find("pos_embed");
  dims.width = patch_in.cols();
  dims.channels = 3;
  dims.patch = static_cast<int>(std::lround(std::sqrt(patch_in.rows() / 3.0)));
  dims.image_size = static_cast<int>(std::lround(std::sqrt(static_cast<double>(pos.rows())))) * dims.patch;
  dims.timesteps = find("time_table").rows();
  dims.ffn_hidden = find("ffn_in").cols();
  if (dims.architecture_hash() != hash) malformed(path, "architecture hash mismatch");

  ModelWeights w = ModelWeights::zeros(dims);
  w.for_each([&](const char* name, DenseArray& a) {
    const DenseArray& src = find(name);
    if (!(src.shape() == a.shape())) {
      malformed(path, std::string("tensor ") + name + " has shape " + src.shape().str() + ", expected " +
                          a.shape().str());
    }
    a = src;
  });
  return w;
}

}  // namespace rlab
