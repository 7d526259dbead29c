#include "sentiaug/numerics/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

namespace sentiaug::num {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[4] = {'C', 'A', 'T', 'G'};
constexpr std::uint64_t kMaxRank = 16;
constexpr std::uint64_t kMaxName = 1 << 16;

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
bool get(std::istream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return static_cast<std::size_t>(in.gcount()) == sizeof(T);
}

[[noreturn]] void corrupt(const std::string& what) {
  throw CheckpointError("checkpoint corrupt: " + what);
}

}  // namespace

void write_checkpoint(std::ostream& out, const ParameterList& params) {
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  for (const auto& p : params) {
    put<std::uint64_t>(out, p.name.size());
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put<std::uint64_t>(out, p.tensor.rank());
    for (auto d : p.tensor.shape()) put<std::uint64_t>(out, d);
    auto data = p.tensor.data();
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
  }
  if (!out) throw CheckpointError("checkpoint: write failed");
}

ParameterList read_checkpoint(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) {
    throw CheckpointError("checkpoint: bad magic (expected CATG)");
  }
  std::uint32_t version = 0;
  if (!get(in, version)) corrupt("truncated header");
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint: unsupported version " + std::to_string(version));
  }
  ParameterList out;
  while (true) {
    std::uint64_t name_len = 0;
    in.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
    if (in.gcount() == 0 && in.eof()) break;
    if (in.gcount() != sizeof(name_len)) corrupt("truncated record header");
    if (name_len > kMaxName) corrupt("implausible name length");
    std::string name(name_len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(name_len));
    if (static_cast<std::uint64_t>(in.gcount()) != name_len) corrupt("truncated name");
    std::uint64_t rank = 0;
    if (!get(in, rank)) corrupt("truncated rank for '" + name + "'");
    if (rank == 0 || rank > kMaxRank) corrupt("bad rank for '" + name + "'");
    Shape shape(rank);
    for (auto& d : shape) {
      std::uint64_t v = 0;
      if (!get(in, v)) corrupt("truncated shape for '" + name + "'");
      if (v == 0) corrupt("zero dimension for '" + name + "'");
      d = v;
    }
    std::vector<double> data(shape_numel(shape));
    const auto bytes = static_cast<std::streamsize>(data.size() * sizeof(double));
    in.read(reinterpret_cast<char*>(data.data()), bytes);
    if (in.gcount() != bytes) corrupt("truncated data for '" + name + "'");
    out.push_back({std::move(name), Tensor::from(std::move(shape), std::move(data))});
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const ParameterList& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("checkpoint: cannot open " + path.string() + " for writing");
  write_checkpoint(out, params);
}

ParameterList load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path.string());
  return read_checkpoint(in);
}

void restore_parameters(const ParameterList& saved, const ParameterList& params) {
  std::unordered_map<std::string, const Tensor*> by_name;
  for (const auto& s : saved) by_name[s.name] = &s.tensor;
  for (const auto& p : params) {
    auto it = by_name.find(p.name);
    if (it == by_name.end()) throw CheckpointError("checkpoint: missing parameter '" + p.name + "'");
    if (it->second->shape() != p.tensor.shape()) {
      throw CheckpointError("checkpoint: parameter '" + p.name + "' has shape " +
                            shape_str(it->second->shape()) + ", expected " + shape_str(p.tensor.shape()));
    }
    auto dst = p.tensor;
    auto src = it->second->data();
    std::copy(src.begin(), src.end(), dst.mutable_data().begin());
  }
}

}  // namespace sentiaug::num
