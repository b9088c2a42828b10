#include "lfl/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace lfl {

namespace {

constexpr char kMagic[8] = {'L', 'F', 'L', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void write_pod(std::ofstream& f, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& f, const std::string& path) {
  T v;
  if (!f.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw CheckpointError(path + ": truncated checkpoint");
  return v;
}

void write_params(std::ofstream& f, const ParamVectorF& p) {
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    f.write(reinterpret_cast<const char*>(p.weights[l].data()),
            static_cast<std::streamsize>(sizeof(float) * p.weights[l].size()));
    f.write(reinterpret_cast<const char*>(p.biases[l].data()),
            static_cast<std::streamsize>(sizeof(float) * p.biases[l].size()));
  }
}

void read_params(std::ifstream& f, ParamVectorF& p, const std::string& path) {
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    if (!f.read(reinterpret_cast<char*>(p.weights[l].data()),
                static_cast<std::streamsize>(sizeof(float) * p.weights[l].size())) ||
        !f.read(reinterpret_cast<char*>(p.biases[l].data()),
                static_cast<std::streamsize>(sizeof(float) * p.biases[l].size())))
      throw CheckpointError(path + ": truncated parameter block");
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const ServerState& state,
                     const CheckpointMeta& meta) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot write checkpoint: " + path);
  f.write(kMagic, sizeof(kMagic));
  const ModelArch arch = state.theta_g.arch();
  write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(arch.layer_sizes.size()));
  for (int s : arch.layer_sizes) write_pod<std::int32_t>(f, s);
  write_pod<std::int32_t>(f, state.round);
  write_pod<std::uint64_t>(f, meta.seed);
  write_pod<std::uint64_t>(f, meta.config_digest);
  write_pod<double>(f, meta.target_fraction);
  write_params(f, state.theta_g);
  write_params(f, state.theta0);
  write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(state.client_masks.size()));
  for (const auto& [id, mask] : state.client_masks) {
    write_pod<std::int32_t>(f, id);
    const auto bitmap = mask_to_bitmap(mask);
    f.write(reinterpret_cast<const char*>(bitmap.data()),
            static_cast<std::streamsize>(bitmap.size()));
  }
  if (!f) throw CheckpointError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open checkpoint: " + path);
  char magic[8];
  if (!f.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    throw CheckpointError(path + ": not a checkpoint file (bad magic)");

  Checkpoint ck;
  const auto n_sizes = read_pod<std::uint32_t>(f, path);
  if (n_sizes < 2 || n_sizes > 64) throw CheckpointError(path + ": implausible layer count");
  for (std::uint32_t i = 0; i < n_sizes; ++i)
    ck.arch.layer_sizes.push_back(read_pod<std::int32_t>(f, path));
  ck.arch.validate();
  ck.state.round = read_pod<std::int32_t>(f, path);
  ck.meta.seed = read_pod<std::uint64_t>(f, path);
  ck.meta.config_digest = read_pod<std::uint64_t>(f, path);
  ck.meta.target_fraction = read_pod<double>(f, path);
  ck.state.theta_g = ParamVectorF::zeros(ck.arch);
  ck.state.theta0 = ParamVectorF::zeros(ck.arch);
  read_params(f, ck.state.theta_g, path);
  read_params(f, ck.state.theta0, path);
  const auto n_clients = read_pod<std::uint32_t>(f, path);
  const std::uint64_t bitmap_len = mask_bitmap_bytes(ck.arch);
  std::vector<std::uint8_t> buf(bitmap_len);
  for (std::uint32_t i = 0; i < n_clients; ++i) {
    const auto id = read_pod<std::int32_t>(f, path);
    if (!f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
      throw CheckpointError(path + ": truncated mask block");
    ck.state.client_masks[id] = mask_from_bitmap(ck.arch, buf.data(), buf.size());
  }
  return ck;
}

}  // namespace lfl
