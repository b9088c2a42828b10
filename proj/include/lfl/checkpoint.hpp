#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "lfl/server.hpp"

namespace lfl {

struct CheckpointError : std::runtime_error {
  explicit CheckpointError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CheckpointMeta {
  std::uint64_t seed = 0;
  std::uint64_t config_digest = 0;
  double target_fraction = 1.0;
};

struct Checkpoint {
  ModelArch arch;
  ServerState state;
  CheckpointMeta meta;
};

// Versioned binary format, magic "LFLCKPT1", little-endian fields:
// arch sizes, round, metadata, theta_g, theta_0, then per-client mask
// bitmaps.
void save_checkpoint(const std::string& path, const ServerState& state,
                     const CheckpointMeta& meta);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace lfl
