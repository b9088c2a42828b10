#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "lfl/mask.hpp"
#include "lfl/nn.hpp"

namespace lfl {

// Encoding model: parameter payloads are the alive values only, 4 bytes each
// (the receiver knows the positions from the most recent mask). Mask bitmaps
// are charged on upload only in rounds where the client pruned.

inline std::uint64_t params_bytes(const Mask& mask) {
  return static_cast<std::uint64_t>(mask.alive_count()) * 4;
}

inline std::uint64_t mask_bytes(const Mask& mask) {
  std::uint64_t bytes = 0;
  for (const auto& w : mask.weights) bytes += (static_cast<std::uint64_t>(w.size()) + 7) / 8;
  for (const auto& b : mask.biases) bytes += (static_cast<std::uint64_t>(b.size()) + 7) / 8;
  return bytes;
}

inline std::uint64_t full_params_bytes(const ModelArch& arch) {
  return static_cast<std::uint64_t>(arch.total_params()) * 4;
}

// Bytes of the layers at index >= split_index (the federated part of an
// LG-FedAvg model).
inline std::uint64_t lg_global_params_bytes(const ModelArch& arch, int split_index) {
  std::uint64_t n = 0;
  for (int l = split_index; l + 1 < static_cast<int>(arch.layer_sizes.size()); ++l)
    n += static_cast<std::uint64_t>(arch.layer_sizes[l]) * arch.layer_sizes[l + 1] +
         arch.layer_sizes[l + 1];
  return n * 4;
}

// Wire form of a parameter payload: alive values in flat order, 32-bit
// little-endian each.
std::vector<std::uint8_t> serialize_alive_values(const ParamVectorF& p, const Mask& m);

enum class Direction { Down, Up };
enum class PayloadKind { Params, MaskBitmap };

std::string to_string(Direction d);
std::string to_string(PayloadKind k);

struct LedgerEntry {
  int round;
  int client_id;
  Direction dir;
  PayloadKind kind;
  std::uint64_t bytes;
};

class CommLedger {
 public:
  void add(int round, int client_id, Direction dir, PayloadKind kind, std::uint64_t bytes) {
    entries_.push_back({round, client_id, dir, kind, bytes});
    total_ += bytes;
  }

  const std::vector<LedgerEntry>& entries() const { return entries_; }
  std::uint64_t total_bytes() const { return total_; }
  // Reports use decimal megabytes: 1 MB = 10^6 bytes.
  double total_mb() const { return static_cast<double>(total_) / 1e6; }

  std::uint64_t bytes_for_round(int round) const {
    std::uint64_t n = 0;
    for (const auto& e : entries_)
      if (e.round == round) n += e.bytes;
    return n;
  }

  void write_csv(std::ostream& os) const;

 private:
  std::vector<LedgerEntry> entries_;
  std::uint64_t total_ = 0;
};

}  // namespace lfl
