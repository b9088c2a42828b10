#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "lfl/arch.hpp"

namespace lfl {

using MaskMatrix = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;
using MaskVector = Eigen::Array<std::uint8_t, Eigen::Dynamic, 1>;

// Binary mask aligned 1:1 with a ParamVector. Bit 1 = parameter alive.
// Layer l holds the weight block (in x out, column-major) and its bias block.
struct Mask {
  std::vector<MaskMatrix> weights;
  std::vector<MaskVector> biases;

  std::int64_t alive_count() const {
    std::int64_t n = 0;
    for (const auto& w : weights) n += (w != 0).count();
    for (const auto& b : biases) n += (b != 0).count();
    return n;
  }

  std::int64_t alive_weight_count() const {
    std::int64_t n = 0;
    for (const auto& w : weights) n += (w != 0).count();
    return n;
  }

  std::int64_t total_len() const {
    std::int64_t n = 0;
    for (const auto& w : weights) n += w.size();
    for (const auto& b : biases) n += b.size();
    return n;
  }

  bool same_shape(const Mask& o) const {
    if (weights.size() != o.weights.size()) return false;
    for (std::size_t l = 0; l < weights.size(); ++l)
      if (weights[l].rows() != o.weights[l].rows() || weights[l].cols() != o.weights[l].cols() ||
          biases[l].size() != o.biases[l].size())
        return false;
    return true;
  }

  // True if every set bit of this mask is also set in `super`.
  bool subset_of(const Mask& super) const {
    for (std::size_t l = 0; l < weights.size(); ++l) {
      if (((weights[l] != 0) && (super.weights[l] == 0)).any()) return false;
      if (((biases[l] != 0) && (super.biases[l] == 0)).any()) return false;
    }
    return true;
  }

  bool operator==(const Mask& o) const {
    if (!same_shape(o)) return false;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      if (((weights[l] != 0) != (o.weights[l] != 0)).any()) return false;
      if (((biases[l] != 0) != (o.biases[l] != 0)).any()) return false;
    }
    return true;
  }
};

// Tracks a client's pruning history. remaining_fraction counts prunable
// (weight) positions only; biases are never prune candidates.
struct PruneState {
  int prune_events = 0;
  double remaining_fraction = 1.0;
};

Mask full_mask(const ModelArch& arch);

double remaining_weight_fraction(const Mask& mask);

// Per-layer little-endian bitmaps, each array ([W_0, b_0, W_1, b_1, ...],
// column-major within a weight block) padded to whole bytes.
std::vector<std::uint8_t> mask_to_bitmap(const Mask& mask);
Mask mask_from_bitmap(const ModelArch& arch, const std::uint8_t* data, std::size_t len);
std::uint64_t mask_bitmap_bytes(const ModelArch& arch);

}  // namespace lfl
