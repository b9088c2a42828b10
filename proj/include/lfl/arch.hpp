#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace lfl {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Fully connected feed-forward architecture: layer_sizes holds the input
// dimension, hidden widths, and the class count. Hidden layers use ReLU,
// the output layer is linear (softmax applied by the loss).
struct ModelArch {
  std::vector<int> layer_sizes;

  int num_weight_layers() const { return static_cast<int>(layer_sizes.size()) - 1; }
  int input_dim() const { return layer_sizes.front(); }
  int class_count() const { return layer_sizes.back(); }

  std::int64_t total_params() const {
    std::int64_t n = 0;
    for (int l = 0; l + 1 < static_cast<int>(layer_sizes.size()); ++l)
      n += static_cast<std::int64_t>(layer_sizes[l]) * layer_sizes[l + 1] + layer_sizes[l + 1];
    return n;
  }

  std::int64_t total_weights() const {
    std::int64_t n = 0;
    for (int l = 0; l + 1 < static_cast<int>(layer_sizes.size()); ++l)
      n += static_cast<std::int64_t>(layer_sizes[l]) * layer_sizes[l + 1];
    return n;
  }

  void validate() const {
    require(layer_sizes.size() >= 2, "arch: need at least 2 layers");
    for (int s : layer_sizes) require(s >= 1, "arch: all layer sizes must be >= 1");
  }

  bool operator==(const ModelArch& o) const { return layer_sizes == o.layer_sizes; }
};

}  // namespace lfl
