#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "lfl/mask.hpp"
#include "lfl/nn.hpp"

namespace lfl {

// theta (.) mask. Dead positions come out as exact positive zero.
template <typename Scalar>
ParamVector<Scalar> apply_mask(const ParamVector<Scalar>& p, const Mask& m) {
  require(p.same_shape(m), "apply_mask: shape mismatch");
  ParamVector<Scalar> out = p;
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    out.weights[l] = detail::masked(p.weights[l], m.weights[l]);
    out.biases[l] = detail::masked(p.biases[l], m.biases[l]);
  }
  return out;
}

// Layer-wise magnitude pruning: per weight layer, clears the
// floor(alive_in_layer * rate) alive bits with smallest |weight|. Bias bits
// are never candidates. Equal magnitudes are broken by lower flat
// (column-major) index first. The result is a subset of `mask`.
template <typename Scalar>
Mask prune(const ParamVector<Scalar>& p, const Mask& mask, double rate) {
  require(p.same_shape(mask), "prune: shape mismatch");
  require(rate >= 0.0 && rate < 1.0, "prune: rate must be in [0,1)");
  Mask out = mask;
  if (rate == 0.0) return out;
  std::vector<std::pair<Scalar, Eigen::Index>> alive;
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    alive.clear();
    const Scalar* w = p.weights[l].data();
    const std::uint8_t* m = mask.weights[l].data();
    for (Eigen::Index i = 0; i < p.weights[l].size(); ++i)
      if (m[i]) alive.emplace_back(std::abs(w[i]), i);
    const auto drop = static_cast<std::size_t>(static_cast<double>(alive.size()) * rate);
    if (drop == 0) continue;
    // (|w|, index) pairs order strictly, so the drop smallest form a unique set.
    std::nth_element(alive.begin(), alive.begin() + (drop - 1), alive.end());
    for (std::size_t k = 0; k < drop; ++k) out.weights[l].data()[alive[k].second] = 0;
  }
  return out;
}

// Lottery-ticket rewind: positions alive in new_mask take theta0's value
// bitwise, dead positions become 0.
template <typename Scalar>
ParamVector<Scalar> rewind(const ParamVector<Scalar>& p, const Mask& new_mask,
                           const ParamVector<Scalar>& theta0) {
  require(p.same_shape(new_mask) && theta0.same_shape(new_mask), "rewind: shape mismatch");
  return apply_mask(theta0, new_mask);
}

}  // namespace lfl
