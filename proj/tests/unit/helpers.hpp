#pragma once

#include <cstring>

#include "lfl/client.hpp"
#include "lfl/dataset.hpp"
#include "lfl/masking.hpp"

namespace lfl::test {

inline bool params_equal(const ParamVectorF& a, const ParamVectorF& b) {
  if (!a.same_shape(b)) return false;
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    if (std::memcmp(a.weights[l].data(), b.weights[l].data(),
                    sizeof(float) * a.weights[l].size()) != 0)
      return false;
    if (std::memcmp(a.biases[l].data(), b.biases[l].data(),
                    sizeof(float) * a.biases[l].size()) != 0)
      return false;
  }
  return true;
}

inline BatchF blob_batch(int per_class, int classes, int dim, double separation,
                         std::uint64_t seed) {
  const Dataset d = make_synthetic(classes, dim, per_class, separation, seed);
  std::vector<int> all(d.size());
  for (int i = 0; i < static_cast<int>(all.size()); ++i) all[i] = i;
  return gather(d, all);
}

// A client over easy two-blob data; val/test drawn from the same generator.
inline ClientState blob_client(int id, const ModelArch& arch, std::uint64_t seed,
                               int per_class = 10) {
  ClientState cs;
  cs.id = id;
  cs.mask = full_mask(arch);
  cs.global_seed = seed;
  const int classes = arch.class_count();
  const int dim = arch.input_dim();
  cs.data.train = blob_batch(per_class, classes, dim, 6.0, seed * 131 + 1);
  cs.data.val = blob_batch(std::max(2, per_class / 4), classes, dim, 6.0, seed * 131 + 2);
  cs.data.test = blob_batch(per_class, classes, dim, 6.0, seed * 131 + 3);
  return cs;
}

inline Mask random_mask(const ModelArch& arch, double alive_prob, std::mt19937& g) {
  Mask m = full_mask(arch);
  for (auto& w : m.weights)
    for (Eigen::Index i = 0; i < w.size(); ++i)
      w.data()[i] = rng::unit_float(g) < alive_prob ? 1 : 0;
  return m;
}

}  // namespace lfl::test
