#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

// Deterministic randomness helpers. All distribution mappings are written out
// explicitly (instead of <random> distributions, whose outputs are
// implementation-defined) so that seeded runs reproduce bit-for-bit.
namespace lfl::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and a path of ids,
// e.g. stream_seed(seed, {kClientRound, client_id, round}).
inline std::uint64_t stream_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t p : path) h = splitmix64(h ^ p);
  return h;
}

// Stream tags keep unrelated draws decoupled: adding draws to one stream
// never perturbs another.
enum StreamTag : std::uint64_t {
  kInitParams = 0x11,
  kClientRound = 0x22,
  kSampler = 0x33,
  kPartitionClasses = 0x44,
  kPartitionIndices = 0x55,
  kSynthetic = 0x66,
  kProjection = 0x77,
};

inline std::mt19937 make_engine(std::uint64_t seed) {
  return std::mt19937(static_cast<std::uint32_t>(seed ^ (seed >> 32)));
}

// Unbiased integer in [0, n). n must be > 0.
inline std::uint32_t bounded(std::mt19937& g, std::uint32_t n) {
  const std::uint64_t span = 0x100000000ull;
  const std::uint32_t limit = static_cast<std::uint32_t>(span - span % n);
  std::uint32_t x = g();
  while (limit != 0 && x >= limit) x = g();
  return x % n;
}

// Uniform in [0, 1) with 24 bits of mantissa.
inline float unit_float(std::mt19937& g) {
  return static_cast<float>(g() >> 8) * (1.0f / 16777216.0f);
}

inline double unit_double(std::mt19937& g) {
  return static_cast<double>(g()) * (1.0 / 4294967296.0);
}

// Standard normal via Box-Muller; two engine draws per call.
inline double normal(std::mt19937& g) {
  const double u1 = (static_cast<double>(g()) + 1.0) * (1.0 / 4294967296.0);
  const double u2 = unit_double(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = bounded(g, static_cast<std::uint32_t>(i));
    std::swap(v[i - 1], v[j]);
  }
}

// First n entries of a Fisher-Yates pass over [0, pool_size); the draw order
// is meaningful (callers may treat earlier picks specially).
inline std::vector<int> sample_without_replacement(int pool_size, int n, std::mt19937& g) {
  std::vector<int> pool(pool_size);
  for (int i = 0; i < pool_size; ++i) pool[i] = i;
  for (int i = 0; i < n; ++i) {
    int j = i + static_cast<int>(bounded(g, static_cast<std::uint32_t>(pool_size - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(n);
  return pool;
}

}  // namespace lfl::rng
