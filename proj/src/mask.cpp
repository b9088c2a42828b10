#include "lfl/mask.hpp"

namespace lfl {

Mask full_mask(const ModelArch& arch) {
  arch.validate();
  Mask m;
  for (int l = 0; l + 1 < static_cast<int>(arch.layer_sizes.size()); ++l) {
    m.weights.push_back(MaskMatrix::Ones(arch.layer_sizes[l], arch.layer_sizes[l + 1]));
    m.biases.push_back(MaskVector::Ones(arch.layer_sizes[l + 1]));
  }
  return m;
}

double remaining_weight_fraction(const Mask& mask) {
  std::int64_t total = 0;
  for (const auto& w : mask.weights) total += w.size();
  return static_cast<double>(mask.alive_weight_count()) / static_cast<double>(total);
}

namespace {

void pack_bits(const std::uint8_t* bits, std::int64_t len, std::vector<std::uint8_t>& out) {
  const std::int64_t bytes = (len + 7) / 8;
  const std::size_t base = out.size();
  out.resize(base + bytes, 0);
  for (std::int64_t i = 0; i < len; ++i)
    if (bits[i]) out[base + i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
}

void unpack_bits(const std::uint8_t*& data, std::size_t& len, std::uint8_t* bits,
                 std::int64_t count) {
  const std::int64_t bytes = (count + 7) / 8;
  require(static_cast<std::int64_t>(len) >= bytes, "mask bitmap: truncated");
  for (std::int64_t i = 0; i < count; ++i)
    bits[i] = (data[i / 8] >> (i % 8)) & 1u;
  data += bytes;
  len -= bytes;
}

}  // namespace

std::vector<std::uint8_t> mask_to_bitmap(const Mask& mask) {
  std::vector<std::uint8_t> out;
  for (std::size_t l = 0; l < mask.weights.size(); ++l) {
    pack_bits(mask.weights[l].data(), mask.weights[l].size(), out);
    pack_bits(mask.biases[l].data(), mask.biases[l].size(), out);
  }
  return out;
}

Mask mask_from_bitmap(const ModelArch& arch, const std::uint8_t* data, std::size_t len) {
  Mask m = full_mask(arch);
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    unpack_bits(data, len, m.weights[l].data(), m.weights[l].size());
    unpack_bits(data, len, m.biases[l].data(), m.biases[l].size());
  }
  return m;
}

std::uint64_t mask_bitmap_bytes(const ModelArch& arch) {
  std::uint64_t bytes = 0;
  for (int l = 0; l + 1 < static_cast<int>(arch.layer_sizes.size()); ++l) {
    const std::uint64_t w = static_cast<std::uint64_t>(arch.layer_sizes[l]) * arch.layer_sizes[l + 1];
    const std::uint64_t b = arch.layer_sizes[l + 1];
    bytes += (w + 7) / 8 + (b + 7) / 8;
  }
  return bytes;
}

}  // namespace lfl
