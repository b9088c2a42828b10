#include "lfl/comm_ledger.hpp"

#include <cstring>

namespace lfl {

std::vector<std::uint8_t> serialize_alive_values(const ParamVectorF& p, const Mask& m) {
  require(p.same_shape(m), "serialize_alive_values: shape mismatch");
  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(m.alive_count()) * 4);
  auto emit = [&out](float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    out.push_back(static_cast<std::uint8_t>(bits));
    out.push_back(static_cast<std::uint8_t>(bits >> 8));
    out.push_back(static_cast<std::uint8_t>(bits >> 16));
    out.push_back(static_cast<std::uint8_t>(bits >> 24));
  };
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    const float* w = p.weights[l].data();
    const std::uint8_t* wm = m.weights[l].data();
    for (Eigen::Index i = 0; i < p.weights[l].size(); ++i)
      if (wm[i]) emit(w[i]);
    const float* b = p.biases[l].data();
    const std::uint8_t* bm = m.biases[l].data();
    for (Eigen::Index i = 0; i < p.biases[l].size(); ++i)
      if (bm[i]) emit(b[i]);
  }
  return out;
}

std::string to_string(Direction d) { return d == Direction::Down ? "down" : "up"; }

std::string to_string(PayloadKind k) { return k == PayloadKind::Params ? "params" : "mask"; }

void CommLedger::write_csv(std::ostream& os) const {
  os << "round,client_id,direction,kind,bytes\n";
  for (const auto& e : entries_)
    os << e.round << ',' << e.client_id << ',' << to_string(e.dir) << ',' << to_string(e.kind)
       << ',' << e.bytes << '\n';
}

}  // namespace lfl
