#include "lfl/server.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace lfl {

std::vector<int> sample_clients(int num_clients, double sample_rate, std::mt19937& g) {
  require(num_clients >= 1, "sample_clients: num_clients must be >= 1");
  require(sample_rate > 0.0 && sample_rate <= 1.0, "sample_clients: rate must be in (0,1]");
  const int k = std::max(static_cast<int>(num_clients * sample_rate), 1);
  std::vector<int> picked = rng::sample_without_replacement(num_clients, k, g);
  std::sort(picked.begin(), picked.end());
  return picked;
}

ParamVectorF aggregate_ltns(const ParamVectorF& theta_g,
                            const std::vector<ClientUpload>& updates) {
  if (updates.empty()) return theta_g;
  for (const auto& u : updates)
    require(u.theta->same_shape(theta_g) && u.theta->same_shape(*u.mask),
            "aggregate_ltns: shape mismatch");

  ParamVectorF out = theta_g;
  auto sum = ParamVector<float>::zeros(theta_g.arch());
  std::vector<MatrixX<int>> wcount;
  std::vector<VectorX<int>> bcount;
  for (const auto& w : theta_g.weights) wcount.push_back(MatrixX<int>::Zero(w.rows(), w.cols()));
  for (const auto& b : theta_g.biases) bcount.push_back(VectorX<int>::Zero(b.size()));

  // Sum covered values only, in update-list order, so the arithmetic matches
  // a per-position sum over the covering set exactly.
  for (const auto& u : updates) {
    for (std::size_t l = 0; l < sum.weights.size(); ++l) {
      float* s = sum.weights[l].data();
      int* c = wcount[l].data();
      const float* v = u.theta->weights[l].data();
      const std::uint8_t* m = u.mask->weights[l].data();
      for (Eigen::Index i = 0; i < sum.weights[l].size(); ++i)
        if (m[i]) {
          s[i] += v[i];
          c[i] += 1;
        }
      float* sb = sum.biases[l].data();
      int* cb = bcount[l].data();
      const float* vb = u.theta->biases[l].data();
      const std::uint8_t* mb = u.mask->biases[l].data();
      for (Eigen::Index i = 0; i < sum.biases[l].size(); ++i)
        if (mb[i]) {
          sb[i] += vb[i];
          cb[i] += 1;
        }
    }
  }
  for (std::size_t l = 0; l < out.weights.size(); ++l) {
    float* o = out.weights[l].data();
    const float* s = sum.weights[l].data();
    const int* c = wcount[l].data();
    for (Eigen::Index i = 0; i < out.weights[l].size(); ++i)
      if (c[i] > 0) o[i] = s[i] / static_cast<float>(c[i]);
    float* ob = out.biases[l].data();
    const float* sb = sum.biases[l].data();
    const int* cb = bcount[l].data();
    for (Eigen::Index i = 0; i < out.biases[l].size(); ++i)
      if (cb[i] > 0) ob[i] = sb[i] / static_cast<float>(cb[i]);
  }
  return out;
}

void parallel_for_jobs(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : pool) t.join();
}

RoundReport run_round(ServerState& state, const std::vector<ClientHandle>& handles,
                      const HyperParams& hp, std::mt19937& sampler_rng, int workers,
                      CommLedger* ledger, PayloadObserver* observer) {
  hp.validate();
  const int n = static_cast<int>(handles.size());
  require(n >= 1, "run_round: no clients registered");
  const std::vector<int> picked = sample_clients(n, hp.sample_rate, sampler_rng);

  // Step II: downloads are prepared sequentially in ascending handle order.
  std::vector<ParamVectorF> downs(picked.size());
  for (std::size_t i = 0; i < picked.size(); ++i) {
    const ClientHandle& h = handles[picked[i]];
    const Mask& mask = state.client_masks.at(h.id);
    downs[i] = distribute(state.theta_g, mask);
    if (ledger)
      ledger->add(state.round, h.id, Direction::Down, PayloadKind::Params, params_bytes(mask));
    if (observer) observer->on_down(state.round, h.id, downs[i], mask);
  }

  // Steps III-IV in parallel; every result lands in its own slot.
  std::vector<ClientUpdateResult> results(picked.size());
  parallel_for_jobs(static_cast<int>(picked.size()), workers, [&](int i) {
    results[i] = handles[picked[i]].update(downs[i], state.round);
  });

  RoundReport report;
  report.round = state.round;
  std::vector<ClientUpload> uploads;
  uploads.reserve(picked.size());
  for (std::size_t i = 0; i < picked.size(); ++i) {
    const ClientHandle& h = handles[picked[i]];
    const ClientUpdateResult& r = results[i];
    if (ledger) {
      ledger->add(state.round, h.id, Direction::Up, PayloadKind::Params,
                  params_bytes(r.new_mask));
      if (r.stats.pruned)
        ledger->add(state.round, h.id, Direction::Up, PayloadKind::MaskBitmap,
                    mask_bytes(r.new_mask));
    }
    if (observer) observer->on_up(state.round, h.id, r.theta_up, r.new_mask, r.stats.pruned);
    state.client_masks[h.id] = r.new_mask;
    uploads.push_back({&r.theta_up, &r.new_mask});
    report.clients.push_back({h.id, r.stats});
  }

  // Step V: LTN-only aggregation in ascending client order.
  state.theta_g = aggregate_ltns(state.theta_g, uploads);
  state.round += 1;
  return report;
}

}  // namespace lfl
