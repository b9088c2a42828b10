#pragma once

#include <functional>
#include <map>
#include <vector>

#include "lfl/client.hpp"
#include "lfl/comm_ledger.hpp"

namespace lfl {

// Server-side bookkeeping. The server holds parameters, the initial
// snapshot, and the mask registry -- never client data.
struct ServerState {
  ParamVectorF theta_g;
  ParamVectorF theta0;
  std::map<int, Mask> client_masks;
  int round = 0;
};

// k = max(floor(N*K), 1) distinct clients, uniform without replacement,
// returned in ascending order.
std::vector<int> sample_clients(int num_clients, double sample_rate, std::mt19937& g);

// theta_g (.) m_k: the LTN download for one client.
inline ParamVectorF distribute(const ParamVectorF& theta_g, const Mask& mask) {
  return apply_mask(theta_g, mask);
}

struct ClientUpload {
  const ParamVectorF* theta;
  const Mask* mask;
};

// LTN-only FedAvg: each position covered by at least one upload becomes the
// mean of the covering values (summed in list order); uncovered positions
// keep their theta_g value.
ParamVectorF aggregate_ltns(const ParamVectorF& theta_g, const std::vector<ClientUpload>& updates);

// The server's view of a client: an id plus an opaque update callable. The
// callable receives only the downloaded parameters and the round index, so
// server code cannot touch client data even by accident.
struct ClientHandle {
  int id;
  std::function<ClientUpdateResult(const ParamVectorF& theta_down, int round)> update;
};

// Observation hook for transfer payloads; used to audit ledger byte counts
// against actual wire serializations.
struct PayloadObserver {
  virtual ~PayloadObserver() = default;
  virtual void on_down(int round, int client_id, const ParamVectorF& theta, const Mask& mask) = 0;
  virtual void on_up(int round, int client_id, const ParamVectorF& theta, const Mask& mask,
                     bool mask_changed) = 0;
};

struct RoundClientReport {
  int client_id;
  ClientRoundStats stats;
};

struct RoundReport {
  int round = 0;
  std::vector<RoundClientReport> clients;
};

// One full round: sample, distribute, fan the updates over `workers`
// threads, refresh the mask registry, aggregate. Results are identical for
// any worker count.
RoundReport run_round(ServerState& state, const std::vector<ClientHandle>& handles,
                      const HyperParams& hp, std::mt19937& sampler_rng, int workers,
                      CommLedger* ledger, PayloadObserver* observer = nullptr);

// Runs jobs [0, n) across `workers` threads; fn must be safe to call
// concurrently for distinct indices.
void parallel_for_jobs(int n, int workers, const std::function<void(int)>& fn);

}  // namespace lfl
