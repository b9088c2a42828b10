#pragma once

#include <cstdint>

#include "lfl/masking.hpp"
#include "lfl/nn.hpp"

namespace lfl {

struct HyperParams {
  int epochs = 10;                // E
  int batch_size = 32;            // B
  float eta = 0.01f;              // learning rate
  double prune_rate = 0.2;        // r_p, fraction pruned per event
  double target_fraction = 0.3;   // r_target, stop pruning at this remaining fraction
  double acc_threshold = 0.5;     // validation accuracy gate for pruning
  double sample_rate = 0.1;       // K, fraction of clients per round

  void validate() const {
    require(epochs >= 1, "hp: epochs must be >= 1");
    require(batch_size >= 1, "hp: batch_size must be >= 1");
    require(eta > 0, "hp: eta must be > 0");
    require(prune_rate >= 0.0 && prune_rate < 1.0, "hp: prune_rate must be in [0,1)");
    require(target_fraction > 0.0 && target_fraction <= 1.0,
            "hp: target_fraction must be in (0,1]");
    require(acc_threshold >= 0.0 && acc_threshold <= 1.0, "hp: acc_threshold must be in [0,1]");
    require(sample_rate > 0.0 && sample_rate <= 1.0, "hp: sample_rate must be in (0,1]");
  }
};

struct ClientData {
  BatchF train, val, test;
};

struct ClientState {
  int id = 0;
  Mask mask;
  PruneState prune;
  ClientData data;
  std::uint64_t global_seed = 0;
};

struct ClientRoundStats {
  double val_acc = 0;
  bool pruned = false;
  double remaining_fraction = 1.0;
  double local_loss = 0;
  double test_acc = 0;
};

// Outcome of the round-start gate: validation accuracy on the downloaded
// parameters, and (on a prune event) the shrunk mask with the surviving
// weights rewound to theta0.
struct PreparedRound {
  ParamVectorF theta_start;
  Mask mask;
  PruneState prune;
  bool pruned = false;
  double val_acc = 0;
};

PreparedRound prepare_round(const ClientState& state, const ParamVectorF& theta_down,
                            const ParamVectorF& theta0, const HyperParams& hp);

struct ClientUpdateResult {
  ParamVectorF theta_up;
  Mask new_mask;
  PruneState new_prune;
  ClientRoundStats stats;
};

// One ClientUpdate: validate the downloaded LTN, prune+rewind when the gate
// passes, then run E local epochs. Pure in its arguments; the per-round RNG
// stream is derived from (global_seed, client id, round).
ClientUpdateResult client_update(const ClientState& state, const ParamVectorF& theta_down,
                                 const ParamVectorF& theta0, const HyperParams& hp, int round);

inline std::mt19937 client_round_rng(std::uint64_t global_seed, int client_id, int round) {
  return rng::make_engine(rng::stream_seed(
      global_seed, {rng::kClientRound, (std::uint64_t)client_id, (std::uint64_t)round}));
}

}  // namespace lfl
