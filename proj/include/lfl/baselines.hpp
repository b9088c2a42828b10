#pragma once

#include <string>
#include <vector>

#include "lfl/server.hpp"

namespace lfl {

enum class Method { LotteryFL, FedAvg, LGFedAvg, Standalone };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct MethodConfig {
  Method method = Method::LotteryFL;
  int lg_split_index = 1;    // first layer index federated; layers below stay local
  int fine_tune_epochs = 10; // LG-FedAvg post-training personalization budget
};

struct FedAvgState {
  ParamVectorF theta_g;
  int round = 0;
};

// Classic FedAvg round: full-model download, E local epochs, unweighted
// full-model average over the selected clients (ascending id order). Client
// RNG streams match client_update's, so a LotteryFL round with pruning
// disabled reproduces this bit for bit.
RoundReport fedavg_round(FedAvgState& state, const std::vector<ClientState>& clients,
                         const HyperParams& hp, std::mt19937& sampler_rng, int workers,
                         CommLedger* ledger, PayloadObserver* observer = nullptr);

struct StandaloneResult {
  std::vector<ParamVectorF> models;  // one per client
  std::vector<RoundReport> reports;  // stats of the per-round sampled cohort
};

// Purely local training: every client runs rounds*E epochs of SGD from
// theta0 with zero communication. Round reports evaluate the cohort the
// sampler would have picked, for comparable round CSVs.
StandaloneResult standalone_train(const std::vector<ClientState>& clients,
                                  const ParamVectorF& theta0, const HyperParams& hp, int rounds,
                                  int workers);

struct LgFedAvgResult {
  ParamVectorF theta_g;
  std::vector<ParamVectorF> models;  // per-client personalized models
  std::vector<RoundReport> reports;
};

// Local/global layer split: layers >= split_index are federated (and are the
// only payload), layers below stay on the client. After the last round every
// client receives the final global layers and fine-tunes locally.
LgFedAvgResult lg_fedavg_train(const std::vector<ClientState>& clients,
                               const ParamVectorF& theta0, const HyperParams& hp, int rounds,
                               const MethodConfig& cfg, int workers, CommLedger* ledger);

}  // namespace lfl
