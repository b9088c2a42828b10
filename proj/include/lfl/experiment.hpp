#pragma once

#include <string>
#include <vector>

#include "lfl/checkpoint.hpp"
#include "lfl/config.hpp"

namespace lfl {

struct RunResult {
  Method method = Method::LotteryFL;
  std::vector<RoundReport> reports;
  std::vector<double> mean_remaining_per_round;
  CommLedger ledger;
  std::vector<double> client_test_acc;  // final personalized accuracy, per client
  double avg_test_acc = 0;
  ServerState server;  // checkpoint payload: theta_g, theta0, masks, round
};

std::vector<ClientState> build_clients(const Dataset& d, const PartitionManifest& manifest,
                                       const ModelArch& arch, std::uint64_t global_seed);

PartitionManifest make_manifest(const ExperimentConfig& c, const Dataset& d);

// Full LotteryFL protocol over `rounds` rounds. Each client's personalized
// model is its last uploaded LTN (clients keep their local copy between
// selections); never-selected clients fall back to theta_g (.) m_k.
RunResult run_lotteryfl(std::vector<ClientState>& clients, const ParamVectorF& theta0,
                        const HyperParams& hp, int rounds, int workers,
                        PayloadObserver* observer = nullptr);

RunResult run_method(Method method, std::vector<ClientState>& clients,
                     const ParamVectorF& theta0, const HyperParams& hp, int rounds,
                     const MethodConfig& cfg, int workers, PayloadObserver* observer = nullptr);

// Loads data, partitions, trains, and (optionally) writes rounds.csv,
// summary.csv, ledger.csv and checkpoint.bin into c.out_dir.
RunResult run_experiment(const ExperimentConfig& c, bool write_outputs,
                         PayloadObserver* observer = nullptr);

void write_meta_header(std::ostream& os, const ExperimentConfig& c,
                       const std::vector<std::pair<std::string, std::string>>& extra = {});

void write_run_outputs(const ExperimentConfig& c, const RunResult& result);

}  // namespace lfl
