#include "lfl/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>

namespace lfl {

std::vector<ClientState> build_clients(const Dataset& d, const PartitionManifest& manifest,
                                       const ModelArch& arch, std::uint64_t global_seed) {
  std::vector<ClientState> clients;
  clients.reserve(manifest.clients.size());
  for (int i = 0; i < manifest.num_clients(); ++i) {
    ClientState cs;
    cs.id = i;
    cs.mask = full_mask(arch);
    cs.data.train = gather(d, manifest.clients[i].train);
    cs.data.val = gather(d, manifest.clients[i].val);
    cs.data.test = gather(d, manifest.clients[i].test);
    cs.global_seed = global_seed;
    clients.push_back(std::move(cs));
  }
  return clients;
}

namespace {

double mean_remaining(const std::vector<ClientState>& clients) {
  double s = 0;
  for (const auto& c : clients) s += c.prune.remaining_fraction;
  return s / static_cast<double>(clients.size());
}

}  // namespace

RunResult run_lotteryfl(std::vector<ClientState>& clients, const ParamVectorF& theta0,
                        const HyperParams& hp, int rounds, int workers,
                        PayloadObserver* observer) {
  RunResult res;
  res.method = Method::LotteryFL;
  res.server.theta_g = theta0;
  res.server.theta0 = theta0;

  std::vector<ParamVectorF> local_models(clients.size());
  std::vector<char> participated(clients.size(), 0);

  std::vector<ClientHandle> handles;
  handles.reserve(clients.size());
  for (std::size_t i = 0; i < clients.size(); ++i) {
    ClientState& cs = clients[i];
    res.server.client_masks[cs.id] = cs.mask;
    handles.push_back(
        {cs.id, [&cs, &theta0, &hp, &local_models, &participated, i](
                    const ParamVectorF& theta_down, int round) {
           ClientUpdateResult r = client_update(cs, theta_down, theta0, hp, round);
           cs.mask = r.new_mask;
           cs.prune = r.new_prune;
           local_models[i] = r.theta_up;
           participated[i] = 1;
           return r;
         }});
  }

  std::mt19937 sampler =
      rng::make_engine(rng::stream_seed(clients.front().global_seed, {rng::kSampler}));
  for (int t = 0; t < rounds; ++t) {
    res.reports.push_back(
        run_round(res.server, handles, hp, sampler, workers, &res.ledger, observer));
    res.mean_remaining_per_round.push_back(mean_remaining(clients));
  }

  res.client_test_acc.resize(clients.size());
  for (std::size_t i = 0; i < clients.size(); ++i) {
    const Mask& mask = res.server.client_masks.at(clients[i].id);
    const ParamVectorF model =
        participated[i] ? local_models[i] : distribute(res.server.theta_g, mask);
    res.client_test_acc[i] = evaluate(model, mask, clients[i].data.test);
  }
  res.avg_test_acc = avg_accuracy(res.client_test_acc);
  return res;
}

RunResult run_method(Method method, std::vector<ClientState>& clients,
                     const ParamVectorF& theta0, const HyperParams& hp, int rounds,
                     const MethodConfig& cfg, int workers, PayloadObserver* observer) {
  if (method == Method::LotteryFL)
    return run_lotteryfl(clients, theta0, hp, rounds, workers, observer);

  RunResult res;
  res.method = method;
  res.server.theta0 = theta0;
  const ModelArch arch = theta0.arch();
  const Mask full = full_mask(arch);
  for (const auto& c : clients) res.server.client_masks[c.id] = full;
  res.client_test_acc.resize(clients.size());

  if (method == Method::FedAvg) {
    FedAvgState state{theta0, 0};
    std::mt19937 sampler =
        rng::make_engine(rng::stream_seed(clients.front().global_seed, {rng::kSampler}));
    for (int t = 0; t < rounds; ++t) {
      res.reports.push_back(
          fedavg_round(state, clients, hp, sampler, workers, &res.ledger, observer));
      res.mean_remaining_per_round.push_back(1.0);
    }
    res.server.theta_g = state.theta_g;
    res.server.round = state.round;
    for (std::size_t i = 0; i < clients.size(); ++i)
      res.client_test_acc[i] = evaluate(state.theta_g, full, clients[i].data.test);
  } else if (method == Method::Standalone) {
    StandaloneResult sr = standalone_train(clients, theta0, hp, rounds, workers);
    res.reports = std::move(sr.reports);
    res.mean_remaining_per_round.assign(rounds, 1.0);
    res.server.theta_g = theta0;
    res.server.round = rounds;
    for (std::size_t i = 0; i < clients.size(); ++i)
      res.client_test_acc[i] = evaluate(sr.models[i], full, clients[i].data.test);
  } else {
    LgFedAvgResult lr = lg_fedavg_train(clients, theta0, hp, rounds, cfg, workers, &res.ledger);
    res.reports = std::move(lr.reports);
    res.mean_remaining_per_round.assign(rounds, 1.0);
    res.server.theta_g = lr.theta_g;
    res.server.round = rounds;
    for (std::size_t i = 0; i < clients.size(); ++i)
      res.client_test_acc[i] = evaluate(lr.models[i], full, clients[i].data.test);
  }
  res.avg_test_acc = avg_accuracy(res.client_test_acc);
  return res;
}

PartitionManifest make_manifest(const ExperimentConfig& c, const Dataset& d) {
  if (c.partition.mode == PartitionMode::ByGroup) {
    const std::vector<int> groups = load_group_manifest(c.group_file, d.size());
    return partition_by_group(d, groups, c.group_train_fraction, c.partition.val_fraction,
                              c.partition.seed);
  }
  return partition_nclass(d, c.partition);
}

RunResult run_experiment(const ExperimentConfig& c, bool write_outputs,
                         PayloadObserver* observer) {
  const Dataset d = load_dataset(c.dataset);
  const PartitionManifest manifest = make_manifest(c, d);
  const ModelArch arch = resolve_arch(c, d);
  std::vector<ClientState> clients = build_clients(d, manifest, arch, c.seed);
  const ParamVectorF theta0 = init_params<float>(arch, c.seed);
  RunResult res =
      run_method(c.method, clients, theta0, c.hp, c.rounds, c.method_cfg, c.workers, observer);
  if (write_outputs) write_run_outputs(c, res);
  return res;
}

void write_meta_header(std::ostream& os, const ExperimentConfig& c,
                       const std::vector<std::pair<std::string, std::string>>& extra) {
  os << "# lotteryfl schema=1\n";
  os << "# config_digest=0x" << std::hex << config_digest(c) << std::dec << "\n";
  os << "# seed=" << c.seed << "\n";
  os << "# method=" << to_string(c.method) << "\n";
  os << "# eta=" << c.hp.eta << " epochs=" << c.hp.epochs << " batch_size=" << c.hp.batch_size
     << " target_fraction=" << c.hp.target_fraction << "\n";
  if (c.method == Method::LGFedAvg)
    os << "# lg_split_index=" << c.method_cfg.lg_split_index
       << " fine_tune_epochs=" << c.method_cfg.fine_tune_epochs << "\n";
  for (const auto& [k, v] : extra) os << "# " << k << "=" << v << "\n";
}

void write_run_outputs(const ExperimentConfig& c, const RunResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(c.out_dir);

  {
    std::ofstream f(fs::path(c.out_dir) / "rounds.csv");
    write_meta_header(f, c);
    f << std::setprecision(10);
    f << "round,avg_val_acc,avg_test_acc,mean_remaining_fraction,cumulative_bytes\n";
    std::uint64_t cumulative = 0;
    for (std::size_t t = 0; t < result.reports.size(); ++t) {
      const RoundReport& r = result.reports[t];
      double val = 0, test = 0;
      for (const auto& cl : r.clients) {
        val += cl.stats.val_acc;
        test += cl.stats.test_acc;
      }
      const double n = std::max<std::size_t>(r.clients.size(), 1);
      cumulative += result.ledger.bytes_for_round(r.round);
      f << r.round << ',' << val / n << ',' << test / n << ','
        << result.mean_remaining_per_round[t] << ',' << cumulative << '\n';
    }
  }
  {
    std::ofstream f(fs::path(c.out_dir) / "summary.csv");
    write_meta_header(f, c, {{"mb_definition", "1e6_bytes"}});
    f << std::setprecision(10);
    f << "method,avg_test_acc,total_mb\n";
    f << to_string(c.method) << ',' << result.avg_test_acc << ',' << result.ledger.total_mb()
      << '\n';
  }
  {
    std::ofstream f(fs::path(c.out_dir) / "ledger.csv");
    write_meta_header(f, c, {{"mb_definition", "1e6_bytes"}});
    result.ledger.write_csv(f);
  }
  save_checkpoint((fs::path(c.out_dir) / "checkpoint.bin").string(), result.server,
                  CheckpointMeta{c.seed, config_digest(c), c.hp.target_fraction});
}

}  // namespace lfl
