#include "lfl/baselines.hpp"

namespace lfl {

std::string to_string(Method m) {
  switch (m) {
    case Method::LotteryFL: return "lotteryfl";
    case Method::FedAvg: return "fedavg";
    case Method::LGFedAvg: return "lg_fedavg";
    case Method::Standalone: return "standalone";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "lotteryfl") return Method::LotteryFL;
  if (s == "fedavg") return Method::FedAvg;
  if (s == "lg_fedavg") return Method::LGFedAvg;
  if (s == "standalone") return Method::Standalone;
  throw std::invalid_argument("unknown method: " + s);
}

RoundReport fedavg_round(FedAvgState& state, const std::vector<ClientState>& clients,
                         const HyperParams& hp, std::mt19937& sampler_rng, int workers,
                         CommLedger* ledger, PayloadObserver* observer) {
  hp.validate();
  const int n = static_cast<int>(clients.size());
  require(n >= 1, "fedavg_round: no clients");
  const ModelArch arch = state.theta_g.arch();
  const Mask full = full_mask(arch);
  const std::uint64_t payload = full_params_bytes(arch);
  const std::vector<int> picked = sample_clients(n, hp.sample_rate, sampler_rng);

  std::vector<ParamVectorF> models(picked.size());
  std::vector<ClientRoundStats> stats(picked.size());
  for (std::size_t i = 0; i < picked.size(); ++i) {
    if (ledger)
      ledger->add(state.round, clients[picked[i]].id, Direction::Down, PayloadKind::Params,
                  payload);
    if (observer) observer->on_down(state.round, clients[picked[i]].id, state.theta_g, full);
  }
  parallel_for_jobs(static_cast<int>(picked.size()), workers, [&](int i) {
    const ClientState& cs = clients[picked[i]];
    models[i] = state.theta_g;
    stats[i].val_acc = evaluate(models[i], full, cs.data.val);
    std::mt19937 g = client_round_rng(cs.global_seed, cs.id, state.round);
    stats[i].local_loss =
        train_epochs(models[i], full, cs.data.train, hp.epochs, hp.batch_size, hp.eta, g);
    stats[i].test_acc = evaluate(models[i], full, cs.data.test);
  });

  RoundReport report;
  report.round = state.round;
  auto sum = ParamVectorF::zeros(arch);
  for (std::size_t i = 0; i < picked.size(); ++i) {
    const ClientState& cs = clients[picked[i]];
    if (ledger) ledger->add(state.round, cs.id, Direction::Up, PayloadKind::Params, payload);
    if (observer) observer->on_up(state.round, cs.id, models[i], full, false);
    for (std::size_t l = 0; l < sum.weights.size(); ++l) {
      sum.weights[l] += models[i].weights[l];
      sum.biases[l] += models[i].biases[l];
    }
    report.clients.push_back({cs.id, stats[i]});
  }
  const float k = static_cast<float>(picked.size());
  for (std::size_t l = 0; l < sum.weights.size(); ++l) {
    state.theta_g.weights[l] = sum.weights[l].array() / k;
    state.theta_g.biases[l] = sum.biases[l].array() / k;
  }
  state.round += 1;
  return report;
}

StandaloneResult standalone_train(const std::vector<ClientState>& clients,
                                  const ParamVectorF& theta0, const HyperParams& hp, int rounds,
                                  int workers) {
  hp.validate();
  const int n = static_cast<int>(clients.size());
  require(n >= 1, "standalone_train: no clients");
  const Mask full = full_mask(theta0.arch());

  StandaloneResult res;
  res.models.assign(n, theta0);
  std::mt19937 sampler = rng::make_engine(
      rng::stream_seed(clients.front().global_seed, {rng::kSampler}));
  for (int t = 0; t < rounds; ++t) {
    std::vector<double> losses(n, 0.0);
    parallel_for_jobs(n, workers, [&](int i) {
      const ClientState& cs = clients[i];
      std::mt19937 g = client_round_rng(cs.global_seed, cs.id, t);
      losses[i] = train_epochs(res.models[i], full, cs.data.train, hp.epochs, hp.batch_size,
                               hp.eta, g);
    });
    // No communication happens; the sampled cohort is evaluated only so the
    // per-round reports stay comparable with the federated methods.
    const std::vector<int> picked = sample_clients(n, hp.sample_rate, sampler);
    RoundReport report;
    report.round = t;
    for (int idx : picked) {
      ClientRoundStats s;
      s.val_acc = evaluate(res.models[idx], full, clients[idx].data.val);
      s.test_acc = evaluate(res.models[idx], full, clients[idx].data.test);
      s.local_loss = losses[idx];
      report.clients.push_back({clients[idx].id, s});
    }
    res.reports.push_back(std::move(report));
  }
  return res;
}

namespace {

void copy_global_layers(ParamVectorF& dst, const ParamVectorF& src, int split_index) {
  for (std::size_t l = split_index; l < dst.weights.size(); ++l) {
    dst.weights[l] = src.weights[l];
    dst.biases[l] = src.biases[l];
  }
}

}  // namespace

LgFedAvgResult lg_fedavg_train(const std::vector<ClientState>& clients,
                               const ParamVectorF& theta0, const HyperParams& hp, int rounds,
                               const MethodConfig& cfg, int workers, CommLedger* ledger) {
  hp.validate();
  const int n = static_cast<int>(clients.size());
  require(n >= 1, "lg_fedavg_train: no clients");
  const ModelArch arch = theta0.arch();
  require(cfg.lg_split_index >= 0 && cfg.lg_split_index < arch.num_weight_layers(),
          "lg_fedavg: split index out of range");
  require(cfg.fine_tune_epochs >= 0, "lg_fedavg: fine_tune_epochs must be >= 0");
  const Mask full = full_mask(arch);
  const std::uint64_t payload = lg_global_params_bytes(arch, cfg.lg_split_index);

  LgFedAvgResult res;
  res.theta_g = theta0;
  res.models.assign(n, theta0);
  std::mt19937 sampler = rng::make_engine(
      rng::stream_seed(clients.front().global_seed, {rng::kSampler}));

  for (int t = 0; t < rounds; ++t) {
    const std::vector<int> picked = sample_clients(n, hp.sample_rate, sampler);
    std::vector<ClientRoundStats> stats(picked.size());
    for (std::size_t i = 0; i < picked.size(); ++i)
      if (ledger)
        ledger->add(t, clients[picked[i]].id, Direction::Down, PayloadKind::Params, payload);
    parallel_for_jobs(static_cast<int>(picked.size()), workers, [&](int i) {
      const ClientState& cs = clients[picked[i]];
      ParamVectorF& model = res.models[picked[i]];
      copy_global_layers(model, res.theta_g, cfg.lg_split_index);
      stats[i].val_acc = evaluate(model, full, cs.data.val);
      std::mt19937 g = client_round_rng(cs.global_seed, cs.id, t);
      stats[i].local_loss =
          train_epochs(model, full, cs.data.train, hp.epochs, hp.batch_size, hp.eta, g);
      stats[i].test_acc = evaluate(model, full, cs.data.test);
    });

    RoundReport report;
    report.round = t;
    auto sum = ParamVectorF::zeros(arch);
    for (std::size_t i = 0; i < picked.size(); ++i) {
      const ClientState& cs = clients[picked[i]];
      if (ledger) ledger->add(t, cs.id, Direction::Up, PayloadKind::Params, payload);
      for (std::size_t l = cfg.lg_split_index; l < sum.weights.size(); ++l) {
        sum.weights[l] += res.models[picked[i]].weights[l];
        sum.biases[l] += res.models[picked[i]].biases[l];
      }
      report.clients.push_back({cs.id, stats[i]});
    }
    const float k = static_cast<float>(picked.size());
    for (std::size_t l = cfg.lg_split_index; l < sum.weights.size(); ++l) {
      res.theta_g.weights[l] = sum.weights[l].array() / k;
      res.theta_g.biases[l] = sum.biases[l].array() / k;
    }
    res.reports.push_back(std::move(report));
  }

  // Personalization pass: final global layers plus local fine-tuning.
  parallel_for_jobs(n, workers, [&](int i) {
    copy_global_layers(res.models[i], res.theta_g, cfg.lg_split_index);
    if (cfg.fine_tune_epochs > 0) {
      std::mt19937 g = client_round_rng(clients[i].global_seed, clients[i].id, rounds);
      train_epochs(res.models[i], full, clients[i].data.train, cfg.fine_tune_epochs,
                   hp.batch_size, hp.eta, g);
    }
  });
  return res;
}

}  // namespace lfl
