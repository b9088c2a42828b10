#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "lfl/experiment.hpp"

namespace fs = std::filesystem;

namespace {

// Exit codes: 0 success, 1 config error, 2 data error, 3 runtime failure.
constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kDataError = 2;
constexpr int kRuntimeError = 3;

struct CommonOpts {
  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool has_seed = false;
  int workers_override = 0;
};

lfl::ExperimentConfig load_with_overrides(const CommonOpts& o) {
  lfl::ExperimentConfig c = lfl::load_config(o.config_path);
  if (!o.out_override.empty()) c.out_dir = o.out_override;
  if (o.has_seed) c.seed = o.seed_override;
  if (o.workers_override > 0) c.workers = o.workers_override;
  return c;
}

int cmd_partition(const CommonOpts& o) {
  const lfl::ExperimentConfig c = load_with_overrides(o);
  const lfl::Dataset d = lfl::load_dataset(c.dataset);
  const lfl::PartitionManifest m = lfl::make_manifest(c, d);
  fs::create_directories(c.out_dir);
  const std::string path = (fs::path(c.out_dir) / "manifest.json").string();
  lfl::save_manifest(m, path);
  std::cout << "clients=" << m.num_clients() << " dataset_digest=0x" << std::hex
            << m.dataset_digest << std::dec << " manifest_digest=0x" << std::hex
            << lfl::manifest_digest(m) << std::dec << "\n";
  for (int i = 0; i < m.num_clients(); ++i)
    std::cout << "client " << i << ": train=" << m.clients[i].train.size()
              << " val=" << m.clients[i].val.size() << " test=" << m.clients[i].test.size()
              << "\n";
  std::cout << "wrote " << path << "\n";
  return kOk;
}

int cmd_train(const CommonOpts& o) {
  const lfl::ExperimentConfig c = load_with_overrides(o);
  const lfl::RunResult res = lfl::run_experiment(c, /*write_outputs=*/true);
  std::cout << "method=" << lfl::to_string(c.method) << " avg_test_acc=" << std::setprecision(6)
            << res.avg_test_acc << " total_mb=" << res.ledger.total_mb() << "\n";
  std::cout << "outputs in " << c.out_dir << "\n";
  return kOk;
}

int cmd_cni(const CommonOpts& o) {
  const lfl::ExperimentConfig c = load_with_overrides(o);
  const lfl::Dataset d = lfl::load_dataset(c.dataset);
  const lfl::PartitionManifest m = lfl::make_manifest(c, d);
  const lfl::Encoder enc = lfl::resolve_encoder(c.encoder, d.dim());
  const lfl::CniReport rep = lfl::cni(m, d, enc);
  fs::create_directories(c.out_dir);
  std::ofstream f(fs::path(c.out_dir) / "cni.csv");
  lfl::write_meta_header(f, c,
                         {{"encoder", rep.encoder_desc},
                          {"interpretation", rep.interpretation},
                          {"mean_cni", std::to_string(rep.mean)}});
  f << std::setprecision(10) << "client_id,cni\n";
  for (std::size_t i = 0; i < rep.per_client.size(); ++i)
    f << i << ',' << rep.per_client[i] << '\n';
  std::cout << "mean_cni=" << std::setprecision(6) << rep.mean << " clients="
            << rep.per_client.size() << "\n";
  return kOk;
}

int cmd_analyze(const std::string& checkpoint_path, const std::string& out_dir,
                double threshold) {
  const lfl::Checkpoint ck = lfl::load_checkpoint(checkpoint_path);
  std::vector<lfl::Mask> masks;
  masks.reserve(ck.state.client_masks.size());
  for (const auto& [id, mask] : ck.state.client_masks) masks.push_back(mask);
  const std::vector<double> fractions = lfl::personalized_param_analysis(masks, threshold);
  fs::create_directories(out_dir);
  std::ofstream f(fs::path(out_dir) / "analysis.csv");
  f << "# lotteryfl schema=1\n";
  f << "# config_digest=0x" << std::hex << ck.meta.config_digest << std::dec << "\n";
  f << "# seed=" << ck.meta.seed << "\n";
  f << "# threshold=" << threshold << " clients=" << masks.size() << " round=" << ck.state.round
    << "\n";
  f << std::setprecision(10) << "layer,personalized_fraction,r_target\n";
  for (std::size_t l = 0; l < fractions.size(); ++l)
    f << l << ',' << fractions[l] << ',' << ck.meta.target_fraction << '\n';
  std::cout << "layers=" << fractions.size() << " r_target=" << ck.meta.target_fraction << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desk-scale LotteryFL federated-learning simulator"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string checkpoint_path, analyze_out = "out";
  double threshold = 0.10;

  auto add_common = [&](CLI::App* sub, bool with_workers) {
    sub->add_option("config", opts.config_path, "experiment config (json)")->required();
    sub->add_option("--out", opts.out_override, "override output directory");
    sub->add_option("--seed", opts.seed_override, "override global seed")
        ->each([&](const std::string&) { opts.has_seed = true; });
    if (with_workers)
      sub->add_option("--workers", opts.workers_override, "worker pool size for client updates");
  };

  CLI::App* partition = app.add_subcommand("partition", "write the partition manifest");
  add_common(partition, false);
  CLI::App* train = app.add_subcommand("train", "run the configured experiment");
  add_common(train, true);
  CLI::App* cnicmd = app.add_subcommand("cni", "compute the client-wise non-IID index");
  add_common(cnicmd, false);
  CLI::App* analyze = app.add_subcommand("analyze", "personalized-parameter distribution");
  analyze->add_option("checkpoint", checkpoint_path, "checkpoint file")->required();
  analyze->add_option("--out", analyze_out, "output directory");
  analyze->add_option("--threshold", threshold, "personalization share cutoff");

  CLI11_PARSE(app, argc, argv);

  try {
    if (partition->parsed()) return cmd_partition(opts);
    if (train->parsed()) return cmd_train(opts);
    if (cnicmd->parsed()) return cmd_cni(opts);
    if (analyze->parsed()) return cmd_analyze(checkpoint_path, analyze_out, threshold);
  } catch (const lfl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const lfl::IdxError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const lfl::PartitionError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const lfl::CheckpointError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kConfigError;
}
