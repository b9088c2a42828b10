#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "lfl/experiment.hpp"

using namespace lfl;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream f(p);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const char* kConfigText = R"json({
  "version": 1,
  "method": "lotteryfl",
  "dataset": {"type": "synthetic", "class_count": 4, "dim": 6, "per_class": 80,
              "separation": 5.0, "seed": 9},
  "partition": {"mode": "nclass_balanced", "num_clients": 6, "classes_per_client": 2,
                "samples_per_class": 8, "seed": 4},
  "hyper": {"epochs": 2, "batch_size": 8, "eta": 0.05, "target_fraction": 0.5,
            "acc_threshold": 0.0, "sample_rate": 0.5},
  "rounds": 4,
  "seed": 12,
  "workers": 2,
  "out_dir": "OUTDIR"
})json";

ExperimentConfig test_config(const std::string& out_dir) {
  std::string text = kConfigText;
  text.replace(text.find("OUTDIR"), 6, out_dir);
  return config_from_json_text(text);
}

}  // namespace

TEST_CASE("config parses, validates, and digests stably") {
  const ExperimentConfig c = test_config("x");
  CHECK(c.method == Method::LotteryFL);
  CHECK(c.partition.num_clients == 6);
  CHECK(c.hp.eta == doctest::Approx(0.05f));
  CHECK(config_digest(c) == config_digest(test_config("x")));
  // Output location and worker count are execution details, not identity.
  ExperimentConfig moved = test_config("elsewhere");
  moved.workers = 9;
  CHECK(config_digest(c) == config_digest(moved));
  ExperimentConfig reseeded = test_config("x");
  reseeded.seed += 1;
  CHECK(config_digest(c) != config_digest(reseeded));

  // Round-trip through the canonical dump.
  const ExperimentConfig back = config_from_json_text(config_to_json(c));
  CHECK(config_digest(back) == config_digest(c));

  CHECK_THROWS_AS(config_from_json_text("{"), ConfigError);
  CHECK_THROWS_AS(config_from_json_text("{\"version\": 2}"), ConfigError);

  std::string bad = kConfigText;
  bad.replace(bad.find("lotteryfl"), 9, "gossip");
  CHECK_THROWS_AS(config_from_json_text(bad), ConfigError);

  std::string neg = kConfigText;
  neg.replace(neg.find("\"rounds\": 4"), 11, "\"rounds\": -1");
  CHECK_THROWS_AS(config_from_json_text(neg), ConfigError);
}

TEST_CASE("checkpoint round-trips bitwise") {
  const ModelArch arch{{5, 4, 3}};
  ServerState state;
  state.theta_g = init_params<float>(arch, 8);
  state.theta0 = init_params<float>(arch, 9);
  state.round = 17;
  std::mt19937 g(2);
  state.client_masks[0] = lfl::test::random_mask(arch, 0.5, g);
  state.client_masks[5] = lfl::test::random_mask(arch, 0.3, g);

  const std::string path = (fs::temp_directory_path() / "lfl_ckpt_test.bin").string();
  save_checkpoint(path, state, CheckpointMeta{123, 456, 0.3});
  const Checkpoint ck = load_checkpoint(path);
  CHECK(ck.arch == arch);
  CHECK(ck.state.round == 17);
  CHECK(ck.meta.seed == 123);
  CHECK(ck.meta.config_digest == 456);
  CHECK(ck.meta.target_fraction == 0.3);
  CHECK(lfl::test::params_equal(ck.state.theta_g, state.theta_g));
  CHECK(lfl::test::params_equal(ck.state.theta0, state.theta0));
  CHECK(ck.state.client_masks.at(5) == state.client_masks.at(5));
  fs::remove(path);

  std::ofstream(path) << "not a checkpoint at all";
  CHECK_THROWS_AS(load_checkpoint(path), CheckpointError);
  fs::remove(path);
  CHECK_THROWS_AS(load_checkpoint(path), CheckpointError);
}

TEST_CASE("run_experiment writes the full output set with metadata headers") {
  const fs::path dir = fs::temp_directory_path() / "lfl_exp_test";
  fs::remove_all(dir);
  const ExperimentConfig c = test_config(dir.string());
  const RunResult res = run_experiment(c, /*write_outputs=*/true);
  CHECK(res.avg_test_acc > 0.0);

  for (const char* name : {"rounds.csv", "summary.csv", "ledger.csv", "checkpoint.bin"})
    CHECK(fs::exists(dir / name));

  const std::string rounds = read_file(dir / "rounds.csv");
  CHECK(rounds.find("# lotteryfl schema=1") == 0);
  CHECK(rounds.find("# config_digest=0x") != std::string::npos);
  CHECK(rounds.find("# seed=12") != std::string::npos);
  CHECK(rounds.find("round,avg_val_acc,avg_test_acc,mean_remaining_fraction,cumulative_bytes") !=
        std::string::npos);
  // 4 rounds of rows.
  int data_lines = 0;
  std::istringstream ss(rounds);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty() && line[0] != '#' && line.find("round,") != 0) ++data_lines;
  CHECK(data_lines == 4);

  const std::string summary = read_file(dir / "summary.csv");
  CHECK(summary.find("mb_definition=1e6_bytes") != std::string::npos);
  CHECK(summary.find("lotteryfl,") != std::string::npos);

  const Checkpoint ck = load_checkpoint((dir / "checkpoint.bin").string());
  CHECK(ck.state.round == 4);
  CHECK(ck.meta.config_digest == config_digest(c));
  fs::remove_all(dir);
}

TEST_CASE("zero rounds yields an empty round table but a summary") {
  const fs::path dir = fs::temp_directory_path() / "lfl_exp_zero";
  fs::remove_all(dir);
  ExperimentConfig c = test_config(dir.string());
  c.rounds = 0;
  const RunResult res = run_experiment(c, true);
  CHECK(res.reports.empty());

  std::istringstream ss(read_file(dir / "rounds.csv"));
  std::string line;
  int data_lines = 0;
  while (std::getline(ss, line))
    if (!line.empty() && line[0] != '#' && line.find("round,") != 0) ++data_lines;
  CHECK(data_lines == 0);
  CHECK(fs::exists(dir / "summary.csv"));
  fs::remove_all(dir);
}

TEST_CASE("standalone experiment reports zero cumulative bytes") {
  const fs::path dir = fs::temp_directory_path() / "lfl_exp_standalone";
  fs::remove_all(dir);
  ExperimentConfig c = test_config(dir.string());
  c.method = Method::Standalone;
  c.method_cfg.method = Method::Standalone;
  c.rounds = 2;
  const RunResult res = run_experiment(c, true);
  CHECK(res.ledger.total_bytes() == 0);

  std::istringstream ss(read_file(dir / "rounds.csv"));
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty() || line[0] == '#' || line.find("round,") == 0) continue;
    CHECK(line.back() == '0');  // cumulative_bytes column
  }
  fs::remove_all(dir);
}

TEST_CASE("identical configs reproduce identical csv bytes across worker counts") {
  const fs::path dir_a = fs::temp_directory_path() / "lfl_exp_w1";
  const fs::path dir_b = fs::temp_directory_path() / "lfl_exp_w4";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  ExperimentConfig a = test_config(dir_a.string());
  a.workers = 1;
  ExperimentConfig b = test_config(dir_b.string());
  b.workers = 4;
  run_experiment(a, true);
  run_experiment(b, true);
  // Worker count is an execution detail outside the config digest, so the
  // files must agree byte for byte.
  CHECK(read_file(dir_a / "rounds.csv") == read_file(dir_b / "rounds.csv"));
  CHECK(read_file(dir_a / "ledger.csv") == read_file(dir_b / "ledger.csv"));
  CHECK(read_file(dir_a / "summary.csv") == read_file(dir_b / "summary.csv"));
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}
