#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lfl/baselines.hpp"
#include "lfl/metrics.hpp"
#include "lfl/partition.hpp"

namespace lfl {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DatasetConfig {
  enum class Type { Idx, Synthetic };
  Type type = Type::Synthetic;
  // idx
  std::string images, labels;
  // synthetic
  int class_count = 10;
  int dim = 64;
  int per_class = 600;
  double separation = 4.0;
  std::uint64_t seed = 0;
};

struct EncoderConfig {
  Encoder::Type type = Encoder::Type::Identity;
  int proj_dim = 32;
  std::uint64_t proj_seed = 0;
};

// A whole experiment as one archivable file. Everything an output CSV needs
// to be reproduced lives here.
struct ExperimentConfig {
  int version = 1;
  Method method = Method::LotteryFL;
  DatasetConfig dataset;
  PartitionSpec partition;
  std::vector<int> arch_layers;  // empty = derive from the dataset
  HyperParams hp;
  MethodConfig method_cfg;
  EncoderConfig encoder;
  std::string group_file;             // by_group mode: two-column (example, group)
  double group_train_fraction = 0.6;  // by_group mode split sizing
  int rounds = 400;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int workers = 1;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json_text(const std::string& text);
std::string config_to_json(const ExperimentConfig& c);
std::uint64_t config_digest(const ExperimentConfig& c);

Dataset load_dataset(const DatasetConfig& dc);

// 784-input data gets the 784-300-100-C stack; anything else a compact
// input-64-64-C net.
ModelArch resolve_arch(const ExperimentConfig& c, const Dataset& d);

Encoder resolve_encoder(const EncoderConfig& ec, int input_dim);

}  // namespace lfl
