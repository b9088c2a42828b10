#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lfl/dataset.hpp"

namespace lfl {

struct PartitionError : std::runtime_error {
  explicit PartitionError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class PartitionMode { NClassBalanced, NClassUnbalanced, ByGroup };

std::string to_string(PartitionMode m);
PartitionMode partition_mode_from_string(const std::string& s);

// Declarative recipe for a label-skew split. With NClassUnbalanced the first
// drawn class keeps samples_per_class and the second gets
// max(1, round(samples_per_class * balance_rate)).
struct PartitionSpec {
  PartitionMode mode = PartitionMode::NClassBalanced;
  int num_clients = 1;
  int classes_per_client = 2;
  int samples_per_class = 20;
  double balance_rate = 1.0;
  double val_fraction = 0.2;
  double test_fraction = 1.0;
  std::uint64_t seed = 0;
};

struct ClientIndices {
  std::vector<int> train, val, test;
};

struct PartitionManifest {
  int version = 1;
  PartitionSpec spec;
  std::uint64_t dataset_digest = 0;
  std::vector<ClientIndices> clients;

  int num_clients() const { return static_cast<int>(clients.size()); }
};

// Non-IID split per the spec: each client draws classes_per_client distinct
// classes (independently across clients; classes may repeat between clients),
// then distinct example indices per class for train/val/test. Val and test
// sizes follow val_fraction/test_fraction of the client's train size,
// apportioned class-proportionally (largest remainder). Indices may repeat
// across clients, never within one client.
PartitionManifest partition_nclass(const Dataset& d, const PartitionSpec& spec);

// One client per group id; within a group, examples are shuffled (seed) and
// split by the given fractions (test takes the remainder).
PartitionManifest partition_by_group(const Dataset& d, const std::vector<int>& group_of_example,
                                     double train_fraction, double val_fraction,
                                     std::uint64_t seed);

// Two-column whitespace-separated text (example_index group_id); every
// example index in [0, dataset size) must appear exactly once.
std::vector<int> load_group_manifest(const std::string& path, Eigen::Index dataset_size);

void save_manifest(const PartitionManifest& m, const std::string& path);
PartitionManifest load_manifest(const std::string& path);
std::uint64_t manifest_digest(const PartitionManifest& m);

}  // namespace lfl
