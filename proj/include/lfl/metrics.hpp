#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lfl/mask.hpp"
#include "lfl/partition.hpp"

namespace lfl {

// Fixed feature encoder for the client-wise non-IID index. Identity keeps
// raw features; random projection maps them through a seeded Gaussian matrix.
struct Encoder {
  enum class Type { Identity, RandomProjection };
  Type type = Type::Identity;
  Eigen::MatrixXd projection;  // (input dim x out dim), RandomProjection only

  Eigen::MatrixXd encode(const Eigen::MatrixXf& rows) const {
    if (type == Type::Identity) return rows.cast<double>();
    require(rows.cols() == projection.rows(), "encoder: input dim mismatch");
    return rows.cast<double>() * projection;
  }

  std::string describe() const;
};

Encoder identity_encoder();
Encoder random_projection_encoder(int input_dim, int out_dim, std::uint64_t seed);

struct CniReport {
  std::vector<double> per_client;  // indexed by manifest client id
  double mean = 0;
  std::string encoder_desc;
  std::string interpretation;  // how the index is computed, echoed in reports
};

// Per-client non-IID index: the l2 distance between a client's average
// class-mean embedding and the mean of the other clients' counterparts,
// normalized per dimension by the population std over all training data.
// Dimensions with zero std are dropped.
CniReport cni(const PartitionManifest& manifest, const Dataset& d, const Encoder& enc);

double avg_accuracy(const std::vector<double>& per_client_accuracy);

// Fraction of positions per layer (weights and biases of layer l together)
// alive in strictly fewer than threshold * num_clients masks.
std::vector<double> personalized_param_analysis(const std::vector<Mask>& masks,
                                                double threshold = 0.10);

}  // namespace lfl
