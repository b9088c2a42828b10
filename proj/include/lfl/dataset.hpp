#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "lfl/nn.hpp"

namespace lfl {

// A labeled corpus: one example per feature row, labels in [0, class_count).
struct Dataset {
  Eigen::MatrixXf features;
  Eigen::VectorXi labels;
  int class_count = 0;

  Eigen::Index size() const { return features.rows(); }
  int dim() const { return static_cast<int>(features.cols()); }
  void validate() const;
};

std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t h = 14695981039346656037ull);
std::uint64_t dataset_digest(const Dataset& d);

// Gaussian blobs with unit variance, one mean per class at pairwise distance
// >= separation. Deterministic in seed; examples are grouped by class.
Dataset make_synthetic(int class_count, int dim, int per_class, double separation,
                       std::uint64_t seed);

struct IdxError : std::runtime_error {
  enum class Kind { BadMagic, Truncated, CountMismatch, Io };
  Kind kind;
  IdxError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// Big-endian IDX ingestion (image magic 0x00000803, label magic 0x00000801);
// pixels are scaled to [0,1] by /255.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

BatchF gather(const Dataset& d, const std::vector<int>& indices);

}  // namespace lfl
