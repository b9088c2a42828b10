#include "lfl/dataset.hpp"

#include <fstream>

#include "lfl/rng.hpp"

namespace lfl {

void Dataset::validate() const {
  require(features.rows() > 0, "dataset: empty");
  require(features.rows() == labels.size(), "dataset: feature/label count mismatch");
  require(class_count >= 1, "dataset: class_count must be >= 1");
  for (Eigen::Index i = 0; i < labels.size(); ++i)
    require(labels[i] >= 0 && labels[i] < class_count, "dataset: label out of range");
}

std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t dataset_digest(const Dataset& d) {
  std::uint64_t h = fnv1a64(d.features.data(), sizeof(float) * d.features.size());
  h = fnv1a64(d.labels.data(), sizeof(int) * d.labels.size(), h);
  const std::int64_t meta[3] = {d.features.rows(), d.features.cols(), d.class_count};
  return fnv1a64(meta, sizeof(meta), h);
}

Dataset make_synthetic(int class_count, int dim, int per_class, double separation,
                       std::uint64_t seed) {
  require(class_count >= 1 && dim >= 1 && per_class >= 1 && separation > 0,
          "make_synthetic: all arguments must be positive");
  Dataset d;
  d.class_count = class_count;
  d.features.resize(static_cast<Eigen::Index>(class_count) * per_class, dim);
  d.labels.resize(d.features.rows());
  for (int c = 0; c < class_count; ++c) {
    // Axis-aligned means: class c sits at separation*(1+c/dim) along axis
    // c%dim, which keeps every pair at distance >= separation.
    Eigen::VectorXf mean = Eigen::VectorXf::Zero(dim);
    mean[c % dim] = static_cast<float>(separation * (1 + c / dim));
    std::mt19937 g = rng::make_engine(rng::stream_seed(seed, {rng::kSynthetic, (std::uint64_t)c}));
    for (int i = 0; i < per_class; ++i) {
      const Eigen::Index row = static_cast<Eigen::Index>(c) * per_class + i;
      for (int j = 0; j < dim; ++j)
        d.features(row, j) = mean[j] + static_cast<float>(rng::normal(g));
      d.labels[row] = c;
    }
  }
  return d;
}

namespace {

std::uint32_t read_be32(std::ifstream& f, const std::string& path) {
  unsigned char b[4];
  if (!f.read(reinterpret_cast<char*>(b), 4))
    throw IdxError(IdxError::Kind::Truncated, path + ": truncated header");
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream imgs(images_path, std::ios::binary);
  if (!imgs) throw IdxError(IdxError::Kind::Io, images_path + ": cannot open");
  std::ifstream lbls(labels_path, std::ios::binary);
  if (!lbls) throw IdxError(IdxError::Kind::Io, labels_path + ": cannot open");

  if (read_be32(imgs, images_path) != 0x00000803u)
    throw IdxError(IdxError::Kind::BadMagic, images_path + ": bad image magic");
  const std::uint32_t count = read_be32(imgs, images_path);
  const std::uint32_t rows = read_be32(imgs, images_path);
  const std::uint32_t cols = read_be32(imgs, images_path);

  if (read_be32(lbls, labels_path) != 0x00000801u)
    throw IdxError(IdxError::Kind::BadMagic, labels_path + ": bad label magic");
  const std::uint32_t label_count = read_be32(lbls, labels_path);
  if (label_count != count)
    throw IdxError(IdxError::Kind::CountMismatch,
                   images_path + ": image count " + std::to_string(count) + " != label count " +
                       std::to_string(label_count));

  const std::size_t pixels = std::size_t(rows) * cols;
  std::vector<unsigned char> img_buf(pixels);
  std::vector<unsigned char> lbl_buf(count);
  if (!lbls.read(reinterpret_cast<char*>(lbl_buf.data()), count))
    throw IdxError(IdxError::Kind::Truncated, labels_path + ": truncated label data");

  Dataset d;
  d.features.resize(count, static_cast<Eigen::Index>(pixels));
  d.labels.resize(count);
  int max_label = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    if (!imgs.read(reinterpret_cast<char*>(img_buf.data()), static_cast<std::streamsize>(pixels)))
      throw IdxError(IdxError::Kind::Truncated, images_path + ": truncated image data");
    for (std::size_t j = 0; j < pixels; ++j)
      d.features(i, static_cast<Eigen::Index>(j)) = static_cast<float>(img_buf[j]) / 255.0f;
    d.labels[i] = lbl_buf[i];
    max_label = std::max(max_label, d.labels[i]);
  }
  d.class_count = max_label + 1;
  d.validate();
  return d;
}

BatchF gather(const Dataset& d, const std::vector<int>& indices) {
  BatchF b;
  b.features.resize(static_cast<Eigen::Index>(indices.size()), d.features.cols());
  b.labels.resize(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    require(indices[i] >= 0 && indices[i] < d.size(), "gather: index out of range");
    b.features.row(static_cast<Eigen::Index>(i)) = d.features.row(indices[i]);
    b.labels[static_cast<Eigen::Index>(i)] = d.labels[indices[i]];
  }
  return b;
}

}  // namespace lfl
