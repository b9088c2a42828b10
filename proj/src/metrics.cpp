#include "lfl/metrics.hpp"

#include <cmath>
#include <map>

#include "lfl/rng.hpp"

namespace lfl {

std::string Encoder::describe() const {
  if (type == Type::Identity) return "identity";
  return "random_projection(dim=" + std::to_string(projection.cols()) + ")";
}

Encoder identity_encoder() { return Encoder{}; }

Encoder random_projection_encoder(int input_dim, int out_dim, std::uint64_t seed) {
  require(input_dim >= 1 && out_dim >= 1, "random_projection_encoder: dims must be >= 1");
  Encoder e;
  e.type = Encoder::Type::RandomProjection;
  e.projection.resize(input_dim, out_dim);
  std::mt19937 g = rng::make_engine(rng::stream_seed(seed, {rng::kProjection}));
  const double scale = 1.0 / std::sqrt(static_cast<double>(out_dim));
  for (Eigen::Index j = 0; j < e.projection.cols(); ++j)
    for (Eigen::Index i = 0; i < e.projection.rows(); ++i)
      e.projection(i, j) = rng::normal(g) * scale;
  return e;
}

CniReport cni(const PartitionManifest& manifest, const Dataset& d, const Encoder& enc) {
  d.validate();
  const int n = manifest.num_clients();
  require(n >= 2, "cni: needs at least two clients");

  // v_i = mean over the client's classes of the class-mean embedding.
  std::vector<Eigen::VectorXd> v(n);
  Eigen::Index dim = -1;
  std::int64_t total_rows = 0;
  Eigen::VectorXd grand_sum;
  Eigen::VectorXd grand_sq;
  for (int i = 0; i < n; ++i) {
    const auto& train = manifest.clients[i].train;
    require(!train.empty(), "cni: client " + std::to_string(i) + " has no training data");
    std::map<int, std::vector<int>> by_class;
    for (int idx : train) by_class[d.labels[idx]].push_back(idx);

    Eigen::VectorXd acc;
    for (const auto& [cls, idxs] : by_class) {
      const Eigen::MatrixXd emb = enc.encode(gather(d, idxs).features);
      const Eigen::VectorXd class_mean = emb.colwise().mean();
      if (acc.size() == 0) acc = Eigen::VectorXd::Zero(emb.cols());
      acc += class_mean;
      if (dim < 0) {
        dim = emb.cols();
        grand_sum = Eigen::VectorXd::Zero(dim);
        grand_sq = Eigen::VectorXd::Zero(dim);
      }
      for (Eigen::Index r = 0; r < emb.rows(); ++r) {
        grand_sum += emb.row(r).transpose();
        grand_sq += emb.row(r).transpose().cwiseAbs2();
        ++total_rows;
      }
    }
    v[i] = acc / static_cast<double>(by_class.size());
  }

  // Population (divisor N) per-dimension std over all training embeddings.
  const Eigen::VectorXd mean = grand_sum / static_cast<double>(total_rows);
  const Eigen::VectorXd var =
      (grand_sq / static_cast<double>(total_rows) - mean.cwiseAbs2()).cwiseMax(0.0);
  const Eigen::VectorXd sigma = var.cwiseSqrt();

  Eigen::VectorXd v_sum = Eigen::VectorXd::Zero(dim);
  for (const auto& vi : v) v_sum += vi;

  CniReport rep;
  rep.encoder_desc = enc.describe();
  rep.interpretation =
      "cni(i) = l2 over dims with sigma>0 of (v_i - mean_{j!=i} v_j)/sigma; "
      "v_i = mean over client i's classes of the class-mean embedding; "
      "sigma = population std per dim over all clients' training embeddings";
  rep.per_client.resize(n);
  double total = 0;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd u = (v_sum - v[i]) / static_cast<double>(n - 1);
    double sq = 0;
    for (Eigen::Index k = 0; k < dim; ++k)
      if (sigma[k] > 0) {
        const double z = (v[i][k] - u[k]) / sigma[k];
        sq += z * z;
      }
    rep.per_client[i] = std::sqrt(sq);
    total += rep.per_client[i];
  }
  rep.mean = total / n;
  return rep;
}

double avg_accuracy(const std::vector<double>& per_client_accuracy) {
  require(!per_client_accuracy.empty(), "avg_accuracy: empty client set");
  double s = 0;
  for (double a : per_client_accuracy) s += a;
  return s / static_cast<double>(per_client_accuracy.size());
}

std::vector<double> personalized_param_analysis(const std::vector<Mask>& masks,
                                                double threshold) {
  require(!masks.empty(), "personalized_param_analysis: no masks");
  for (const auto& m : masks)
    require(m.same_shape(masks.front()), "personalized_param_analysis: shape mismatch");

  const double cutoff = threshold * static_cast<double>(masks.size());
  const std::size_t layers = masks.front().weights.size();
  std::vector<double> fractions(layers, 0.0);
  for (std::size_t l = 0; l < layers; ++l) {
    const Eigen::Index wn = masks.front().weights[l].size();
    const Eigen::Index bn = masks.front().biases[l].size();
    std::vector<int> count(static_cast<std::size_t>(wn + bn), 0);
    for (const auto& m : masks) {
      const std::uint8_t* w = m.weights[l].data();
      for (Eigen::Index i = 0; i < wn; ++i)
        if (w[i]) count[i] += 1;
      const std::uint8_t* b = m.biases[l].data();
      for (Eigen::Index i = 0; i < bn; ++i)
        if (b[i]) count[wn + i] += 1;
    }
    std::int64_t personalized = 0;
    for (int c : count)
      if (static_cast<double>(c) < cutoff) ++personalized;
    fractions[l] = static_cast<double>(personalized) / static_cast<double>(wn + bn);
  }
  return fractions;
}

}  // namespace lfl
