#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "lfl/arch.hpp"
#include "lfl/mask.hpp"
#include "lfl/rng.hpp"

namespace lfl {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// All parameters of a feed-forward net. weights[l] is (in x out) so a batch
// (rows = examples) right-multiplies it; biases[l] has one entry per output
// unit. Flat parameter order, used by every serializer and tie-break rule,
// is [W_0 column-major, b_0, W_1 column-major, b_1, ...].
template <typename Scalar>
struct ParamVector {
  std::vector<MatrixX<Scalar>> weights;
  std::vector<VectorX<Scalar>> biases;

  static ParamVector zeros(const ModelArch& arch) {
    arch.validate();
    ParamVector p;
    for (int l = 0; l + 1 < static_cast<int>(arch.layer_sizes.size()); ++l) {
      p.weights.push_back(MatrixX<Scalar>::Zero(arch.layer_sizes[l], arch.layer_sizes[l + 1]));
      p.biases.push_back(VectorX<Scalar>::Zero(arch.layer_sizes[l + 1]));
    }
    return p;
  }

  std::int64_t total_len() const {
    std::int64_t n = 0;
    for (const auto& w : weights) n += w.size();
    for (const auto& b : biases) n += b.size();
    return n;
  }

  ModelArch arch() const {
    ModelArch a;
    for (const auto& w : weights) a.layer_sizes.push_back(static_cast<int>(w.rows()));
    a.layer_sizes.push_back(static_cast<int>(weights.back().cols()));
    return a;
  }

  bool same_shape(const ParamVector& o) const {
    if (weights.size() != o.weights.size()) return false;
    for (std::size_t l = 0; l < weights.size(); ++l)
      if (weights[l].rows() != o.weights[l].rows() || weights[l].cols() != o.weights[l].cols() ||
          biases[l].size() != o.biases[l].size())
        return false;
    return true;
  }

  bool same_shape(const Mask& m) const {
    if (weights.size() != m.weights.size()) return false;
    for (std::size_t l = 0; l < weights.size(); ++l)
      if (weights[l].rows() != m.weights[l].rows() || weights[l].cols() != m.weights[l].cols() ||
          biases[l].size() != m.biases[l].size())
        return false;
    return true;
  }
};

using ParamVectorF = ParamVector<float>;

template <typename Scalar>
struct Batch {
  MatrixX<Scalar> features;  // one example per row
  Eigen::VectorXi labels;

  Eigen::Index size() const { return features.rows(); }
};

using BatchF = Batch<float>;

template <typename To, typename From>
ParamVector<To> param_cast(const ParamVector<From>& p) {
  ParamVector<To> out;
  for (const auto& w : p.weights) out.weights.push_back(w.template cast<To>());
  for (const auto& b : p.biases) out.biases.push_back(b.template cast<To>());
  return out;
}

template <typename To, typename From>
Batch<To> batch_cast(const Batch<From>& b) {
  return Batch<To>{b.features.template cast<To>(), b.labels};
}

// Zero-mean uniform init scaled by fan-in, biases zero. Pure function of
// (arch, seed): weights are drawn layer by layer in flat order.
template <typename Scalar>
ParamVector<Scalar> init_params(const ModelArch& arch, std::uint64_t seed) {
  arch.validate();
  auto p = ParamVector<Scalar>::zeros(arch);
  std::mt19937 g = rng::make_engine(rng::stream_seed(seed, {rng::kInitParams}));
  for (auto& w : p.weights) {
    const float scale = 1.0f / std::sqrt(static_cast<float>(w.rows()));
    Scalar* data = w.data();  // column-major
    for (Eigen::Index i = 0; i < w.size(); ++i)
      data[i] = static_cast<Scalar>((2.0f * rng::unit_float(g) - 1.0f) * scale);
  }
  return p;
}

namespace detail {

template <typename Scalar>
MatrixX<Scalar> masked(const MatrixX<Scalar>& w, const MaskMatrix& m) {
  return (m != 0).select(w.array(), Scalar(0)).matrix();
}

template <typename Scalar>
VectorX<Scalar> masked(const VectorX<Scalar>& b, const MaskVector& m) {
  return (m != 0).select(b.array(), Scalar(0)).matrix();
}

template <typename Scalar>
void check_shapes(const ParamVector<Scalar>& p, const Mask& m, const Batch<Scalar>& batch) {
  require(p.same_shape(m), "params/mask shape mismatch");
  require(batch.features.rows() == batch.labels.size(), "batch: feature rows != label count");
  require(batch.features.cols() == p.weights.front().rows(), "batch: feature dim != input dim");
  const int classes = static_cast<int>(p.weights.back().cols());
  for (Eigen::Index i = 0; i < batch.labels.size(); ++i)
    require(batch.labels[i] >= 0 && batch.labels[i] < classes, "batch: label out of range");
}

// Forward pass on theta (.) mask; activations[k] is the input to layer k.
template <typename Scalar>
MatrixX<Scalar> forward_activations(const ParamVector<Scalar>& p, const Mask& m,
                                    const MatrixX<Scalar>& x,
                                    std::vector<MatrixX<Scalar>>* activations) {
  const int layers = static_cast<int>(p.weights.size());
  MatrixX<Scalar> a = x;
  for (int l = 0; l < layers; ++l) {
    if (activations) activations->push_back(a);
    MatrixX<Scalar> z = a * masked(p.weights[l], m.weights[l]);
    z.rowwise() += masked(p.biases[l], m.biases[l]).transpose();
    if (l + 1 < layers) a = z.cwiseMax(Scalar(0));
    else a = std::move(z);
  }
  return a;
}

// Mean cross-entropy from logits, accumulated in double in row order.
template <typename Scalar>
double cross_entropy(const MatrixX<Scalar>& logits, const Eigen::VectorXi& labels) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const Scalar m = logits.row(i).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j)
      sum += std::exp(static_cast<double>(logits(i, j) - m));
    total += static_cast<double>(m) + std::log(sum) - static_cast<double>(logits(i, labels[i]));
  }
  return total / static_cast<double>(logits.rows());
}

}  // namespace detail

template <typename Scalar>
MatrixX<Scalar> forward_logits(const ParamVector<Scalar>& p, const Mask& m,
                               const MatrixX<Scalar>& features) {
  return detail::forward_activations(p, m, features,
                                     static_cast<std::vector<MatrixX<Scalar>>*>(nullptr));
}

template <typename Scalar>
struct ForwardResult {
  double loss;
  MatrixX<Scalar> logits;
};

template <typename Scalar>
ForwardResult<Scalar> forward_loss(const ParamVector<Scalar>& p, const Mask& m,
                                   const Batch<Scalar>& batch) {
  detail::check_shapes(p, m, batch);
  require(batch.size() > 0, "forward_loss: empty batch");
  MatrixX<Scalar> logits = forward_logits(p, m, batch.features);
  return {detail::cross_entropy(logits, batch.labels), std::move(logits)};
}

template <typename Scalar>
struct BackpropResult {
  double loss;
  ParamVector<Scalar> grad;
};

// Gradient of mean cross-entropy w.r.t. the unmasked parameters; exactly
// zero (positive zero) at masked-out positions.
template <typename Scalar>
BackpropResult<Scalar> backprop(const ParamVector<Scalar>& p, const Mask& m,
                                const Batch<Scalar>& batch) {
  detail::check_shapes(p, m, batch);
  require(batch.size() > 0, "backprop: empty batch");
  const int layers = static_cast<int>(p.weights.size());
  std::vector<MatrixX<Scalar>> acts;
  acts.reserve(layers);
  MatrixX<Scalar> logits = detail::forward_activations(p, m, batch.features, &acts);
  const double loss = detail::cross_entropy(logits, batch.labels);

  const Scalar inv_b = Scalar(1) / static_cast<Scalar>(batch.size());
  // dL/dlogits = (softmax - onehot) / B, computed stably per row.
  MatrixX<Scalar> delta(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const Scalar mx = logits.row(i).maxCoeff();
    VectorX<Scalar> e = (logits.row(i).array() - mx).exp().matrix().transpose();
    delta.row(i) = (e / e.sum()).transpose() * inv_b;
    delta(i, batch.labels[i]) -= inv_b;
  }

  auto grad = ParamVector<Scalar>::zeros(p.arch());
  for (int l = layers - 1; l >= 0; --l) {
    grad.weights[l] = detail::masked<Scalar>((acts[l].transpose() * delta).eval(), m.weights[l]);
    grad.biases[l] = detail::masked<Scalar>(delta.colwise().sum().transpose().eval(), m.biases[l]);
    if (l > 0) {
      MatrixX<Scalar> back = delta * detail::masked(p.weights[l], m.weights[l]).transpose();
      delta = (acts[l].array() > Scalar(0)).select(back.array(), Scalar(0)).matrix();
    }
  }
  return {loss, std::move(grad)};
}

template <typename Scalar>
ParamVector<Scalar> backward(const ParamVector<Scalar>& p, const Mask& m,
                             const Batch<Scalar>& batch) {
  return backprop(p, m, batch).grad;
}

// params - eta * grad at alive positions; masked positions stay exactly 0.
template <typename Scalar>
void sgd_step_inplace(ParamVector<Scalar>& p, const ParamVector<Scalar>& grad, const Mask& m,
                      Scalar eta) {
  require(p.same_shape(grad) && p.same_shape(m), "sgd_step: shape mismatch");
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    p.weights[l] = (m.weights[l] != 0)
                       .select(p.weights[l].array() - eta * grad.weights[l].array(), Scalar(0))
                       .matrix();
    p.biases[l] = (m.biases[l] != 0)
                      .select(p.biases[l].array() - eta * grad.biases[l].array(), Scalar(0))
                      .matrix();
  }
}

template <typename Scalar>
ParamVector<Scalar> sgd_step(const ParamVector<Scalar>& p, const ParamVector<Scalar>& grad,
                             const Mask& m, Scalar eta) {
  ParamVector<Scalar> out = p;
  sgd_step_inplace(out, grad, m, eta);
  return out;
}

// E epochs of mini-batch SGD with a fresh shuffle per epoch; the final short
// batch is kept. Returns the mean loss over all batch steps.
template <typename Scalar>
double train_epochs(ParamVector<Scalar>& params, const Mask& mask, const Batch<Scalar>& train,
                    int epochs, int batch_size, Scalar eta, std::mt19937& g) {
  require(train.size() > 0, "train_epochs: empty train split");
  require(epochs >= 1 && batch_size >= 1, "train_epochs: bad hyperparameters");
  const int n = static_cast<int>(train.size());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;

  double loss_sum = 0.0;
  int steps = 0;
  Batch<Scalar> batch;
  for (int e = 0; e < epochs; ++e) {
    rng::shuffle(order, g);
    for (int start = 0; start < n; start += batch_size) {
      const int len = std::min(batch_size, n - start);
      batch.features.resize(len, train.features.cols());
      batch.labels.resize(len);
      for (int r = 0; r < len; ++r) {
        batch.features.row(r) = train.features.row(order[start + r]);
        batch.labels[r] = train.labels[order[start + r]];
      }
      auto res = backprop(params, mask, batch);
      sgd_step_inplace(params, res.grad, mask, eta);
      loss_sum += res.loss;
      ++steps;
    }
  }
  return loss_sum / steps;
}

// Fraction of examples whose argmax logit matches the label; ties go to the
// lowest class index.
template <typename Scalar>
double evaluate(const ParamVector<Scalar>& p, const Mask& m, const Batch<Scalar>& split) {
  detail::check_shapes(p, m, split);
  require(split.size() > 0, "evaluate: empty split");
  MatrixX<Scalar> logits = forward_logits(p, m, split.features);
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    int best = 0;
    for (Eigen::Index j = 1; j < logits.cols(); ++j)
      if (logits(i, j) > logits(i, best)) best = static_cast<int>(j);
    if (best == split.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(split.size());
}

}  // namespace lfl
