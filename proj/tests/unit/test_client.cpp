#include <doctest.h>

#include "helpers.hpp"

using namespace lfl;
using lfl::test::blob_client;
using lfl::test::params_equal;

namespace {

// A val split whose class-0 share is exactly `zeros`/`total`: with all-zero
// logits the argmax tie-break predicts class 0, so accuracy is known.
BatchF constant_prediction_split(int zeros, int total, int dim) {
  BatchF b;
  b.features = MatrixX<float>::Zero(total, dim);
  b.labels.resize(total);
  for (int i = 0; i < total; ++i) b.labels[i] = i < zeros ? 0 : 1;
  return b;
}

HyperParams fast_hp() {
  HyperParams hp;
  hp.epochs = 2;
  hp.batch_size = 8;
  hp.eta = 0.05f;
  hp.sample_rate = 1.0;
  return hp;
}

}  // namespace

TEST_CASE("evaluate counts argmax hits with ties to the lowest class") {
  const ModelArch arch{{4, 10}};
  const auto zeros = ParamVectorF::zeros(arch);
  const Mask full = full_mask(arch);

  BatchF balanced;
  balanced.features = MatrixX<float>::Random(20, 4);
  balanced.labels.resize(20);
  for (int i = 0; i < 20; ++i) balanced.labels[i] = i % 10;
  CHECK(evaluate(zeros, full, balanced) == doctest::Approx(0.1));

  BatchF single;
  single.features = MatrixX<float>::Random(6, 4);
  single.labels = Eigen::VectorXi::Zero(6);
  CHECK(evaluate(zeros, full, single) == doctest::Approx(1.0));

  BatchF empty;
  empty.features.resize(0, 4);
  empty.labels.resize(0);
  CHECK_THROWS_AS(evaluate(zeros, full, empty), std::invalid_argument);
}

TEST_CASE("evaluate on a 3-of-4 split is 0.75") {
  const ModelArch arch{{2, 2}};
  auto p = ParamVectorF::zeros(arch);
  p.weights[0] << 1, 0, 0, 1;
  BatchF b;
  b.features.resize(4, 2);
  b.features << 1, 0, 1, 0, 0, 1, 0, 1;
  b.labels.resize(4);
  b.labels << 0, 0, 1, 0;  // last one is wrong on purpose
  CHECK(evaluate(p, full_mask(arch), b) == doctest::Approx(0.75));
}

TEST_CASE("prune gate: low validation accuracy keeps the mask") {
  const ModelArch arch{{4, 2}};
  ClientState cs = blob_client(0, arch, 3);
  cs.data.val = constant_prediction_split(2, 5, 4);  // acc 0.4 on zero params

  HyperParams hp = fast_hp();
  hp.acc_threshold = 0.5;
  const auto theta_down = ParamVectorF::zeros(arch);  // all-zero downloads
  const auto theta0 = init_params<float>(arch, 3);
  const PreparedRound prep = prepare_round(cs, theta_down, theta0, hp);
  CHECK(prep.val_acc == doctest::Approx(0.4));
  CHECK_FALSE(prep.pruned);
  CHECK(prep.mask == cs.mask);
}

TEST_CASE("prune gate: remaining fraction at the target blocks pruning") {
  const ModelArch arch{{4, 2}};
  ClientState cs = blob_client(0, arch, 4);
  cs.data.val = constant_prediction_split(5, 5, 4);  // acc 1.0
  cs.prune.remaining_fraction = 0.1;

  HyperParams hp = fast_hp();
  hp.target_fraction = 0.1;
  const PreparedRound prep =
      prepare_round(cs, ParamVectorF::zeros(arch), init_params<float>(arch, 4), hp);
  CHECK(prep.val_acc == doctest::Approx(1.0));
  CHECK_FALSE(prep.pruned);
}

TEST_CASE("prune gate: passing both gates prunes and rewinds to theta0") {
  const ModelArch arch{{4, 6, 2}};
  ClientState cs = blob_client(0, arch, 5);
  cs.data.val = constant_prediction_split(5, 5, 4);

  HyperParams hp = fast_hp();
  hp.target_fraction = 0.5;
  hp.prune_rate = 0.2;
  const auto theta0 = init_params<float>(arch, 5);
  const auto theta_down = init_params<float>(arch, 99);
  const PreparedRound prep = prepare_round(cs, theta_down, theta0, hp);
  CHECK(prep.pruned);
  CHECK(prep.prune.prune_events == 1);
  CHECK(prep.mask.subset_of(cs.mask));
  CHECK(prep.mask.alive_weight_count() < cs.mask.alive_weight_count());
  CHECK(params_equal(prep.theta_start, apply_mask(theta0, prep.mask)));
}

TEST_CASE("client_update trains, reports stats, and zeroes outside the mask") {
  const ModelArch arch{{4, 6, 2}};
  ClientState cs = blob_client(1, arch, 6);
  HyperParams hp = fast_hp();
  hp.acc_threshold = 0.0;
  hp.target_fraction = 0.5;
  const auto theta0 = init_params<float>(arch, 6);

  const ClientUpdateResult r = client_update(cs, apply_mask(theta0, cs.mask), theta0, hp, 0);
  CHECK(r.new_prune.prune_events <= cs.prune.prune_events + 1);  // at most one event per round
  CHECK(r.stats.remaining_fraction == doctest::Approx(remaining_weight_fraction(r.new_mask)));
  CHECK(r.stats.local_loss > 0.0);
  for (std::size_t l = 0; l < r.theta_up.weights.size(); ++l)
    for (Eigen::Index i = 0; i < r.theta_up.weights[l].size(); ++i)
      if (!r.new_mask.weights[l].data()[i]) CHECK(r.theta_up.weights[l].data()[i] == 0.0f);

  // Same inputs, same outputs.
  const ClientUpdateResult again = client_update(cs, apply_mask(theta0, cs.mask), theta0, hp, 0);
  CHECK(params_equal(r.theta_up, again.theta_up));
}

TEST_CASE("with the accuracy gate closed client_update is plain local SGD") {
  const ModelArch arch{{4, 5, 2}};
  ClientState cs = blob_client(2, arch, 7);
  HyperParams hp = fast_hp();
  hp.acc_threshold = 1.0;  // strict '>' can never pass
  const auto theta0 = init_params<float>(arch, 7);
  const auto theta_down = init_params<float>(arch, 70);

  const ClientUpdateResult r = client_update(cs, theta_down, theta0, hp, 3);
  CHECK_FALSE(r.stats.pruned);
  CHECK(r.new_mask == cs.mask);

  ParamVectorF manual = theta_down;
  std::mt19937 g = client_round_rng(cs.global_seed, cs.id, 3);
  train_epochs(manual, cs.mask, cs.data.train, hp.epochs, hp.batch_size, hp.eta, g);
  CHECK(params_equal(r.theta_up, manual));
}

TEST_CASE("client_update rejects an empty train split") {
  const ModelArch arch{{4, 2}};
  ClientState cs = blob_client(0, arch, 8);
  cs.data.train.features.resize(0, 4);
  cs.data.train.labels.resize(0);
  CHECK_THROWS(client_update(cs, ParamVectorF::zeros(arch), ParamVectorF::zeros(arch),
                             fast_hp(), 0));
}

TEST_CASE("remaining fraction is non-increasing over a multi-round client") {
  const ModelArch arch{{6, 8, 2}};
  ClientState cs = blob_client(0, arch, 9, 16);
  HyperParams hp = fast_hp();
  hp.acc_threshold = 0.0;
  hp.target_fraction = 0.3;
  const auto theta0 = init_params<float>(arch, 9);
  ParamVectorF theta = apply_mask(theta0, cs.mask);

  double prev = 1.0;
  for (int round = 0; round < 12; ++round) {
    const ClientUpdateResult r = client_update(cs, theta, theta0, hp, round);
    cs.mask = r.new_mask;
    cs.prune = r.new_prune;
    CHECK(cs.prune.remaining_fraction <= prev);
    // Bounded below by the target minus one event's step.
    CHECK(cs.prune.remaining_fraction >= hp.target_fraction * (1.0 - hp.prune_rate) - 1e-9);
    prev = cs.prune.remaining_fraction;
    theta = r.theta_up;
  }
  CHECK(cs.prune.remaining_fraction <= hp.target_fraction + 0.1);
}
