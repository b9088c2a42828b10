#include "lfl/client.hpp"

namespace lfl {

PreparedRound prepare_round(const ClientState& state, const ParamVectorF& theta_down,
                            const ParamVectorF& theta0, const HyperParams& hp) {
  hp.validate();
  require(theta_down.same_shape(state.mask), "prepare_round: params/mask shape mismatch");
  PreparedRound out;
  out.val_acc = evaluate(theta_down, state.mask, state.data.val);
  // Both gates are strict: prune only while accuracy exceeds the threshold
  // and the remaining fraction still exceeds the target.
  if (out.val_acc > hp.acc_threshold &&
      state.prune.remaining_fraction > hp.target_fraction) {
    out.mask = prune(theta_down, state.mask, hp.prune_rate);
    out.theta_start = rewind(theta_down, out.mask, theta0);
    out.prune.prune_events = state.prune.prune_events + 1;
    out.prune.remaining_fraction = remaining_weight_fraction(out.mask);
    out.pruned = true;
  } else {
    out.mask = state.mask;
    out.theta_start = theta_down;
    out.prune = state.prune;
    out.pruned = false;
  }
  return out;
}

ClientUpdateResult client_update(const ClientState& state, const ParamVectorF& theta_down,
                                 const ParamVectorF& theta0, const HyperParams& hp, int round) {
  require(state.data.train.size() > 0, "client_update: empty train split");
  PreparedRound prep = prepare_round(state, theta_down, theta0, hp);

  ClientUpdateResult res;
  res.theta_up = std::move(prep.theta_start);
  res.new_mask = std::move(prep.mask);
  res.new_prune = prep.prune;

  std::mt19937 g = client_round_rng(state.global_seed, state.id, round);
  res.stats.local_loss = train_epochs(res.theta_up, res.new_mask, state.data.train, hp.epochs,
                                      hp.batch_size, hp.eta, g);
  res.stats.val_acc = prep.val_acc;
  res.stats.pruned = prep.pruned;
  res.stats.remaining_fraction = prep.prune.remaining_fraction;
  res.stats.test_acc = evaluate(res.theta_up, res.new_mask, state.data.test);
  return res;
}

}  // namespace lfl
