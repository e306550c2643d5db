#include "dartskill/power.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dartskill/errors.hpp"
#include "dartskill/random.hpp"

namespace dartskill {

ExplorationConfig ExplorationConfig::defaults(int num_weights) {
  ExplorationConfig cfg;
  cfg.exploration_variance.resize(PolicyVector::kWeightOffset + num_weights);
  cfg.exploration_variance[PolicyVector::kReleaseIndex] = 0.0025;
  cfg.exploration_variance[PolicyVector::kGoalIndex] = 0.01;
  for (int i = 0; i < num_weights; ++i) {
    cfg.exploration_variance[PolicyVector::kWeightOffset + i] = 25.0;
  }
  return cfg;
}

void ExplorationConfig::validate(int policy_dim) const {
  if (exploration_variance.size() != policy_dim) {
    throw ParameterDomainError(
        "ExplorationConfig: variance vector has " +
        std::to_string(exploration_variance.size()) + " entries, policy has " +
        std::to_string(policy_dim));
  }
  for (int i = 0; i < exploration_variance.size(); ++i) {
    if (!std::isfinite(exploration_variance[i]) ||
        exploration_variance[i] < 0.0) {
      throw ParameterDomainError(
          "ExplorationConfig: variances must be finite and >= 0");
    }
  }
  if (rollouts_per_update < 1) {
    throw ParameterDomainError("ExplorationConfig: rollouts_per_update >= 1");
  }
  if (history_window_batches < 1) {
    throw ParameterDomainError(
        "ExplorationConfig: history_window_batches >= 1");
  }
  if (importance_top_k < 1 ||
      importance_top_k > rollouts_per_update * history_window_batches) {
    throw ParameterDomainError(
        "ExplorationConfig: importance_top_k must lie in [1, "
        "rollouts_per_update * history_window_batches]");
  }
  if (max_updates < 0) {
    throw ParameterDomainError("ExplorationConfig: max_updates >= 0");
  }
  if (!(success_threshold > 0.0)) {
    throw ParameterDomainError("ExplorationConfig: success_threshold > 0");
  }
  if (stall_batches < 1 || !(stall_variance_factor >= 1.0)) {
    throw ParameterDomainError(
        "ExplorationConfig: stall_batches >= 1 and factor >= 1");
  }
}

double throw_return(const ThrowOutcome& outcome, double reward_scale) {
  return std::exp(-reward_scale * outcome.distance_to_target);
}

std::pair<PolicyVector, Eigen::VectorXd> perturb(const PolicyVector& theta,
                                                 const ExplorationConfig& cfg,
                                                 std::uint64_t seed) {
  const int dim = theta.dimension();
  cfg.validate(dim);
  Rng rng(seed);
  Eigen::VectorXd epsilon(dim);
  for (int i = 0; i < dim; ++i) {
    const double sigma = std::sqrt(cfg.exploration_variance[i]);
    epsilon[i] = sigma > 0.0 ? rng.gaussian(0.0, sigma) : 0.0;
  }
  Eigen::VectorXd flat = theta.flatten() + epsilon;
  // The release threshold must stay a valid phase value; project it back
  // and fold the projection into epsilon so perturbed = theta + epsilon
  // stays exact.
  const double clamped =
      std::clamp(flat[PolicyVector::kReleaseIndex], 0.0, 1.0);
  epsilon[PolicyVector::kReleaseIndex] += clamped - flat[PolicyVector::kReleaseIndex];
  flat[PolicyVector::kReleaseIndex] = clamped;
  return {PolicyVector::from_flat(flat), std::move(epsilon)};
}

std::vector<std::size_t> importance_select(std::span<const Rollout> pool,
                                           int k) {
  if (pool.empty()) {
    throw ParameterDomainError("importance_select: empty rollout pool");
  }
  if (k < 1) throw ParameterDomainError("importance_select: k >= 1");
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pool[a].return_value != pool[b].return_value) {
      return pool[a].return_value > pool[b].return_value;
    }
    return a > b;  // equal returns: the newer rollout wins
  });
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(k)));
  return order;
}

PowerUpdate power_update(const PolicyVector& theta,
                         std::span<const Rollout> rollouts,
                         const ExplorationConfig& cfg) {
  const int dim = theta.dimension();
  cfg.validate(dim);
  // Canonical accumulation order (by rollout seed) so a parallel caller
  // handing over rollouts in completion order still gets bit-identical
  // results.
  std::vector<std::size_t> order(rollouts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rollouts[a].seed != rollouts[b].seed) {
      return rollouts[a].seed < rollouts[b].seed;
    }
    return a < b;
  });

  Eigen::VectorXd shift = Eigen::VectorXd::Zero(dim);
  double total_weight = 0.0;
  for (std::size_t idx : order) {
    const Rollout& rollout = rollouts[idx];
    if (rollout.epsilon.size() != dim) {
      throw ParameterDomainError("power_update: epsilon dimension mismatch");
    }
    if (!std::isfinite(rollout.return_value) || rollout.return_value < 0.0) {
      throw ParameterDomainError(
          "power_update: returns must be finite and >= 0");
    }
    shift += rollout.epsilon * rollout.return_value;
    total_weight += rollout.return_value;
  }

  PowerUpdate result;
  if (total_weight <= 0.0) {
    result.theta = theta;
    result.stalled = true;
    return result;
  }
  result.theta = PolicyVector::from_flat(theta.flatten() + shift / total_weight);
  result.stalled = false;
  return result;
}

LearnResult learn_policy(const Task& task, const PolicyVector& init_theta,
                         const ExplorationConfig& cfg, const SimContext& ctx,
                         std::uint64_t seed, const ProgressFn& progress) {
  cfg.validate(init_theta.dimension());

  PolicyVector theta = init_theta;
  LearnResult result;
  result.final_theta = theta;

  // The search is judged on the unperturbed policy, checked once before
  // any update (a warm start may already be good enough) and once after
  // every batch.
  ThrowOutcome current = simulate_throw(theta, task, ctx);
  result.best_distance = current.distance_to_target;
  result.converged = result.best_distance <= cfg.success_threshold;
  if (result.converged) return result;

  std::vector<Rollout> pool;
  const std::size_t pool_capacity =
      static_cast<std::size_t>(cfg.history_window_batches) *
      static_cast<std::size_t>(cfg.rollouts_per_update);
  pool.reserve(pool_capacity + static_cast<std::size_t>(cfg.rollouts_per_update));

  ExplorationConfig active = cfg;
  double variance_scale = 1.0;
  int zero_streak = 0;

  for (int update = 1; update <= cfg.max_updates; ++update) {
    double batch_return_sum = 0.0;
    double batch_return_max = 0.0;
    for (int r = 0; r < cfg.rollouts_per_update; ++r) {
      Rollout rollout;
      rollout.seed = derive_seed(seed, {static_cast<std::uint64_t>(update),
                                        static_cast<std::uint64_t>(r)});
      auto [perturbed, epsilon] = perturb(theta, active, rollout.seed);
      rollout.perturbed_theta = std::move(perturbed);
      rollout.epsilon = std::move(epsilon);
      rollout.outcome = simulate_throw(rollout.perturbed_theta, task, ctx);
      rollout.return_value =
          throw_return(rollout.outcome, ctx.arm.reward_scale);
      batch_return_sum += rollout.return_value;
      batch_return_max = std::max(batch_return_max, rollout.return_value);
      pool.push_back(std::move(rollout));
    }
    result.rollouts_used += cfg.rollouts_per_update;
    if (pool.size() > pool_capacity) {
      pool.erase(pool.begin(),
                 pool.begin() + static_cast<std::ptrdiff_t>(pool.size() -
                                                            pool_capacity));
    }

    const std::vector<std::size_t> selected =
        importance_select(pool, cfg.importance_top_k);
    std::vector<Rollout> chosen;
    chosen.reserve(selected.size());
    for (std::size_t idx : selected) chosen.push_back(pool[idx]);
    PowerUpdate updated = power_update(theta, chosen, cfg);
    theta = std::move(updated.theta);
    // Keep the mean policy simulable: the release threshold is a phase.
    theta.release_phase = std::clamp(theta.release_phase, 0.0, 1.0);

    current = simulate_throw(theta, task, ctx);
    result.updates_used = update;
    if (current.distance_to_target < result.best_distance) {
      result.best_distance = current.distance_to_target;
      result.final_theta = theta;
    }
    result.history.push_back(result.best_distance);

    // Sparse-reward stall rule: a run of batches with no usable reward
    // triggers a wider search (cumulatively).
    if (batch_return_max <= cfg.zero_return_floor) {
      ++zero_streak;
    } else {
      zero_streak = 0;
    }
    if (zero_streak >= cfg.stall_batches) {
      variance_scale *= cfg.stall_variance_factor;
      active.exploration_variance = cfg.exploration_variance * variance_scale;
      zero_streak = 0;
    }

    if (progress) {
      UpdateProgress record;
      record.update_index = update;
      record.best_distance = result.best_distance;
      record.mean_return = batch_return_sum / cfg.rollouts_per_update;
      record.max_return = batch_return_max;
      record.stalled_update = updated.stalled;
      record.variance_scale = variance_scale;
      progress(record);
    }

    if (result.best_distance <= cfg.success_threshold) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace dartskill
