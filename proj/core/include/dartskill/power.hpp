#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dartskill/arm_sim.hpp"
#include "dartskill/dmp.hpp"

namespace dartskill {

// Exploration and stopping meta-parameters of the policy search.
struct ExplorationConfig {
  // Per-parameter exploration variances, flattened policy order
  // [release, goal, weights...].  Parameters live on very different
  // scales, so each gets its own variance.
  Eigen::VectorXd exploration_variance;
  int rollouts_per_update = 20;
  int importance_top_k = 10;
  int history_window_batches = 3;  // importance pool spans this many batches
  int max_updates = 60;
  double success_threshold = 0.05;  // meters to target
  // Escape hatch for the sparse-reward plateau: after this many
  // consecutive all-zero-return batches, exploration restarts with its
  // variances scaled up by stall_variance_factor (cumulative).
  int stall_batches = 5;
  double stall_variance_factor = 4.0;
  double zero_return_floor = 1e-12;  // returns at or below count as zero

  static ExplorationConfig defaults(int num_weights = 35);
  void validate(int policy_dim) const;  // throws ParameterDomainError
};

// One perturbed execution: the policy actually run, the perturbation that
// produced it (perturbed = base + epsilon in flattened order), what
// happened, and the scalar return.
struct Rollout {
  PolicyVector perturbed_theta;
  Eigen::VectorXd epsilon;
  ThrowOutcome outcome;
  double return_value = 0.0;
  std::uint64_t seed = 0;
};

struct LearnResult {
  PolicyVector final_theta;
  int updates_used = 0;
  long long rollouts_used = 0;
  double best_distance = 0.0;
  bool converged = false;
  std::vector<double> history;  // best distance seen after each update
};

// Per-update progress record, surfaced to the pipeline run log.
struct UpdateProgress {
  int update_index = 0;       // 1-based; batch that just finished
  double best_distance = 0.0; // best unperturbed distance so far
  double mean_return = 0.0;   // over the batch just executed
  double max_return = 0.0;
  bool stalled_update = false;   // the update had zero total weight
  double variance_scale = 1.0;   // current stall-rule multiplier
};
using ProgressFn = std::function<void(const UpdateProgress&)>;

// Terminal reward of a throw: exp(-reward_scale * distance); a rollout's
// return equals its single terminal reward.
double throw_return(const ThrowOutcome& outcome, double reward_scale);

// Gaussian perturbation of every policy parameter, componentwise variance
// from cfg; deterministic in the seed.  The release threshold of the
// returned policy is clamped to [0, 1] and epsilon reflects the clamp, so
// perturbed = theta + epsilon holds exactly.
std::pair<PolicyVector, Eigen::VectorXd> perturb(const PolicyVector& theta,
                                                 const ExplorationConfig& cfg,
                                                 std::uint64_t seed);

// Indices of the k highest-return rollouts in the pool; ties broken
// toward higher index (newer rollout).  Returned in descending return
// order.
std::vector<std::size_t> importance_select(std::span<const Rollout> pool,
                                           int k);

// Success-weighted parameter shift over the given rollouts:
//   theta' = theta + sum(eps_i * Q_i) / sum(Q_i).
// All-zero returns leave theta unchanged and set `stalled`.
struct PowerUpdate {
  PolicyVector theta;
  bool stalled = false;
};
PowerUpdate power_update(const PolicyVector& theta,
                         std::span<const Rollout> rollouts,
                         const ExplorationConfig& cfg);

// Full search loop: evaluate the unperturbed policy, then repeat
// (perturb x rollouts_per_update -> simulate -> select -> update) until
// the unperturbed policy lands within success_threshold or max_updates
// batches have run.  Deterministic in `seed`.
LearnResult learn_policy(const Task& task, const PolicyVector& init_theta,
                         const ExplorationConfig& cfg, const SimContext& ctx,
                         std::uint64_t seed, const ProgressFn& progress = {});

}  // namespace dartskill
