#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dartskill/arm_sim.hpp"
#include "dartskill/dmp.hpp"
#include "dartskill/manifold.hpp"
#include "dartskill/power.hpp"
#include "dartskill/skill.hpp"

namespace dartskill {

// Uniform task sampler over a bearing interval.
struct TaskDistribution {
  double angle_min = 0.2;
  double angle_max = 2.94;  // right wall above base, ceiling, left wall
  std::uint64_t seed = 0;
};

std::vector<Task> sample_tasks(const TaskDistribution& dist, int n,
                               const ArmConfig& cfg);

// Every knob of a full experiment, serializable to/from a JSON config
// file and hashed (minus output_dir) into all output files.
struct ExperimentConfig {
  ArmConfig arm;
  PidGains gains;
  DmpConstants dmp = DmpConstants::defaults();
  ExplorationConfig exploration = ExplorationConfig::defaults();
  ChartDetectConfig chart_detect;
  SkillConfig skill;
  TaskDistribution tasks;       // seed field is unused; master_seed rules
  PolicyVector init_policy;     // cold-start initialization
  int num_training_tasks = 44;  // size of the learned example pool
  int num_eval_tasks = 15;      // held-out tasks, disjoint from training
  bool warm_start = true;
  std::vector<int> sweep = {3, 6, 9, 12, 15, 20, 24};  // |K| axis
  int embedding_dim_max = 5;    // residual-variance curve length
  std::uint64_t master_seed = 1;
  std::string output_dir = "out";

  static ExperimentConfig defaults();
  void validate() const;
  SimContext sim_context() const { return {arm, gains, dmp}; }
};

// Canonical JSON text of a config (sorted keys, no output_dir in the
// hashed form) and its 16-hex-digit content hash.
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);
void save_config(const ExperimentConfig& cfg,
                 const std::filesystem::path& path);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_hash(const ExperimentConfig& cfg);

// Single-policy persistence (used by the CLI's learn/predict commands).
void save_policy(const PolicyVector& policy,
                 const std::filesystem::path& path);
PolicyVector load_policy(const std::filesystem::path& path);

// The arm hangs straight down, so negating the goal and the forcing
// weights mirrors a throw about the vertical.  From-scratch learning
// races the template against its mirror and keeps the better outcome;
// that is how both strategy families get seeded.
PolicyVector mirrored_policy(const PolicyVector& policy);

// Append-only structured event log; one experiment writes one log file
// with a record_type discriminator column.
class RunLog {
 public:
  void learn_event(const std::string& stage, int task_index,
                   double task_angle, const UpdateProgress& progress);
  void task_summary(const std::string& stage, int task_index,
                    double task_angle, const LearnResult& result);
  void note(const std::string& stage, const std::string& message);
  void save(const std::filesystem::path& path,
            const std::string& hash) const;
  int rows() const { return static_cast<int>(rows_.size()); }

 private:
  std::vector<std::vector<std::string>> rows_;
};

// One learned training example.
struct TaskLearnRecord {
  int task_index = 0;
  double angle = 0.0;
  int chart = 0;  // assigned by the manifold stage over the full pool
  int updates_used = 0;
  long long rollouts_used = 0;
  double best_distance = 0.0;
  bool converged = false;
  PolicyVector policy;
};

// Training pool: the per-task records that converged, in sampling order.
struct TrainingPool {
  std::vector<Task> tasks;
  std::vector<TaskLearnRecord> records;
  int failed_tasks = 0;
  long long total_rollouts = 0;  // includes rollouts spent on failed tasks
};

// Learns a policy for every task (warm-starting from the nearest solved
// task when enabled); excludes tasks that fail to converge; aborts when
// more than half fail.
TrainingPool build_training_set(const std::vector<Task>& tasks,
                                const ExperimentConfig& cfg, RunLog* log);

// Manifold analysis over a pool's policies.
struct ChartAnalysis {
  ChartAssignment assignment;
  // Per chart: the residual-variance curve and its elbow estimate.
  std::vector<std::vector<double>> residual_curves;
  std::vector<int> dimension_estimates;
  // Per chart: 2-D embedding coordinates and the member point indices
  // (into the pool) they belong to.
  std::vector<Eigen::MatrixXd> embeddings;
  std::vector<std::vector<int>> members;
};
// Per-dimension scales (the exploration standard deviations) that make
// policy-space distances comparable across λ, g and the basis weights;
// manifold analysis runs on flatten()/scales coordinates.
Eigen::VectorXd policy_feature_scales(const ExplorationConfig& cfg);

ChartAnalysis analyze_charts(const std::vector<PolicyVector>& policies,
                             const Eigen::VectorXd& feature_scales,
                             const ChartDetectConfig& detect,
                             int embedding_dim_max);

// Held-out evaluation of one skill at one sweep point.
struct EvalRecord {
  int sweep_k = 0;
  int eval_index = 0;
  double angle = 0.0;
  double param_error = 0.0;  // mean per-dimension scaled absolute error
  double param_rmse = 0.0;
  double zero_shot_distance = 0.0;
  int fine_tune_updates = 0;
  bool fine_tune_converged = false;
};

struct SweepSummary {
  int k = 0;  // training examples given to the skill
  int num_charts = 0;
  double classifier_accuracy = 0.0;
  double mean_param_error = 0.0;
  double mean_zero_shot_distance = 0.0;
  double mean_fine_tune_updates = 0.0;
};

struct ExperimentReport {
  std::string hash;  // config hash, stamped into every output
  std::vector<TaskLearnRecord> training;
  ChartAnalysis charts;               // over the full training pool
  double boundary_angle = 0.0;        // NaN unless the full pool has 2 charts
  double classifier_accuracy = 0.0;   // full-pool classifier
  std::vector<double> eval_angles;
  // Updates the winning reference attempt itself took, per eval task.
  std::vector<int> reference_updates;
  // From-scratch learning cost, per eval task: candidate initializations
  // are tried in order and failed attempts are billed in full, which is
  // what a learner without the skill actually pays.
  std::vector<int> cold_start_updates;
  std::vector<bool> cold_start_converged;   // per eval task
  std::vector<EvalRecord> evals;            // sweep x eval tasks
  std::vector<SweepSummary> sweep;
  long long total_rollouts = 0;
  // Wall-clock seconds; reported on stdout only and deliberately kept
  // out of the serialized report so reruns are byte-identical.
  double total_runtime_seconds = 0.0;
};

using StageFn = std::function<void(const std::string& stage)>;

// The full protocol: sample tasks, learn the pool, analyze charts, then
// for each sweep size train a skill from that many examples and measure
// parameter error / zero-shot distance / fine-tune updates on the shared
// held-out tasks.  Writes report.json, CSVs, figures and the run log to
// cfg.output_dir.
ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const StageFn& on_stage = {});

// Report persistence (deterministic serialization) and figure emission.
void save_report(const ExperimentReport& report,
                 const std::filesystem::path& path);
ExperimentReport load_report(const std::filesystem::path& path);
void emit_figures(const ExperimentReport& report,
                  const std::filesystem::path& output_dir);

}  // namespace dartskill
