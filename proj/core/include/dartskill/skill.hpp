#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dartskill/arm_sim.hpp"
#include "dartskill/dmp.hpp"

namespace dartskill {

// The scalar task feature used by both the classifier and the
// regressors: the target bearing mapped affinely to [0, 1].  A unit-scale
// input keeps the Gaussian kernel width meaningful across angle ranges.
struct TaskSpace {
  double angle_min = 0.2;
  double angle_max = 2.94;

  double normalize(double angle) const {
    return (angle - angle_min) / (angle_max - angle_min);
  }
  void validate() const;  // throws ParameterDomainError
};

// Example tasks with their learned policies and (once the manifold step
// has run) per-example chart labels in 1..num_charts.
struct TrainingSet {
  std::vector<Task> tasks;
  std::vector<PolicyVector> policies;
  std::vector<int> chart_labels;

  int count() const { return static_cast<int>(tasks.size()); }
  void validate(int num_charts, int min_chart_size) const;
};

// One-vs-rest linear scorer over (feature, 1); predicted chart is the
// argmax score, ties to the lowest chart index.
struct ChartClassifier {
  int num_charts = 1;
  Eigen::MatrixXd weights;  // num_charts x 2: [slope, bias] rows
  double training_accuracy = 1.0;

  int predict(double feature) const;
  // Feature value where the top-two scores cross, for two-chart
  // classifiers with a genuine crossing inside the feature range.
  std::optional<double> boundary_feature() const;
};

ChartClassifier train_classifier(const std::vector<double>& features,
                                 const std::vector<int>& labels,
                                 int num_charts);

// Gaussian-kernel ridge regressor for one chart, fitted against
// mean-centered targets so constant policies reproduce exactly:
//   prediction(x) = target_mean_j + sum_i coefficients(i, j) *
//                   exp(-gamma * (x - support[i])^2)
struct ChartRegressor {
  Eigen::VectorXd support;       // normalized task features
  Eigen::MatrixXd coefficients;  // support count x policy dim
  Eigen::VectorXd target_means;  // policy dim
  double ridge_used = 0.0;
};

// D charts x N policy dimensions of independent regressors sharing one
// kernel width.
struct RegressorGrid {
  double gamma = 5.0;
  int policy_dim = 0;
  std::vector<ChartRegressor> charts;

  Eigen::VectorXd predict(int chart, double feature) const;  // chart is 1-based
};

// Fits every chart's regressors; a kernel system too ill-conditioned at
// `ridge` retries with tenfold larger ridge values up to ridge_max before
// failing.
RegressorGrid train_regressors(const TrainingSet& training,
                               const TaskSpace& space, double gamma,
                               double ridge, double ridge_max);

struct SkillMetadata {
  int training_size = 0;
  std::string config_hash;  // 16 hex digits; empty when untracked
};

// The complete task -> policy map: classifier picks the chart, that
// chart's regressors produce the policy vector.
struct SkillModel {
  TaskSpace task_space;
  int num_charts = 1;
  ChartClassifier classifier;
  RegressorGrid grid;
  SkillMetadata metadata;

  void validate() const;  // cross-field consistency
};

struct SkillConfig {
  double gamma = 5.0;
  double ridge = 1e-6;
  double ridge_max = 1e-2;
  int min_chart_size = 3;
};

// Classifier + regressors in one call, from a chart-labeled training set.
SkillModel train_skill(const TrainingSet& training, const TaskSpace& space,
                       const SkillConfig& cfg);

// Predicted policy for a task: release threshold clamped to [0, 1], all
// other parameters taken as regressed.
PolicyVector predict(const SkillModel& skill, const Task& task);

// Versioned self-describing text container (JSON) with full round-trip
// precision; load rejects wrong versions and inconsistent sections.
void save_skill(const SkillModel& skill, const std::filesystem::path& path);
SkillModel load_skill(const std::filesystem::path& path);

}  // namespace dartskill
