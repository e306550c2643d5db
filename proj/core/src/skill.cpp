#include "dartskill/skill.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "json.hpp"

#include "dartskill/errors.hpp"
#include "dartskill/text_io.hpp"

namespace dartskill {

using nlohmann::json;

void TaskSpace::validate() const {
  if (!std::isfinite(angle_min) || !std::isfinite(angle_max) ||
      !(angle_min < angle_max)) {
    throw ParameterDomainError("TaskSpace: need angle_min < angle_max");
  }
}

void TrainingSet::validate(int num_charts, int min_chart_size) const {
  const std::size_t n = tasks.size();
  if (n == 0) throw ParameterDomainError("TrainingSet: empty");
  if (policies.size() != n || chart_labels.size() != n) {
    throw ParameterDomainError(
        "TrainingSet: tasks, policies and chart_labels must align");
  }
  const int dim = policies.front().dimension();
  std::vector<int> per_chart(static_cast<std::size_t>(num_charts), 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (policies[i].dimension() != dim) {
      throw ParameterDomainError("TrainingSet: mixed policy dimensions");
    }
    if (!policies[i].all_finite()) {
      throw ParameterDomainError("TrainingSet: non-finite policy");
    }
    const int label = chart_labels[i];
    if (label < 1 || label > num_charts) {
      throw ParameterDomainError("TrainingSet: chart label out of range");
    }
    ++per_chart[static_cast<std::size_t>(label - 1)];
  }
  for (int c = 0; c < num_charts; ++c) {
    if (per_chart[static_cast<std::size_t>(c)] < min_chart_size) {
      throw ParameterDomainError("TrainingSet: chart " + std::to_string(c + 1) +
                                 " has fewer than " +
                                 std::to_string(min_chart_size) + " examples");
    }
  }
}

int ChartClassifier::predict(double feature) const {
  int best = 1;
  double best_score = weights(0, 0) * feature + weights(0, 1);
  for (int c = 1; c < num_charts; ++c) {
    const double score = weights(c, 0) * feature + weights(c, 1);
    if (score > best_score) {
      best_score = score;
      best = c + 1;
    }
  }
  return best;
}

std::optional<double> ChartClassifier::boundary_feature() const {
  if (num_charts != 2) return std::nullopt;
  const double slope = weights(0, 0) - weights(1, 0);
  const double bias = weights(0, 1) - weights(1, 1);
  if (slope == 0.0) return std::nullopt;
  return -bias / slope;
}

ChartClassifier train_classifier(const std::vector<double>& features,
                                 const std::vector<int>& labels,
                                 int num_charts) {
  if (features.empty() || features.size() != labels.size()) {
    throw ParameterDomainError(
        "train_classifier: features/labels must align and be non-empty");
  }
  if (num_charts < 1) {
    throw ParameterDomainError("train_classifier: num_charts >= 1");
  }
  std::vector<int> per_class(static_cast<std::size_t>(num_charts), 0);
  for (int label : labels) {
    if (label < 1 || label > num_charts) {
      throw ParameterDomainError("train_classifier: label out of range");
    }
    ++per_class[static_cast<std::size_t>(label - 1)];
  }
  for (int c = 0; c < num_charts; ++c) {
    if (per_class[static_cast<std::size_t>(c)] == 0) {
      throw ParameterDomainError("train_classifier: class " +
                                 std::to_string(c + 1) + " has no examples");
    }
  }

  ChartClassifier clf;
  clf.num_charts = num_charts;
  clf.weights = Eigen::MatrixXd::Zero(num_charts, 2);

  const auto accuracy_of = [&](const Eigen::MatrixXd& weights) {
    ChartClassifier probe;
    probe.num_charts = num_charts;
    probe.weights = weights;
    int hits = 0;
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (probe.predict(features[i]) == labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(features.size());
  };

  if (num_charts == 1) {
    clf.training_accuracy = 1.0;
    return clf;
  }

  // Multiclass perceptron with a pocket: keep the best-scoring weight
  // snapshot so non-separable labelings still yield the best linear fit
  // seen.  Deterministic: fixed sample order, no shuffling.
  Eigen::MatrixXd w = clf.weights;
  Eigen::MatrixXd pocket = w;
  double pocket_accuracy = accuracy_of(w);
  constexpr int kMaxEpochs = 200;
  for (int epoch = 0; epoch < kMaxEpochs; ++epoch) {
    int mistakes = 0;
    for (std::size_t i = 0; i < features.size(); ++i) {
      const double x = features[i];
      int predicted = 1;
      double best_score = w(0, 0) * x + w(0, 1);
      for (int c = 1; c < num_charts; ++c) {
        const double score = w(c, 0) * x + w(c, 1);
        if (score > best_score) {
          best_score = score;
          predicted = c + 1;
        }
      }
      const int truth = labels[i];
      if (predicted != truth) {
        ++mistakes;
        w(truth - 1, 0) += x;
        w(truth - 1, 1) += 1.0;
        w(predicted - 1, 0) -= x;
        w(predicted - 1, 1) -= 1.0;
      }
    }
    const double accuracy = accuracy_of(w);
    if (accuracy > pocket_accuracy) {
      pocket_accuracy = accuracy;
      pocket = w;
    }
    if (mistakes == 0) break;
  }
  clf.weights = pocket;
  clf.training_accuracy = pocket_accuracy;
  return clf;
}

namespace {

Eigen::MatrixXd kernel_matrix(const Eigen::VectorXd& a,
                              const Eigen::VectorXd& b, double gamma) {
  Eigen::MatrixXd k(a.size(), b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      const double d = a[i] - b[j];
      k(i, j) = std::exp(-gamma * d * d);
    }
  }
  return k;
}

ChartRegressor fit_chart(const Eigen::VectorXd& support,
                         const Eigen::MatrixXd& targets, double gamma,
                         double ridge, double ridge_max) {
  const Eigen::Index n = support.size();
  const Eigen::MatrixXd kernel = kernel_matrix(support, support, gamma);

  ChartRegressor model;
  model.support = support;
  model.target_means = targets.colwise().mean();
  const Eigen::MatrixXd centered = targets.rowwise() - model.target_means.transpose();

  // A singular or near-singular kernel system gets decade-stepped ridge
  // boosts before we give up; the solve is accepted when it actually
  // reproduces the right-hand side.
  double lambda = ridge;
  while (true) {
    const Eigen::MatrixXd system =
        kernel + lambda * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd alpha = system.ldlt().solve(centered);
    const double residual = (system * alpha - centered).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, centered.cwiseAbs().maxCoeff());
    if (residual <= 1e-8 * scale) {
      model.coefficients = alpha;
      model.ridge_used = lambda;
      return model;
    }
    if (lambda >= ridge_max) {
      throw NumericDomainError(
          "train_regressors: kernel system unsolvable even at ridge " +
          format_double(lambda));
    }
    lambda = std::min(lambda > 0.0 ? lambda * 10.0 : 1e-10, ridge_max);
  }
}

}  // namespace

Eigen::VectorXd RegressorGrid::predict(int chart, double feature) const {
  if (chart < 1 || chart > static_cast<int>(charts.size())) {
    throw ParameterDomainError("RegressorGrid: chart index out of range");
  }
  const ChartRegressor& model = charts[static_cast<std::size_t>(chart - 1)];
  Eigen::VectorXd k(model.support.size());
  for (Eigen::Index i = 0; i < model.support.size(); ++i) {
    const double d = feature - model.support[i];
    k[i] = std::exp(-gamma * d * d);
  }
  return model.target_means + model.coefficients.transpose() * k;
}

RegressorGrid train_regressors(const TrainingSet& training,
                               const TaskSpace& space, double gamma,
                               double ridge, double ridge_max) {
  space.validate();
  if (!(gamma > 0.0)) {
    throw ParameterDomainError("train_regressors: gamma > 0");
  }
  if (!(ridge >= 0.0) || !(ridge_max >= ridge)) {
    throw ParameterDomainError(
        "train_regressors: need 0 <= ridge <= ridge_max");
  }
  const int num_charts =
      *std::max_element(training.chart_labels.begin(),
                        training.chart_labels.end());
  training.validate(num_charts, 1);

  RegressorGrid grid;
  grid.gamma = gamma;
  grid.policy_dim = training.policies.front().dimension();
  for (int chart = 1; chart <= num_charts; ++chart) {
    std::vector<int> member;
    for (int i = 0; i < training.count(); ++i) {
      if (training.chart_labels[static_cast<std::size_t>(i)] == chart) {
        member.push_back(i);
      }
    }
    Eigen::VectorXd support(member.size());
    Eigen::MatrixXd targets(member.size(), grid.policy_dim);
    for (std::size_t r = 0; r < member.size(); ++r) {
      const int i = member[r];
      support[static_cast<Eigen::Index>(r)] =
          space.normalize(training.tasks[static_cast<std::size_t>(i)].angle);
      targets.row(static_cast<Eigen::Index>(r)) =
          training.policies[static_cast<std::size_t>(i)].flatten();
    }
    grid.charts.push_back(
        fit_chart(support, targets, gamma, ridge, ridge_max));
  }
  return grid;
}

void SkillModel::validate() const {
  task_space.validate();
  if (num_charts < 1) throw FormatError("SkillModel: num_charts >= 1");
  if (classifier.num_charts != num_charts ||
      classifier.weights.rows() != num_charts ||
      classifier.weights.cols() != 2) {
    throw FormatError("SkillModel: classifier inconsistent with num_charts");
  }
  if (static_cast<int>(grid.charts.size()) != num_charts) {
    throw FormatError("SkillModel: grid has " +
                      std::to_string(grid.charts.size()) +
                      " charts, expected " + std::to_string(num_charts));
  }
  if (!(grid.gamma > 0.0) || grid.policy_dim < 3) {
    throw FormatError("SkillModel: invalid kernel width or policy dim");
  }
  for (const ChartRegressor& chart : grid.charts) {
    if (chart.support.size() < 1 ||
        chart.coefficients.rows() != chart.support.size() ||
        chart.coefficients.cols() != grid.policy_dim ||
        chart.target_means.size() != grid.policy_dim) {
      throw FormatError("SkillModel: chart regressor shape mismatch");
    }
  }
}

SkillModel train_skill(const TrainingSet& training, const TaskSpace& space,
                       const SkillConfig& cfg) {
  space.validate();
  const int num_charts =
      training.chart_labels.empty()
          ? 0
          : *std::max_element(training.chart_labels.begin(),
                              training.chart_labels.end());
  if (num_charts < 1) {
    throw ParameterDomainError("train_skill: training set has no chart labels");
  }
  training.validate(num_charts, cfg.min_chart_size);

  std::vector<double> features;
  features.reserve(training.tasks.size());
  for (const Task& task : training.tasks) {
    features.push_back(space.normalize(task.angle));
  }

  SkillModel skill;
  skill.task_space = space;
  skill.num_charts = num_charts;
  skill.classifier =
      train_classifier(features, training.chart_labels, num_charts);
  skill.grid = train_regressors(training, space, cfg.gamma, cfg.ridge,
                                cfg.ridge_max);
  skill.metadata.training_size = training.count();
  skill.validate();
  return skill;
}

PolicyVector predict(const SkillModel& skill, const Task& task) {
  const double feature = skill.task_space.normalize(task.angle);
  const int chart = skill.classifier.predict(feature);
  Eigen::VectorXd flat = skill.grid.predict(chart, feature);
  flat[PolicyVector::kReleaseIndex] =
      std::clamp(flat[PolicyVector::kReleaseIndex], 0.0, 1.0);
  return PolicyVector::from_flat(flat);
}

namespace {

constexpr int kSkillFormatVersion = 1;
constexpr const char* kSkillFormatName = "dartskill-skill";

json vector_to_json(const Eigen::VectorXd& v) {
  json array = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) array.push_back(v[i]);
  return array;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    rows.push_back(vector_to_json(m.row(r)));
  }
  return rows;
}

const json& require(const json& object, const char* key,
                    const char* section) {
  const auto it = object.find(key);
  if (it == object.end()) {
    throw FormatError(std::string("skill file: missing '") + key + "' in " +
                      section);
  }
  return *it;
}

Eigen::VectorXd vector_from_json(const json& array, const char* section) {
  if (!array.is_array()) {
    throw FormatError(std::string("skill file: ") + section +
                      " must be an array");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(array.size()));
  Eigen::Index i = 0;
  for (const json& cell : array) {
    if (!cell.is_number()) {
      throw FormatError(std::string("skill file: non-numeric entry in ") +
                        section);
    }
    v[i++] = cell.get<double>();
  }
  return v;
}

Eigen::MatrixXd matrix_from_json(const json& rows, const char* section) {
  if (!rows.is_array() || rows.empty()) {
    throw FormatError(std::string("skill file: ") + section +
                      " must be a non-empty array of rows");
  }
  const Eigen::Index cols = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
  Eigen::Index r = 0;
  for (const json& row : rows) {
    const Eigen::VectorXd v = vector_from_json(row, section);
    if (v.size() != cols) {
      throw FormatError(std::string("skill file: ragged rows in ") + section);
    }
    m.row(r++) = v;
  }
  return m;
}

}  // namespace

void save_skill(const SkillModel& skill, const std::filesystem::path& path) {
  skill.validate();
  json j;
  j["format"] = kSkillFormatName;
  j["version"] = kSkillFormatVersion;
  j["task_space"] = {{"angle_min", skill.task_space.angle_min},
                     {"angle_max", skill.task_space.angle_max}};
  j["num_charts"] = skill.num_charts;
  j["policy_dim"] = skill.grid.policy_dim;
  j["gamma"] = skill.grid.gamma;
  j["classifier"] = {{"weights", matrix_to_json(skill.classifier.weights)},
                     {"training_accuracy", skill.classifier.training_accuracy}};
  json charts = json::array();
  for (const ChartRegressor& chart : skill.grid.charts) {
    charts.push_back({{"support", vector_to_json(chart.support)},
                      {"target_means", vector_to_json(chart.target_means)},
                      {"coefficients", matrix_to_json(chart.coefficients)},
                      {"ridge_used", chart.ridge_used}});
  }
  j["charts"] = std::move(charts);
  j["metadata"] = {{"training_size", skill.metadata.training_size},
                   {"config_hash", skill.metadata.config_hash}};
  write_text_file(path, j.dump(2) + "\n");
}

SkillModel load_skill(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& error) {
    throw FormatError(std::string("skill file: not valid JSON: ") +
                      error.what());
  }
  if (!j.is_object()) throw FormatError("skill file: top level not an object");
  if (require(j, "format", "top level") != kSkillFormatName) {
    throw FormatError("skill file: unknown format tag");
  }
  if (require(j, "version", "top level").get<int>() != kSkillFormatVersion) {
    throw FormatError("skill file: unsupported version " +
                      require(j, "version", "top level").dump());
  }

  SkillModel skill;
  const json& space = require(j, "task_space", "top level");
  skill.task_space.angle_min =
      require(space, "angle_min", "task_space").get<double>();
  skill.task_space.angle_max =
      require(space, "angle_max", "task_space").get<double>();
  skill.num_charts = require(j, "num_charts", "top level").get<int>();
  skill.grid.policy_dim = require(j, "policy_dim", "top level").get<int>();
  skill.grid.gamma = require(j, "gamma", "top level").get<double>();

  const json& clf = require(j, "classifier", "top level");
  skill.classifier.num_charts = skill.num_charts;
  skill.classifier.weights =
      matrix_from_json(require(clf, "weights", "classifier"), "classifier.weights");
  skill.classifier.training_accuracy =
      require(clf, "training_accuracy", "classifier").get<double>();

  const json& charts = require(j, "charts", "top level");
  if (!charts.is_array()) throw FormatError("skill file: charts not an array");
  for (const json& chart_json : charts) {
    ChartRegressor chart;
    chart.support =
        vector_from_json(require(chart_json, "support", "chart"), "chart.support");
    chart.target_means = vector_from_json(
        require(chart_json, "target_means", "chart"), "chart.target_means");
    chart.coefficients = matrix_from_json(
        require(chart_json, "coefficients", "chart"), "chart.coefficients");
    chart.ridge_used = require(chart_json, "ridge_used", "chart").get<double>();
    skill.grid.charts.push_back(std::move(chart));
  }

  const json& meta = require(j, "metadata", "top level");
  skill.metadata.training_size =
      require(meta, "training_size", "metadata").get<int>();
  skill.metadata.config_hash =
      require(meta, "config_hash", "metadata").get<std::string>();

  skill.validate();
  return skill;
}

}  // namespace dartskill
