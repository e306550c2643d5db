#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dartskill/errors.hpp"
#include "dartskill/pipeline.hpp"
#include "dartskill/random.hpp"

using namespace dartskill;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

// Data lines of a CSV, skipping the provenance comment and the header.
std::vector<std::string> csv_data_lines(const fs::path& path) {
  std::istringstream in(slurp(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    lines.push_back(line);
  }
  REQUIRE(!lines.empty());  // at least the header
  lines.erase(lines.begin());
  return lines;
}

PolicyVector make_policy(double release, double goal, double w0) {
  PolicyVector p;
  p.release_phase = release;
  p.goal = goal;
  p.weights = Eigen::VectorXd::Zero(35);
  p.weights[0] = w0;
  return p;
}

// A report with every field populated, for serialization tests.
ExperimentReport synthetic_report() {
  ExperimentReport report;
  report.hash = "0123456789abcdef";
  for (int i = 0; i < 2; ++i) {
    TaskLearnRecord r;
    r.task_index = i;
    r.angle = 0.4 + 0.3 * i;
    r.chart = i + 1;
    r.updates_used = 3 + i;
    r.rollouts_used = 60 + 20 * i;
    r.best_distance = 0.01 * (i + 1);
    r.converged = true;
    r.policy = make_policy(0.2 + 0.1 * i, -4.0 + i, 1.5 - i);
    report.training.push_back(std::move(r));
  }
  report.charts.assignment.num_charts = 2;
  report.charts.assignment.chart_of = {1, 2};
  report.charts.assignment.chart_sizes = {1, 1};
  report.charts.assignment.single_chart_fallback = false;
  report.charts.assignment.k_used = 3;
  report.charts.residual_curves = {{0.5, 0.05}, {0.4, 0.03}};
  report.charts.dimension_estimates = {2, 2};
  Eigen::MatrixXd emb(1, 2);
  emb << 0.25, -0.75;
  report.charts.embeddings = {emb, emb};
  report.charts.members = {{0}, {1}};
  report.boundary_angle = 1.55;
  report.classifier_accuracy = 1.0;
  report.eval_angles = {0.9, 2.1};
  report.reference_updates = {4, 9};
  report.cold_start_updates = {4, 69};
  report.cold_start_converged = {true, true};
  for (int k : {2, 3}) {
    for (int e = 0; e < 2; ++e) {
      EvalRecord rec;
      rec.sweep_k = k;
      rec.eval_index = e;
      rec.angle = report.eval_angles[static_cast<std::size_t>(e)];
      rec.param_error = 0.25 / k;
      rec.param_rmse = 0.5 / k;
      rec.zero_shot_distance = 1.0 / k;
      rec.fine_tune_updates = 10 - k;
      rec.fine_tune_converged = true;
      report.evals.push_back(rec);
    }
    SweepSummary s;
    s.k = k;
    s.num_charts = 2;
    s.classifier_accuracy = 1.0;
    s.mean_param_error = 0.25 / k;
    s.mean_zero_shot_distance = 1.0 / k;
    s.mean_fine_tune_updates = 10.0 - k;
    report.sweep.push_back(s);
  }
  report.total_rollouts = 1234;
  return report;
}

}  // namespace

TEST_CASE("sample_tasks: degenerate interval pins every angle") {
  ArmConfig arm;
  TaskDistribution dist;
  dist.angle_min = 1.3;
  dist.angle_max = 1.3;
  dist.seed = 99;
  const std::vector<Task> tasks = sample_tasks(dist, 3, arm);
  REQUIRE(tasks.size() == 3);
  const Task direct = task_from_angle(1.3, arm);
  for (const Task& t : tasks) {
    CHECK(t.angle == doctest::Approx(1.3).epsilon(1e-15));
    CHECK(t.target.x() == doctest::Approx(direct.target.x()).epsilon(1e-15));
    CHECK(t.target.y() == doctest::Approx(direct.target.y()).epsilon(1e-15));
  }
}

TEST_CASE("sample_tasks: samples stay inside the interval") {
  ArmConfig arm;
  TaskDistribution dist;
  dist.angle_min = 0.3;
  dist.angle_max = 2.8;
  dist.seed = 7;
  for (const Task& t : sample_tasks(dist, 200, arm)) {
    CHECK(t.angle >= 0.3);
    CHECK(t.angle <= 2.8);
  }
}

TEST_CASE("sample_tasks: uniform law of large numbers") {
  ArmConfig arm;
  TaskDistribution dist;
  dist.angle_min = 0.0;
  dist.angle_max = 1.0;
  dist.seed = 12345;
  const std::vector<Task> tasks = sample_tasks(dist, 10000, arm);
  double sum = 0.0, lo = 1.0, hi = 0.0;
  for (const Task& t : tasks) {
    sum += t.angle;
    lo = std::min(lo, t.angle);
    hi = std::max(hi, t.angle);
  }
  CHECK(sum / 10000.0 == doctest::Approx(0.5).epsilon(0.04));
  CHECK(lo < 0.1);   // the tails get visited
  CHECK(hi > 0.9);
}

TEST_CASE("sample_tasks: seed determines the sequence") {
  ArmConfig arm;
  TaskDistribution dist;
  dist.seed = 42;
  const std::vector<Task> a = sample_tasks(dist, 50, arm);
  const std::vector<Task> b = sample_tasks(dist, 50, arm);
  dist.seed = 43;
  const std::vector<Task> c = sample_tasks(dist, 50, arm);
  bool all_equal = true;
  bool any_differs = false;
  for (std::size_t i = 0; i < 50; ++i) {
    all_equal = all_equal && a[i].angle == b[i].angle;
    any_differs = any_differs || a[i].angle != c[i].angle;
  }
  CHECK(all_equal);
  CHECK(any_differs);
}

TEST_CASE("sample_tasks: invalid requests throw") {
  ArmConfig arm;
  TaskDistribution dist;
  CHECK_THROWS_AS(sample_tasks(dist, 0, arm), ParameterDomainError);
  dist.angle_min = 2.0;
  dist.angle_max = 1.0;
  CHECK_THROWS_AS(sample_tasks(dist, 5, arm), ParameterDomainError);
}

TEST_CASE("config: defaults validate and round-trip through JSON") {
  ExperimentConfig cfg = ExperimentConfig::defaults();
  CHECK_NOTHROW(cfg.validate());

  cfg.master_seed = 77;
  cfg.warm_start = false;
  cfg.sweep = {4, 9};
  cfg.gains.kd = 9.5;
  cfg.skill.gamma = 4.0;
  cfg.output_dir = "some/dir";
  const std::string text = config_to_json(cfg);
  const ExperimentConfig back = config_from_json(text);
  CHECK(config_to_json(back) == text);
  CHECK(config_hash(back) == config_hash(cfg));
  CHECK(back.master_seed == 77);
  CHECK(back.warm_start == false);
  CHECK(back.sweep == std::vector<int>{4, 9});
  CHECK(back.gains.kd == doctest::Approx(9.5).epsilon(1e-15));
  CHECK(back.output_dir == "some/dir");
}

TEST_CASE("config: hash ignores output_dir but tracks semantics") {
  ExperimentConfig a = ExperimentConfig::defaults();
  ExperimentConfig b = a;
  b.output_dir = "elsewhere";
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_to_json(a) != config_to_json(b));  // snapshot keeps the dir

  ExperimentConfig c = a;
  c.master_seed += 1;
  CHECK(config_hash(c) != config_hash(a));
  ExperimentConfig d = a;
  d.exploration.success_threshold = 0.07;
  CHECK(config_hash(d) != config_hash(a));
}

TEST_CASE("config: file round-trip preserves the hash") {
  const fs::path dir = fresh_dir("dartskill_cfg_rt");
  ExperimentConfig cfg = ExperimentConfig::defaults();
  cfg.master_seed = 31;
  save_config(cfg, dir / "config.json");
  const ExperimentConfig back = load_config(dir / "config.json");
  CHECK(config_hash(back) == config_hash(cfg));
}

TEST_CASE("config: malformed input is rejected") {
  CHECK_THROWS_AS(config_from_json("not json at all"), FormatError);
  CHECK_THROWS_AS(config_from_json("[1, 2, 3]\n"), FormatError);
  // A well-formed document with a badly typed field.
  ExperimentConfig cfg = ExperimentConfig::defaults();
  std::string text = config_to_json(cfg);
  const std::string needle = "\"master_seed\": 1";
  const auto at = text.find(needle);
  REQUIRE(at != std::string::npos);
  text.replace(at, needle.size(), "\"master_seed\": \"seven\"");
  CHECK_THROWS_AS(config_from_json(text), FormatError);
}

TEST_CASE("config: validate rejects bad sweeps") {
  ExperimentConfig cfg = ExperimentConfig::defaults();
  cfg.sweep.clear();
  CHECK_THROWS_AS(cfg.validate(), ParameterDomainError);
  cfg = ExperimentConfig::defaults();
  cfg.sweep = {cfg.num_training_tasks + 1};
  CHECK_THROWS_AS(cfg.validate(), ParameterDomainError);
  cfg = ExperimentConfig::defaults();
  cfg.num_training_tasks = 0;
  CHECK_THROWS_AS(cfg.validate(), ParameterDomainError);
}

TEST_CASE("policy file: round-trip is bit-exact and rejects damage") {
  const fs::path dir = fresh_dir("dartskill_policy_rt");
  const PolicyVector p = make_policy(0.37, -2.25, 4.125);
  save_policy(p, dir / "policy.json");
  const PolicyVector back = load_policy(dir / "policy.json");
  CHECK(back.flatten() == p.flatten());

  const std::string text = slurp(dir / "policy.json");
  std::ofstream(dir / "cut.json", std::ios::binary)
      << text.substr(0, text.size() / 2);
  CHECK_THROWS_AS(load_policy(dir / "cut.json"), FormatError);

  std::string wrong = text;
  const auto at = wrong.find("dartskill-policy");
  REQUIRE(at != std::string::npos);
  wrong.replace(at, 16, "dartskill-nonsns");
  std::ofstream(dir / "wrong.json", std::ios::binary) << wrong;
  CHECK_THROWS_AS(load_policy(dir / "wrong.json"), FormatError);
}

TEST_CASE("report file: full round-trip, including the NaN boundary") {
  const fs::path dir = fresh_dir("dartskill_report_rt");
  ExperimentReport report = synthetic_report();
  save_report(report, dir / "report.json");
  const ExperimentReport back = load_report(dir / "report.json");

  CHECK(back.hash == report.hash);
  REQUIRE(back.training.size() == 2);
  CHECK(back.training[1].policy.flatten() ==
        report.training[1].policy.flatten());
  CHECK(back.training[1].rollouts_used == 80);
  CHECK(back.charts.assignment.num_charts == 2);
  CHECK(back.charts.members == report.charts.members);
  CHECK(back.charts.embeddings[0] == report.charts.embeddings[0]);
  CHECK(back.boundary_angle == doctest::Approx(1.55).epsilon(1e-15));
  CHECK(back.eval_angles == report.eval_angles);
  CHECK(back.reference_updates == report.reference_updates);
  CHECK(back.cold_start_updates == report.cold_start_updates);
  CHECK(back.cold_start_converged == report.cold_start_converged);
  REQUIRE(back.evals.size() == 4);
  CHECK(back.evals[3].fine_tune_updates == 7);
  REQUIRE(back.sweep.size() == 2);
  CHECK(back.sweep[1].mean_zero_shot_distance ==
        doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(back.total_rollouts == 1234);

  // Serialization is deterministic: saving the loaded report reproduces
  // the file byte for byte.
  save_report(back, dir / "again.json");
  CHECK(slurp(dir / "again.json") == slurp(dir / "report.json"));

  // A boundary that was never defined survives as NaN.
  report.boundary_angle = std::nan("");
  save_report(report, dir / "nan.json");
  CHECK(std::isnan(load_report(dir / "nan.json").boundary_angle));

  std::ofstream(dir / "cut.json", std::ios::binary)
      << slurp(dir / "report.json").substr(0, 100);
  CHECK_THROWS_AS(load_report(dir / "cut.json"), FormatError);
}

TEST_CASE("mirrored_policy: negates the swing, keeps the release") {
  const PolicyVector p = make_policy(0.31, -3.5, 2.25);
  const PolicyVector m = mirrored_policy(p);
  CHECK(m.release_phase == p.release_phase);
  CHECK(m.goal == -p.goal);
  CHECK(m.weights == (-p.weights).eval());
  const PolicyVector mm = mirrored_policy(m);
  CHECK(mm.flatten() == p.flatten());
}

TEST_CASE("policy_feature_scales: exploration standard deviations") {
  const ExplorationConfig expl = ExplorationConfig::defaults();
  const Eigen::VectorXd scales = policy_feature_scales(expl);
  REQUIRE(scales.size() == expl.exploration_variance.size());
  for (Eigen::Index i = 0; i < scales.size(); ++i) {
    CHECK(scales[i] ==
          doctest::Approx(std::sqrt(expl.exploration_variance[i]))
              .epsilon(1e-12));
  }

  ExplorationConfig zeroed = expl;
  zeroed.exploration_variance[0] = 0.0;
  CHECK(policy_feature_scales(zeroed)[0] == doctest::Approx(1e-12));
}

TEST_CASE("analyze_charts: two synthetic families, one parameter each") {
  // Two smooth one-parameter families of policies, far apart in the
  // whitened feature space.
  std::vector<PolicyVector> policies;
  const int per_family = 12;
  for (int i = 0; i < per_family; ++i) {
    const double t = static_cast<double>(i) / (per_family - 1);
    PolicyVector p;
    p.release_phase = 0.2 + 0.05 * t;
    p.goal = -4.0 - 1.0 * t;
    p.weights = Eigen::VectorXd::Zero(35);
    for (int w = 0; w < 35; ++w) {
      p.weights[w] = 3.0 * std::cos(0.5 * t + 0.2 * w);
    }
    policies.push_back(p);
  }
  for (int i = 0; i < per_family; ++i) {
    const double t = static_cast<double>(i) / (per_family - 1);
    PolicyVector p;
    p.release_phase = 0.6 + 0.05 * t;
    p.goal = 4.0 + 1.0 * t;
    p.weights = Eigen::VectorXd::Zero(35);
    for (int w = 0; w < 35; ++w) {
      p.weights[w] = -3.0 * std::sin(0.4 * t + 0.3 * w);
    }
    policies.push_back(p);
  }

  const Eigen::VectorXd scales =
      policy_feature_scales(ExplorationConfig::defaults());
  ChartDetectConfig detect;
  const ChartAnalysis analysis = analyze_charts(policies, scales, detect, 5);

  REQUIRE(analysis.assignment.num_charts == 2);
  CHECK_FALSE(analysis.assignment.single_chart_fallback);
  REQUIRE(analysis.members.size() == 2);
  REQUIRE(analysis.embeddings.size() == 2);
  REQUIRE(analysis.residual_curves.size() == 2);
  REQUIRE(analysis.dimension_estimates.size() == 2);

  // Membership partitions the input and never mixes the families.
  std::vector<int> seen(policies.size(), 0);
  for (std::size_t c = 0; c < 2; ++c) {
    for (int idx : analysis.members[c]) {
      REQUIRE(idx >= 0);
      REQUIRE(idx < static_cast<int>(policies.size()));
      seen[static_cast<std::size_t>(idx)] += 1;
    }
    CHECK(analysis.embeddings[c].rows() ==
          static_cast<Eigen::Index>(analysis.members[c].size()));
  }
  for (int count : seen) CHECK(count == 1);
  for (int idx : analysis.members[0]) {
    CHECK((analysis.members[0].front() < per_family) ==
          (idx < per_family));
  }

  for (std::size_t c = 0; c < 2; ++c) {
    const std::vector<double>& curve = analysis.residual_curves[c];
    REQUIRE(!curve.empty());
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
      CHECK(curve[i + 1] <= curve[i] + 1e-9);
    }
    CHECK(curve.front() <= 1.0 + 1e-9);
    CHECK(curve.back() >= -1e-9);
    // A smooth one-parameter family embeds as a curve.
    CHECK(analysis.dimension_estimates[c] == 1);
  }
}

TEST_CASE("analyze_charts: rejects unusable input") {
  const Eigen::VectorXd scales =
      policy_feature_scales(ExplorationConfig::defaults());
  std::vector<PolicyVector> one = {make_policy(0.2, -4.0, 0.0)};
  ChartDetectConfig detect;
  CHECK_THROWS_AS(analyze_charts(one, scales, detect, 5),
                  ParameterDomainError);
  std::vector<PolicyVector> two = {make_policy(0.2, -4.0, 0.0),
                                   make_policy(0.3, -4.5, 1.0)};
  CHECK_THROWS_AS(analyze_charts(two, Eigen::VectorXd::Ones(3), detect, 5),
                  ParameterDomainError);
}

TEST_CASE("run log: typed rows land in the saved file") {
  RunLog log;
  UpdateProgress progress;
  progress.update_index = 2;
  progress.best_distance = 0.5;
  progress.mean_return = 0.25;
  progress.max_return = 0.75;
  progress.stalled_update = false;
  progress.variance_scale = 1.0;
  log.learn_event("train", 4, 1.25, progress);
  LearnResult result;
  result.updates_used = 6;
  result.rollouts_used = 120;
  result.best_distance = 0.01;
  result.converged = true;
  log.task_summary("train", 4, 1.25, result);
  log.note("train", "something happened");
  CHECK(log.rows() == 3);

  const fs::path dir = fresh_dir("dartskill_runlog");
  log.save(dir / "runlog.csv", "cafe");
  const std::vector<std::string> lines = csv_data_lines(dir / "runlog.csv");
  REQUIRE(lines.size() == 3);
  const std::vector<std::string> update_row = split_csv_line(lines[0]);
  CHECK(update_row[0] == "update");
  CHECK(update_row[2] == "4");
  const std::vector<std::string> task_row = split_csv_line(lines[1]);
  CHECK(task_row[0] == "task");
  CHECK(task_row[10] == "6");
  CHECK(task_row[11] == "120");
  CHECK(task_row[12] == "1");
  CHECK(split_csv_line(lines[2])[0] == "note");
  CHECK(slurp(dir / "runlog.csv").rfind("# config_hash=cafe", 0) == 0);
}

TEST_CASE("emit_figures: every figure, correct row counts") {
  const fs::path dir = fresh_dir("dartskill_figs");
  const ExperimentReport report = synthetic_report();
  emit_figures(report, dir);

  CHECK(csv_data_lines(dir / "fig2_policy_vs_task.csv").size() ==
        report.training.size());
  std::size_t member_total = 0;
  for (const auto& m : report.charts.members) member_total += m.size();
  CHECK(csv_data_lines(dir / "fig3_embedding.csv").size() == member_total);
  CHECK(csv_data_lines(dir / "fig5_param_error.csv").size() ==
        report.sweep.size());
  CHECK(csv_data_lines(dir / "fig6_zero_shot.csv").size() ==
        report.sweep.size());
  const std::vector<std::string> ft_lines =
      csv_data_lines(dir / "fig7_fine_tune.csv");
  REQUIRE(ft_lines.size() == report.sweep.size());
  // The from-scratch column carries the mean sequential cost.
  const std::vector<std::string> row = split_csv_line(ft_lines[0]);
  REQUIRE(row.size() == 3);
  CHECK(std::stod(row[2]) == doctest::Approx((4 + 69) / 2.0).epsilon(1e-12));

  for (const char* name :
       {"fig2_goal_vs_task.svg", "fig3_embedding.svg", "fig5_param_error.svg",
        "fig6_zero_shot.svg", "fig7_fine_tune.svg"}) {
    const std::string svg = slurp(dir / name);
    CHECK(svg.find("<svg") != std::string::npos);
  }
}

TEST_CASE("warm starts never cost more training updates than cold" *
          doctest::timeout(600)) {
  // Paired comparison on the same ten tasks, averaged over five seeds:
  // reusing the nearest solved neighbor must not be worse than relearning
  // each task from the template race alone.
  double warm_total = 0.0;
  double cold_total = 0.0;
  for (std::uint64_t seed = 31; seed <= 35; ++seed) {
    ExperimentConfig cfg = ExperimentConfig::defaults();
    cfg.master_seed = seed;
    TaskDistribution dist = cfg.tasks;
    dist.seed = derive_seed(seed, {17});
    const std::vector<Task> tasks = sample_tasks(dist, 10, cfg.arm);

    cfg.warm_start = true;
    const TrainingPool warm = build_training_set(tasks, cfg, nullptr);
    cfg.warm_start = false;
    const TrainingPool cold = build_training_set(tasks, cfg, nullptr);

    auto mean_updates = [](const TrainingPool& pool) {
      REQUIRE(!pool.records.empty());
      double sum = 0.0;
      for (const TaskLearnRecord& r : pool.records) sum += r.updates_used;
      return sum / static_cast<double>(pool.records.size());
    };
    warm_total += mean_updates(warm);
    cold_total += mean_updates(cold);
  }
  CHECK(warm_total <= cold_total + 1e-12);
}

TEST_CASE("run_experiment: a small end-to-end run is complete, conserved "
          "and reproducible" *
          doctest::timeout(600)) {
  const fs::path dir = fresh_dir("dartskill_tiny_run");
  ExperimentConfig cfg = ExperimentConfig::defaults();
  cfg.master_seed = 7;
  cfg.num_training_tasks = 6;
  cfg.num_eval_tasks = 2;
  cfg.sweep = {3, 6};
  cfg.output_dir = (dir / "run").string();

  std::vector<std::string> stages;
  const ExperimentReport report =
      run_experiment(cfg, [&](const std::string& s) { stages.push_back(s); });

  CHECK(report.hash == config_hash(cfg));
  CHECK(!report.training.empty());
  CHECK(report.training.size() <= 6);
  // The protocol's stages run in their fixed order.
  REQUIRE(!stages.empty());
  CHECK(stages.front() == "sample-tasks");
  CHECK(stages.back() == "write-outputs");
  REQUIRE(report.eval_angles.size() == 2);
  REQUIRE(report.reference_updates.size() == 2);
  REQUIRE(report.cold_start_updates.size() == 2);
  REQUIRE(report.cold_start_converged.size() == 2);
  // Sequential from-scratch cost bills failed attempts, so it can never
  // undercut the winner's own update count.
  for (std::size_t e = 0; e < 2; ++e) {
    CHECK(report.cold_start_updates[e] >= report.reference_updates[e]);
  }
  REQUIRE(report.sweep.size() == 2);
  CHECK(report.evals.size() == 2 * report.sweep.size());
  CHECK(report.total_rollouts > 0);
  CHECK(report.total_runtime_seconds > 0.0);

  const fs::path out = dir / "run";
  for (const char* name :
       {"config.json", "report.json", "runlog.csv", "training_policies.csv",
        "fig2_policy_vs_task.csv", "fig2_goal_vs_task.svg",
        "fig3_embedding.csv", "fig3_embedding.svg", "fig5_param_error.csv",
        "fig5_param_error.svg", "fig6_zero_shot.csv", "fig6_zero_shot.svg",
        "fig7_fine_tune.csv", "fig7_fine_tune.svg"}) {
    CHECK_MESSAGE(fs::exists(out / name), name);
  }

  // The config snapshot reproduces the run's hash.
  CHECK(config_hash(load_config(out / "config.json")) == report.hash);

  // The saved report is the in-memory one (runtime deliberately absent).
  const ExperimentReport loaded = load_report(out / "report.json");
  CHECK(loaded.hash == report.hash);
  CHECK(loaded.total_rollouts == report.total_rollouts);
  CHECK(loaded.evals.size() == report.evals.size());
  CHECK(loaded.total_runtime_seconds == 0.0);

  // Rollout conservation: every simulated rollout is accounted for by
  // exactly one task summary row in the run log.
  long long logged = 0;
  for (const std::string& line : csv_data_lines(out / "runlog.csv")) {
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells[0] == "task") logged += std::stoll(cells[11]);
  }
  CHECK(logged == report.total_rollouts);

  // Training CSV: one row per converged task.
  CHECK(csv_data_lines(out / "training_policies.csv").size() ==
        report.training.size());

  // Rerunning the identical config reproduces every output byte.
  const std::string report_bytes = slurp(out / "report.json");
  const std::string runlog_bytes = slurp(out / "runlog.csv");
  const std::string training_bytes = slurp(out / "training_policies.csv");
  const std::string fig7_bytes = slurp(out / "fig7_fine_tune.csv");
  const ExperimentReport again = run_experiment(cfg);
  CHECK(again.total_rollouts == report.total_rollouts);
  CHECK(slurp(out / "report.json") == report_bytes);
  CHECK(slurp(out / "runlog.csv") == runlog_bytes);
  CHECK(slurp(out / "training_policies.csv") == training_bytes);
  CHECK(slurp(out / "fig7_fine_tune.csv") == fig7_bytes);

  // A report from a different configuration refuses to be overwritten.
  std::string forged = report_bytes;
  const auto at = forged.find(report.hash);
  REQUIRE(at != std::string::npos);
  forged.replace(at, report.hash.size(), "ffffffffffffffff");
  std::ofstream(out / "report.json", std::ios::binary) << forged;
  CHECK_THROWS_AS(run_experiment(cfg), IoError);
}
