// Command line front end for the dart-throwing skill toolkit.
//
// One binary, eight subcommands covering the full workflow: sample tasks,
// learn single policies, analyze the policy manifold, train and query a
// parameterized skill, and run the end-to-end experiment.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dartskill/arm_sim.hpp"
#include "dartskill/errors.hpp"
#include "dartskill/manifold.hpp"
#include "dartskill/pipeline.hpp"
#include "dartskill/power.hpp"
#include "dartskill/random.hpp"
#include "dartskill/skill.hpp"
#include "dartskill/text_io.hpp"

namespace {

using namespace dartskill;

ExperimentConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return ExperimentConfig::defaults();
  return load_config(path);
}

// Reads a training_policies.csv-style table: an `angle` column plus one
// column per policy dimension (release_phase, goal, weight_1...).
struct PolicyTable {
  std::vector<double> angles;
  std::vector<PolicyVector> policies;
};

PolicyTable read_policy_table(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  PolicyTable out;
  const std::size_t angle_col = table.column("angle");
  const std::size_t release_col = table.column("release_phase");
  const std::size_t goal_col = table.column("goal");
  std::vector<std::size_t> weight_cols;
  for (int wi = 1;; ++wi) {
    const std::string name = "weight_" + std::to_string(wi);
    bool found = false;
    for (const std::string& h : table.header) {
      if (h == name) {
        found = true;
        break;
      }
    }
    if (!found) break;
    weight_cols.push_back(table.column(name));
  }
  if (weight_cols.empty()) {
    throw FormatError(path.string() + ": no weight_1.. columns found");
  }
  for (const std::vector<std::string>& row : table.rows) {
    out.angles.push_back(parse_double(row[angle_col]));
    PolicyVector p;
    p.release_phase = parse_double(row[release_col]);
    p.goal = parse_double(row[goal_col]);
    p.weights.resize(static_cast<Eigen::Index>(weight_cols.size()));
    for (std::size_t w = 0; w < weight_cols.size(); ++w) {
      p.weights[static_cast<Eigen::Index>(w)] = parse_double(row[weight_cols[w]]);
    }
    out.policies.push_back(std::move(p));
  }
  return out;
}

void write_task_csv(const std::filesystem::path& path,
                    const std::vector<Task>& tasks) {
  CsvWriter writer({"task_index", "angle", "target_x", "target_y"}, {});
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    writer.add_row({std::to_string(i), format_double(tasks[i].angle),
                    format_double(tasks[i].surface_point.x()),
                    format_double(tasks[i].surface_point.y())});
  }
  writer.save(path);
}

int cmd_sample_tasks(const std::string& config_path, int count,
                     std::uint64_t seed, const std::string& output) {
  ExperimentConfig cfg = load_config_or_default(config_path);
  TaskDistribution dist = cfg.tasks;
  dist.seed = seed;
  const std::vector<Task> tasks = sample_tasks(dist, count, cfg.arm);
  write_task_csv(output, tasks);
  std::cout << "wrote " << tasks.size() << " tasks to " << output << "\n";
  return 0;
}

int cmd_learn_policy(const std::string& config_path, double angle,
                     std::uint64_t seed, const std::string& init_path,
                     const std::string& output, const std::string& log_path) {
  ExperimentConfig cfg = load_config_or_default(config_path);
  const Task task = task_from_angle(angle, cfg.arm);
  PolicyVector init = cfg.init_policy;
  if (!init_path.empty()) init = load_policy(init_path);

  RunLog log;
  ProgressFn progress = [&log, &task](const UpdateProgress& p) {
    log.learn_event("learn", 0, task.angle, p);
  };
  const LearnResult result = learn_policy(task, init, cfg.exploration,
                                          cfg.sim_context(), seed, progress);
  log.task_summary("learn", 0, task.angle, result);
  save_policy(result.final_theta, output);
  if (!log_path.empty()) log.save(log_path, config_hash(cfg));

  std::cout << "angle=" << format_double(task.angle)
            << " converged=" << (result.converged ? 1 : 0)
            << " updates=" << result.updates_used
            << " rollouts=" << result.rollouts_used
            << " best_distance=" << format_double(result.best_distance)
            << "\n";
  return result.converged ? 0 : 1;
}

int cmd_analyze_manifold(const std::string& config_path,
                         const std::string& input,
                         const std::string& output_dir) {
  ExperimentConfig cfg = load_config_or_default(config_path);
  const PolicyTable table = read_policy_table(input);
  const ChartAnalysis analysis =
      analyze_charts(table.policies, policy_feature_scales(cfg.exploration),
                     cfg.chart_detect, cfg.embedding_dim_max);

  const std::filesystem::path out(output_dir);
  std::filesystem::create_directories(out);
  {
    CsvWriter writer({"point_index", "angle", "chart"}, {});
    for (std::size_t i = 0; i < table.policies.size(); ++i) {
      writer.add_row({std::to_string(i), format_double(table.angles[i]),
                      std::to_string(analysis.assignment.chart_of[i])});
    }
    writer.save(out / "charts.csv");
  }
  {
    CsvWriter writer({"chart", "dimension", "residual_variance"}, {});
    for (std::size_t c = 0; c < analysis.residual_curves.size(); ++c) {
      const std::vector<double>& curve = analysis.residual_curves[c];
      for (std::size_t d = 0; d < curve.size(); ++d) {
        writer.add_row({std::to_string(c + 1), std::to_string(d + 1),
                        format_double(curve[d])});
      }
    }
    writer.save(out / "residuals.csv");
  }
  {
    CsvWriter writer({"chart", "size", "estimated_dimension"}, {});
    for (std::size_t c = 0; c < analysis.dimension_estimates.size(); ++c) {
      writer.add_row(
          {std::to_string(c + 1),
           std::to_string(analysis.assignment.chart_sizes[c]),
           std::to_string(analysis.dimension_estimates[c])});
    }
    writer.save(out / "dimensions.csv");
  }

  std::cout << "charts=" << analysis.assignment.num_charts
            << " k_used=" << analysis.assignment.k_used << " dims=[";
  for (std::size_t c = 0; c < analysis.dimension_estimates.size(); ++c) {
    std::cout << (c ? "," : "") << analysis.dimension_estimates[c];
  }
  std::cout << "]\n";
  return 0;
}

int cmd_train_skill(const std::string& config_path, const std::string& input,
                    const std::string& output) {
  ExperimentConfig cfg = load_config_or_default(config_path);
  const PolicyTable table = read_policy_table(input);

  TrainingSet set;
  if (table.policies.empty()) {
    throw ParameterDomainError("train-skill: empty training table");
  }
  for (std::size_t i = 0; i < table.policies.size(); ++i) {
    set.tasks.push_back(task_from_angle(table.angles[i], cfg.arm));
    set.policies.push_back(table.policies[i]);
  }
  // Chart labels come from the same whitened-metric detection the
  // experiment pipeline uses.
  const ChartAnalysis analysis =
      analyze_charts(set.policies, policy_feature_scales(cfg.exploration),
                     cfg.chart_detect, cfg.embedding_dim_max);
  set.chart_labels = analysis.assignment.chart_of;

  const TaskSpace space{cfg.tasks.angle_min, cfg.tasks.angle_max};
  const SkillModel model = train_skill(set, space, cfg.skill);
  save_skill(model, output);
  std::cout << "examples=" << table.policies.size()
            << " charts=" << model.num_charts << " classifier_accuracy="
            << format_double(model.classifier.training_accuracy) << "\n";
  return 0;
}

int cmd_predict(const std::string& skill_path, double angle,
                const std::string& config_path, const std::string& output) {
  ExperimentConfig cfg = load_config_or_default(config_path);
  const SkillModel model = load_skill(skill_path);
  const Task task = task_from_angle(angle, cfg.arm);
  const PolicyVector policy = predict(model, task);
  if (!output.empty()) save_policy(policy, output);
  std::cout << "angle=" << format_double(angle)
            << " chart=" << model.classifier.predict(model.task_space.normalize(angle))
            << " release_phase=" << format_double(policy.release_phase)
            << " goal=" << format_double(policy.goal) << "\n";
  return 0;
}

int cmd_evaluate(const std::string& skill_path, const std::string& config_path,
                 const std::vector<double>& angles,
                 const std::string& tasks_csv, const std::string& output) {
  ExperimentConfig cfg = load_config_or_default(config_path);
  const SkillModel model = load_skill(skill_path);

  std::vector<Task> tasks;
  for (double a : angles) tasks.push_back(task_from_angle(a, cfg.arm));
  if (!tasks_csv.empty()) {
    const CsvTable table = read_csv(tasks_csv);
    const std::size_t angle_col = table.column("angle");
    for (const std::vector<std::string>& row : table.rows) {
      tasks.push_back(task_from_angle(parse_double(row[angle_col]), cfg.arm));
    }
  }
  if (tasks.empty()) {
    throw ParameterDomainError("evaluate: no tasks given (use --angle/--tasks)");
  }

  CsvWriter writer({"angle", "released", "zero_shot_distance"}, {});
  const SimContext ctx = cfg.sim_context();
  double sum = 0.0;
  for (const Task& task : tasks) {
    const PolicyVector policy = predict(model, task);
    const ThrowOutcome outcome = simulate_throw(policy, task, ctx);
    writer.add_row({format_double(task.angle), outcome.released ? "1" : "0",
                    format_double(outcome.distance_to_target)});
    sum += outcome.distance_to_target;
    std::cout << "angle=" << format_double(task.angle) << " distance="
              << format_double(outcome.distance_to_target) << "\n";
  }
  if (!output.empty()) writer.save(output);
  std::cout << "mean_distance="
            << format_double(sum / static_cast<double>(tasks.size())) << "\n";
  return 0;
}

int cmd_run_experiment(const std::string& config_path,
                       const std::string& output_dir,
                       std::optional<std::uint64_t> seed,
                       const std::string& dump_config) {
  ExperimentConfig cfg = load_config_or_default(config_path);
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  if (seed) cfg.master_seed = *seed;
  if (!dump_config.empty()) {
    cfg.validate();
    save_config(cfg, dump_config);
    std::cout << "wrote config (hash " << config_hash(cfg) << ") to "
              << dump_config << "\n";
    return 0;
  }

  const ExperimentReport report = run_experiment(cfg, [](const std::string& s) {
    std::cout << "[stage] " << s << "\n" << std::flush;
  });

  std::cout << "hash=" << report.hash << "\n"
            << "training_examples=" << report.training.size() << "\n"
            << "charts=" << report.charts.assignment.num_charts << "\n"
            << "classifier_accuracy="
            << format_double(report.classifier_accuracy) << "\n";
  for (const SweepSummary& s : report.sweep) {
    std::cout << "sweep k=" << s.k << " charts=" << s.num_charts
              << " param_error=" << format_double(s.mean_param_error)
              << " zero_shot=" << format_double(s.mean_zero_shot_distance)
              << " fine_tune_updates="
              << format_double(s.mean_fine_tune_updates) << "\n";
  }
  std::cout << "total_rollouts=" << report.total_rollouts << "\n"
            << "runtime_seconds=" << format_double(report.total_runtime_seconds)
            << "\n"
            << "outputs=" << cfg.output_dir << "\n";
  return 0;
}

int cmd_emit_figures(const std::string& report_path,
                     const std::string& output_dir) {
  const ExperimentReport report = load_report(report_path);
  std::filesystem::path out(output_dir);
  if (output_dir.empty()) {
    out = std::filesystem::path(report_path).parent_path();
  }
  emit_figures(report, out);
  std::cout << "figures written to " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parameterized dart-throwing skill toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string input;
  std::string output;
  std::string output_dir;
  std::string log_path;
  std::string init_path;
  std::string skill_path;
  std::string tasks_csv;
  std::string report_path;
  std::string dump_config;
  std::vector<double> angles;
  double angle = 1.5;
  int count = 10;
  std::uint64_t seed = 0;
  bool seed_given = false;

  CLI::App* sample = app.add_subcommand("sample-tasks", "Draw task angles");
  sample->add_option("--config,-c", config_path, "Experiment config JSON");
  sample->add_option("--count,-n", count, "Number of tasks")->required();
  sample->add_option("--seed,-s", seed, "Sampler seed");
  sample->add_option("--output,-o", output, "Output CSV")->required();

  CLI::App* learn = app.add_subcommand("learn-policy",
                                       "Learn one task's throw policy");
  learn->add_option("--config,-c", config_path, "Experiment config JSON");
  learn->add_option("--angle,-a", angle, "Target bearing (rad)")->required();
  learn->add_option("--seed,-s", seed, "Learner seed");
  learn->add_option("--init", init_path, "Warm-start policy JSON");
  learn->add_option("--output,-o", output, "Learned policy JSON")->required();
  learn->add_option("--log", log_path, "Progress log CSV");

  CLI::App* analyze = app.add_subcommand(
      "analyze-manifold", "Chart detection and dimensionality analysis");
  analyze->add_option("--config,-c", config_path, "Experiment config JSON");
  analyze->add_option("--input,-i", input, "Policy table CSV")->required();
  analyze->add_option("--output-dir,-o", output_dir, "Analysis output dir")
      ->required();

  CLI::App* train = app.add_subcommand("train-skill",
                                       "Fit the task-to-policy mapping");
  train->add_option("--config,-c", config_path, "Experiment config JSON");
  train->add_option("--input,-i", input, "Policy table CSV")->required();
  train->add_option("--output,-o", output, "Skill JSON")->required();

  CLI::App* pred = app.add_subcommand("predict",
                                      "Predict a policy for a new task");
  pred->add_option("--skill", skill_path, "Skill JSON")->required();
  pred->add_option("--angle,-a", angle, "Target bearing (rad)")->required();
  pred->add_option("--config,-c", config_path, "Experiment config JSON");
  pred->add_option("--output,-o", output, "Predicted policy JSON");

  CLI::App* eval = app.add_subcommand("evaluate",
                                      "Zero-shot throws from a skill");
  eval->add_option("--skill", skill_path, "Skill JSON")->required();
  eval->add_option("--config,-c", config_path, "Experiment config JSON");
  eval->add_option("--angle,-a", angles, "Target bearing (repeatable)");
  eval->add_option("--tasks", tasks_csv, "Task CSV (sample-tasks output)");
  eval->add_option("--output,-o", output, "Per-task result CSV");

  CLI::App* run = app.add_subcommand("run-experiment",
                                     "Full training/evaluation protocol");
  run->add_option("--config,-c", config_path, "Experiment config JSON");
  run->add_option("--output-dir,-o", output_dir, "Override output dir");
  run->add_option("--seed,-s", seed, "Override master seed")
      ->each([&seed_given](const std::string&) { seed_given = true; });
  run->add_option("--dump-config", dump_config,
                  "Write the resolved config JSON and exit");

  CLI::App* figures = app.add_subcommand("emit-figures",
                                         "Regenerate figures from a report");
  figures->add_option("--report,-r", report_path, "report.json path")
      ->required();
  figures->add_option("--output-dir,-o", output_dir, "Figure output dir");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sample->parsed()) {
      return cmd_sample_tasks(config_path, count, seed, output);
    }
    if (learn->parsed()) {
      return cmd_learn_policy(config_path, angle, seed, init_path, output,
                              log_path);
    }
    if (analyze->parsed()) {
      return cmd_analyze_manifold(config_path, input, output_dir);
    }
    if (train->parsed()) {
      return cmd_train_skill(config_path, input, output);
    }
    if (pred->parsed()) {
      return cmd_predict(skill_path, angle, config_path, output);
    }
    if (eval->parsed()) {
      return cmd_evaluate(skill_path, config_path, angles, tasks_csv, output);
    }
    if (run->parsed()) {
      return cmd_run_experiment(
          config_path, output_dir,
          seed_given ? std::optional<std::uint64_t>(seed) : std::nullopt,
          dump_config);
    }
    if (figures->parsed()) {
      return cmd_emit_figures(report_path, output_dir);
    }
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
  return 0;
}
