#include "dartskill/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "json.hpp"

#include "dartskill/errors.hpp"
#include "dartskill/figures.hpp"
#include "dartskill/random.hpp"
#include "dartskill/text_io.hpp"

namespace dartskill {

using nlohmann::json;

namespace {

// Fan-out indices for derive_seed so no two stages share a random stream.
constexpr std::uint64_t kSeedTrainingTasks = 0;
constexpr std::uint64_t kSeedEvalTasks = 1;
constexpr std::uint64_t kSeedLearn = 2;
constexpr std::uint64_t kSeedReference = 3;
constexpr std::uint64_t kSeedFineTune = 4;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::vector<Task> sample_tasks(const TaskDistribution& dist, int n,
                               const ArmConfig& cfg) {
  if (n < 1) throw ParameterDomainError("sample_tasks: n >= 1");
  if (!(dist.angle_min <= dist.angle_max)) {
    throw ParameterDomainError("sample_tasks: angle_min <= angle_max");
  }
  Rng rng(dist.seed);
  std::vector<Task> tasks;
  tasks.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double angle = rng.uniform(dist.angle_min, dist.angle_max);
    tasks.push_back(task_from_angle(angle, cfg));
  }
  return tasks;
}

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig cfg;
  // Template swing: commit to one energetic stroke so reward can shape it.
  // Targets on the other side of vertical are reached by the mirrored
  // template (see mirrored_policy), not by this one.
  cfg.init_policy.release_phase = 0.2;
  cfg.init_policy.goal = -4.0;
  cfg.init_policy.weights = Eigen::VectorXd::Zero(cfg.dmp.num_bases());
  return cfg;
}

void ExperimentConfig::validate() const {
  arm.validate();
  dmp.validate();
  exploration.validate(PolicyVector::kWeightOffset + dmp.num_bases());
  if (init_policy.weights.size() == 0) {
    throw ParameterDomainError("ExperimentConfig: init_policy has no weights");
  }
  init_policy.validate(dmp);
  if (!(tasks.angle_min < tasks.angle_max) || tasks.angle_min < 0.0 ||
      tasks.angle_max > 3.1415926535897932) {
    throw ParameterDomainError(
        "ExperimentConfig: task angle range must be inside [0, pi]");
  }
  if (num_training_tasks < 1 || num_eval_tasks < 1) {
    throw ParameterDomainError("ExperimentConfig: task counts >= 1");
  }
  if (sweep.empty()) {
    throw ParameterDomainError("ExperimentConfig: sweep must be non-empty");
  }
  for (int k : sweep) {
    if (k < skill.min_chart_size || k > num_training_tasks) {
      throw ParameterDomainError(
          "ExperimentConfig: sweep sizes must lie in [min_chart_size, "
          "num_training_tasks]");
    }
  }
  if (embedding_dim_max < 1) {
    throw ParameterDomainError("ExperimentConfig: embedding_dim_max >= 1");
  }
  if (!(skill.gamma > 0.0) || !(skill.ridge >= 0.0) ||
      !(skill.ridge_max >= skill.ridge) || skill.min_chart_size < 1) {
    throw ParameterDomainError("ExperimentConfig: invalid skill settings");
  }
  if (chart_detect.k < 1 || chart_detect.k_step < 1 ||
      chart_detect.k_max < chart_detect.k || chart_detect.min_chart_size < 1 ||
      chart_detect.merge_gap_ratio < 0.0) {
    throw ParameterDomainError("ExperimentConfig: invalid chart detection");
  }
}

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json array = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) array.push_back(v[i]);
  return array;
}

Eigen::VectorXd vector_from_json(const json& array, const char* what) {
  if (!array.is_array()) {
    throw FormatError(std::string("config: ") + what + " must be an array");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(array.size()));
  Eigen::Index i = 0;
  for (const json& cell : array) {
    if (!cell.is_number()) {
      throw FormatError(std::string("config: non-numeric entry in ") + what);
    }
    v[i++] = cell.get<double>();
  }
  return v;
}

template <typename T>
T get_or(const json& j, const char* key, const T& fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw FormatError(std::string("config: bad value for '") + key + "'");
  }
}

template <std::size_t N>
json array3_to_json(const std::array<double, N>& a) {
  json out = json::array();
  for (double v : a) out.push_back(v);
  return out;
}

template <std::size_t N>
std::array<double, N> array3_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != N) {
    throw FormatError(std::string("config: ") + what + " must have " +
                      std::to_string(N) + " entries");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = j[i].get<double>();
  return out;
}

json config_to_json_object(const ExperimentConfig& cfg, bool with_output_dir) {
  json j;
  j["format"] = "dartskill-config";
  j["version"] = 1;
  j["arm"] = {{"link_lengths", array3_to_json(cfg.arm.link_lengths)},
              {"link_masses", array3_to_json(cfg.arm.link_masses)},
              {"gravity", cfg.arm.gravity},
              {"joint_damping", array3_to_json(cfg.arm.joint_damping)},
              {"torque_limit", cfg.arm.torque_limit},
              {"dt", cfg.arm.dt},
              {"room_width", cfg.arm.room_width},
              {"room_height", cfg.arm.room_height},
              {"base_position",
               json::array({cfg.arm.base_position.x(), cfg.arm.base_position.y()})},
              {"initial_angles", array3_to_json(cfg.arm.initial_angles)},
              {"horizon", cfg.arm.horizon},
              {"no_release_penalty", cfg.arm.no_release_penalty},
              {"reward_scale", cfg.arm.reward_scale}};
  j["gains"] = {{"kp", cfg.gains.kp}, {"ki", cfg.gains.ki}, {"kd", cfg.gains.kd}};
  j["dmp"] = {{"spring_constant", cfg.dmp.spring_constant},
              {"damping", cfg.dmp.damping},
              {"temporal_scale", cfg.dmp.temporal_scale},
              {"phase_decay", cfg.dmp.phase_decay},
              {"centers", vector_to_json(cfg.dmp.centers)},
              {"widths", vector_to_json(cfg.dmp.widths)}};
  j["exploration"] = {
      {"variance", vector_to_json(cfg.exploration.exploration_variance)},
      {"rollouts_per_update", cfg.exploration.rollouts_per_update},
      {"importance_top_k", cfg.exploration.importance_top_k},
      {"history_window_batches", cfg.exploration.history_window_batches},
      {"max_updates", cfg.exploration.max_updates},
      {"success_threshold", cfg.exploration.success_threshold},
      {"stall_batches", cfg.exploration.stall_batches},
      {"stall_variance_factor", cfg.exploration.stall_variance_factor},
      {"zero_return_floor", cfg.exploration.zero_return_floor}};
  j["chart_detect"] = {{"k", cfg.chart_detect.k},
                       {"k_max", cfg.chart_detect.k_max},
                       {"k_step", cfg.chart_detect.k_step},
                       {"min_chart_size", cfg.chart_detect.min_chart_size},
                       {"dust_fraction", cfg.chart_detect.dust_fraction},
                       {"merge_gap_ratio", cfg.chart_detect.merge_gap_ratio}};
  j["skill"] = {{"gamma", cfg.skill.gamma},
                {"ridge", cfg.skill.ridge},
                {"ridge_max", cfg.skill.ridge_max},
                {"min_chart_size", cfg.skill.min_chart_size}};
  j["tasks"] = {{"angle_min", cfg.tasks.angle_min},
                {"angle_max", cfg.tasks.angle_max}};
  j["init_policy"] = {{"release_phase", cfg.init_policy.release_phase},
                      {"goal", cfg.init_policy.goal},
                      {"weights", vector_to_json(cfg.init_policy.weights)}};
  j["num_training_tasks"] = cfg.num_training_tasks;
  j["num_eval_tasks"] = cfg.num_eval_tasks;
  j["warm_start"] = cfg.warm_start;
  j["sweep"] = cfg.sweep;
  j["embedding_dim_max"] = cfg.embedding_dim_max;
  j["master_seed"] = cfg.master_seed;
  if (with_output_dir) j["output_dir"] = cfg.output_dir;
  return j;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& cfg) {
  return config_to_json_object(cfg, true).dump(2) + "\n";
}

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& error) {
    throw FormatError(std::string("config: not valid JSON: ") + error.what());
  }
  if (!j.is_object()) throw FormatError("config: top level not an object");
  if (j.contains("format") && j["format"] != "dartskill-config") {
    throw FormatError("config: unknown format tag");
  }
  if (j.contains("version") && j["version"].get<int>() != 1) {
    throw FormatError("config: unsupported version");
  }

  ExperimentConfig cfg = ExperimentConfig::defaults();
  if (j.contains("arm")) {
    const json& a = j["arm"];
    cfg.arm.link_lengths = j.contains("arm") && a.contains("link_lengths")
                               ? array3_from_json<3>(a["link_lengths"], "link_lengths")
                               : cfg.arm.link_lengths;
    if (a.contains("link_masses")) {
      cfg.arm.link_masses = array3_from_json<3>(a["link_masses"], "link_masses");
    }
    cfg.arm.gravity = get_or(a, "gravity", cfg.arm.gravity);
    if (a.contains("joint_damping")) {
      cfg.arm.joint_damping =
          array3_from_json<3>(a["joint_damping"], "joint_damping");
    }
    cfg.arm.torque_limit = get_or(a, "torque_limit", cfg.arm.torque_limit);
    cfg.arm.dt = get_or(a, "dt", cfg.arm.dt);
    cfg.arm.room_width = get_or(a, "room_width", cfg.arm.room_width);
    cfg.arm.room_height = get_or(a, "room_height", cfg.arm.room_height);
    if (a.contains("base_position")) {
      const auto base = array3_from_json<2>(a["base_position"], "base_position");
      cfg.arm.base_position = {base[0], base[1]};
    }
    if (a.contains("initial_angles")) {
      cfg.arm.initial_angles =
          array3_from_json<3>(a["initial_angles"], "initial_angles");
    }
    cfg.arm.horizon = get_or(a, "horizon", cfg.arm.horizon);
    cfg.arm.no_release_penalty =
        get_or(a, "no_release_penalty", cfg.arm.no_release_penalty);
    cfg.arm.reward_scale = get_or(a, "reward_scale", cfg.arm.reward_scale);
  }
  if (j.contains("gains")) {
    const json& g = j["gains"];
    cfg.gains.kp = get_or(g, "kp", cfg.gains.kp);
    cfg.gains.ki = get_or(g, "ki", cfg.gains.ki);
    cfg.gains.kd = get_or(g, "kd", cfg.gains.kd);
  }
  if (j.contains("dmp")) {
    const json& d = j["dmp"];
    cfg.dmp.spring_constant = get_or(d, "spring_constant", cfg.dmp.spring_constant);
    cfg.dmp.damping = get_or(d, "damping", cfg.dmp.damping);
    cfg.dmp.temporal_scale = get_or(d, "temporal_scale", cfg.dmp.temporal_scale);
    cfg.dmp.phase_decay = get_or(d, "phase_decay", cfg.dmp.phase_decay);
    if (d.contains("centers")) {
      cfg.dmp.centers = vector_from_json(d["centers"], "dmp.centers");
    }
    if (d.contains("widths")) {
      cfg.dmp.widths = vector_from_json(d["widths"], "dmp.widths");
    }
    if (d.contains("num_bases") && !d.contains("centers")) {
      // Shorthand: rebuild the standard layout at the requested size.
      DmpConstants layout = DmpConstants::defaults(d["num_bases"].get<int>());
      cfg.dmp.centers = layout.centers;
      cfg.dmp.widths = layout.widths;
    }
  }
  if (j.contains("exploration")) {
    const json& e = j["exploration"];
    if (e.contains("variance")) {
      cfg.exploration.exploration_variance =
          vector_from_json(e["variance"], "exploration.variance");
    }
    cfg.exploration.rollouts_per_update =
        get_or(e, "rollouts_per_update", cfg.exploration.rollouts_per_update);
    cfg.exploration.importance_top_k =
        get_or(e, "importance_top_k", cfg.exploration.importance_top_k);
    cfg.exploration.history_window_batches = get_or(
        e, "history_window_batches", cfg.exploration.history_window_batches);
    cfg.exploration.max_updates =
        get_or(e, "max_updates", cfg.exploration.max_updates);
    cfg.exploration.success_threshold =
        get_or(e, "success_threshold", cfg.exploration.success_threshold);
    cfg.exploration.stall_batches =
        get_or(e, "stall_batches", cfg.exploration.stall_batches);
    cfg.exploration.stall_variance_factor = get_or(
        e, "stall_variance_factor", cfg.exploration.stall_variance_factor);
    cfg.exploration.zero_return_floor =
        get_or(e, "zero_return_floor", cfg.exploration.zero_return_floor);
  }
  if (!j.contains("exploration") || !j["exploration"].contains("variance")) {
    const Eigen::VectorXd standard =
        ExplorationConfig::defaults(cfg.dmp.num_bases()).exploration_variance;
    cfg.exploration.exploration_variance = standard;
  }
  if (j.contains("chart_detect")) {
    const json& c = j["chart_detect"];
    cfg.chart_detect.k = get_or(c, "k", cfg.chart_detect.k);
    cfg.chart_detect.k_max = get_or(c, "k_max", cfg.chart_detect.k_max);
    cfg.chart_detect.k_step = get_or(c, "k_step", cfg.chart_detect.k_step);
    cfg.chart_detect.min_chart_size =
        get_or(c, "min_chart_size", cfg.chart_detect.min_chart_size);
    cfg.chart_detect.dust_fraction =
        get_or(c, "dust_fraction", cfg.chart_detect.dust_fraction);
    cfg.chart_detect.merge_gap_ratio =
        get_or(c, "merge_gap_ratio", cfg.chart_detect.merge_gap_ratio);
  }
  if (j.contains("skill")) {
    const json& s = j["skill"];
    cfg.skill.gamma = get_or(s, "gamma", cfg.skill.gamma);
    cfg.skill.ridge = get_or(s, "ridge", cfg.skill.ridge);
    cfg.skill.ridge_max = get_or(s, "ridge_max", cfg.skill.ridge_max);
    cfg.skill.min_chart_size =
        get_or(s, "min_chart_size", cfg.skill.min_chart_size);
  }
  if (j.contains("tasks")) {
    const json& t = j["tasks"];
    cfg.tasks.angle_min = get_or(t, "angle_min", cfg.tasks.angle_min);
    cfg.tasks.angle_max = get_or(t, "angle_max", cfg.tasks.angle_max);
  }
  if (j.contains("init_policy")) {
    const json& p = j["init_policy"];
    cfg.init_policy.release_phase =
        get_or(p, "release_phase", cfg.init_policy.release_phase);
    cfg.init_policy.goal = get_or(p, "goal", cfg.init_policy.goal);
    if (p.contains("weights")) {
      cfg.init_policy.weights =
          vector_from_json(p["weights"], "init_policy.weights");
    }
  }
  if (!j.contains("init_policy") || !j["init_policy"].contains("weights")) {
    // Track whatever basis count the dmp section settled on.
    cfg.init_policy.weights = Eigen::VectorXd::Zero(cfg.dmp.num_bases());
  }
  cfg.num_training_tasks =
      get_or(j, "num_training_tasks", cfg.num_training_tasks);
  cfg.num_eval_tasks = get_or(j, "num_eval_tasks", cfg.num_eval_tasks);
  cfg.warm_start = get_or(j, "warm_start", cfg.warm_start);
  cfg.sweep = get_or(j, "sweep", cfg.sweep);
  cfg.embedding_dim_max =
      get_or(j, "embedding_dim_max", cfg.embedding_dim_max);
  cfg.master_seed = get_or(j, "master_seed", cfg.master_seed);
  cfg.output_dir = get_or(j, "output_dir", cfg.output_dir);
  return cfg;
}

void save_config(const ExperimentConfig& cfg,
                 const std::filesystem::path& path) {
  write_text_file(path, config_to_json(cfg));
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_text_file(path));
}

std::string config_hash(const ExperimentConfig& cfg) {
  // output_dir is where results land, not what they are; keep it out of
  // the identity so moving outputs elsewhere reruns nothing.
  const std::string canonical = config_to_json_object(cfg, false).dump();
  return hash_hex(fnv1a64(canonical));
}

void save_policy(const PolicyVector& policy,
                 const std::filesystem::path& path) {
  json j;
  j["format"] = "dartskill-policy";
  j["version"] = 1;
  j["release_phase"] = policy.release_phase;
  j["goal"] = policy.goal;
  j["weights"] = vector_to_json(policy.weights);
  write_text_file(path, j.dump(2) + "\n");
}

PolicyVector load_policy(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& error) {
    throw FormatError(std::string("policy file: not valid JSON: ") +
                      error.what());
  }
  if (!j.is_object() || !j.contains("format") ||
      j["format"] != "dartskill-policy") {
    throw FormatError("policy file: missing or wrong format tag");
  }
  if (!j.contains("version") || j["version"].get<int>() != 1) {
    throw FormatError("policy file: unsupported version");
  }
  PolicyVector p;
  if (!j.contains("release_phase") || !j.contains("goal") ||
      !j.contains("weights")) {
    throw FormatError("policy file: missing release_phase, goal or weights");
  }
  p.release_phase = j["release_phase"].get<double>();
  p.goal = j["goal"].get<double>();
  p.weights = vector_from_json(j["weights"], "weights");
  return p;
}

namespace {

const std::vector<std::string> kRunLogHeader = {
    "record_type",  "stage",          "task_index", "task_angle",
    "update_index", "best_distance",  "mean_return", "max_return",
    "stalled",      "variance_scale", "updates_used", "rollouts_used",
    "converged",    "message"};

}  // namespace

void RunLog::learn_event(const std::string& stage, int task_index,
                         double task_angle, const UpdateProgress& progress) {
  rows_.push_back({"update", stage, std::to_string(task_index),
                   format_double(task_angle),
                   std::to_string(progress.update_index),
                   format_double(progress.best_distance),
                   format_double(progress.mean_return),
                   format_double(progress.max_return),
                   progress.stalled_update ? "1" : "0",
                   format_double(progress.variance_scale), "", "", "", ""});
}

void RunLog::task_summary(const std::string& stage, int task_index,
                          double task_angle, const LearnResult& result) {
  rows_.push_back({"task", stage, std::to_string(task_index),
                   format_double(task_angle), "",
                   format_double(result.best_distance), "", "", "", "",
                   std::to_string(result.updates_used),
                   std::to_string(result.rollouts_used),
                   result.converged ? "1" : "0", ""});
}

void RunLog::note(const std::string& stage, const std::string& message) {
  rows_.push_back({"note", stage, "", "", "", "", "", "", "", "", "", "", "",
                   message});
}

void RunLog::save(const std::filesystem::path& path,
                  const std::string& hash) const {
  CsvWriter writer(kRunLogHeader, {"config_hash=" + hash});
  for (const auto& row : rows_) writer.add_row(row);
  writer.save(path);
}

PolicyVector mirrored_policy(const PolicyVector& policy) {
  PolicyVector m = policy;
  m.goal = -policy.goal;
  m.weights = -policy.weights;
  return m;
}

namespace {

// Learns one task from several candidate initializations.
struct RaceResult {
  // Best attempt: converged beats not, then fewer updates, then smaller
  // distance; earlier candidates win ties.  rollouts_used sums every
  // attempt so the accounting stays honest; the other fields are the
  // winner's.
  LearnResult winner;
  // Updates a learner without hindsight pays: attempts run in candidate
  // order and stop at the first success, so failed tries are billed in
  // full.  The winner's own update count understates from-scratch cost
  // whenever an earlier candidate burned its budget first.
  int sequential_updates = 0;
};

RaceResult race_learn(const Task& task,
                      const std::vector<PolicyVector>& candidates,
                      const ExperimentConfig& cfg, const SimContext& ctx,
                      std::uint64_t path0, std::uint64_t path1,
                      const ProgressFn& progress) {
  RaceResult race;
  LearnResult& best = race.winner;
  bool have = false;
  bool still_searching = true;
  long long spent = 0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const std::uint64_t seed = derive_seed(
        cfg.master_seed, {path0, path1, static_cast<std::uint64_t>(c)});
    LearnResult r = learn_policy(task, candidates[c], cfg.exploration, ctx,
                                 seed, progress);
    spent += r.rollouts_used;
    if (still_searching) {
      race.sequential_updates += r.updates_used;
      if (r.converged) still_searching = false;
    }
    const bool better =
        !have || (r.converged && !best.converged) ||
        (r.converged == best.converged &&
         (r.converged ? r.updates_used < best.updates_used
                      : r.best_distance < best.best_distance));
    if (better) {
      best = std::move(r);
      have = true;
    }
    if (best.converged && best.updates_used == 0) break;  // unbeatable
  }
  best.rollouts_used = spent;
  return race;
}

}  // namespace

TrainingPool build_training_set(const std::vector<Task>& tasks,
                                const ExperimentConfig& cfg, RunLog* log) {
  if (tasks.empty()) {
    throw ParameterDomainError("build_training_set: no tasks");
  }
  const SimContext ctx = cfg.sim_context();
  TrainingPool pool;

  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Task& task = tasks[i];
    std::vector<PolicyVector> candidates;
    if (cfg.warm_start && !pool.records.empty()) {
      // Nearest already-solved task by bearing; earlier task wins ties.
      std::size_t best = 0;
      double best_gap = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < pool.records.size(); ++r) {
        const double gap = std::abs(pool.records[r].angle - task.angle);
        if (gap < best_gap) {
          best_gap = gap;
          best = r;
        }
      }
      candidates.push_back(pool.records[best].policy);
    }
    candidates.push_back(cfg.init_policy);
    candidates.push_back(mirrored_policy(cfg.init_policy));

    ProgressFn progress;
    if (log) {
      progress = [log, i, &task](const UpdateProgress& p) {
        log->learn_event("train", static_cast<int>(i), task.angle, p);
      };
    }
    const LearnResult learned =
        race_learn(task, candidates, cfg, ctx, kSeedLearn,
                   static_cast<std::uint64_t>(i), progress)
            .winner;
    pool.total_rollouts += learned.rollouts_used;
    if (log) {
      log->task_summary("train", static_cast<int>(i), task.angle, learned);
    }

    if (learned.converged) {
      TaskLearnRecord record;
      record.task_index = static_cast<int>(i);
      record.angle = task.angle;
      record.updates_used = learned.updates_used;
      record.rollouts_used = learned.rollouts_used;
      record.best_distance = learned.best_distance;
      record.converged = true;
      record.policy = learned.final_theta;
      pool.tasks.push_back(task);
      pool.records.push_back(std::move(record));
    } else {
      ++pool.failed_tasks;
      if (log) {
        log->note("train", "task " + std::to_string(i) +
                               " failed to converge and is excluded");
      }
    }
  }

  if (2 * pool.failed_tasks > static_cast<int>(tasks.size())) {
    throw Error("build_training_set: " + std::to_string(pool.failed_tasks) +
                " of " + std::to_string(tasks.size()) +
                " tasks failed to converge");
  }
  return pool;
}

Eigen::VectorXd policy_feature_scales(const ExplorationConfig& cfg) {
  Eigen::VectorXd scales = cfg.exploration_variance.cwiseSqrt();
  return scales.cwiseMax(1e-12);
}

namespace {

PointCloud make_policy_cloud(const std::vector<PolicyVector>& policies,
                             const Eigen::VectorXd& feature_scales) {
  PointCloud cloud;
  const Eigen::Index dim = policies.front().dimension();
  if (feature_scales.size() != dim) {
    throw ParameterDomainError(
        "policy cloud: feature scale length does not match policy size");
  }
  cloud.points.resize(static_cast<Eigen::Index>(policies.size()), dim);
  for (std::size_t i = 0; i < policies.size(); ++i) {
    cloud.points.row(static_cast<Eigen::Index>(i)) =
        policies[i].flatten().cwiseQuotient(feature_scales);
  }
  return cloud;
}

}  // namespace

ChartAnalysis analyze_charts(const std::vector<PolicyVector>& policies,
                             const Eigen::VectorXd& feature_scales,
                             const ChartDetectConfig& detect,
                             int embedding_dim_max) {
  if (policies.size() < 2) {
    throw ParameterDomainError("analyze_charts: need >= 2 policies");
  }
  const PointCloud cloud = make_policy_cloud(policies, feature_scales);

  ChartAnalysis analysis;
  analysis.assignment = detect_charts_adaptive(cloud, detect);

  // ISOMAP runs on each chart as its own data set: neighbor graph over the
  // chart's members only, so no geodesic ever routes through another chart.
  for (int chart = 1; chart <= analysis.assignment.num_charts; ++chart) {
    std::vector<int> members;
    for (int i = 0; i < cloud.count(); ++i) {
      if (analysis.assignment.chart_of[static_cast<std::size_t>(i)] == chart) {
        members.push_back(i);
      }
    }
    const Eigen::Index m = static_cast<Eigen::Index>(members.size());
    if (m < 2) {
      // A degenerate chart has no geometry to analyze.
      analysis.residual_curves.emplace_back();
      analysis.dimension_estimates.push_back(0);
      analysis.embeddings.emplace_back(m, 0);
      analysis.members.push_back(std::move(members));
      continue;
    }
    PointCloud sub;
    sub.points.resize(m, cloud.points.cols());
    for (Eigen::Index a = 0; a < m; ++a) {
      sub.points.row(a) = cloud.points.row(members[static_cast<std::size_t>(a)]);
    }
    // Detection wants a small local k, but a confirmed chart of a few dozen
    // points embeds best with the densest graph the detector allows; start
    // at the cap and densify further if the chart still splits (guaranteed
    // connected once k reaches m - 1).
    int k = std::min<int>(detect.k_max, static_cast<int>(m) - 1);
    GeodesicResult geo = geodesic_distances(knn_graph(sub, k));
    while (geo.num_components > 1 && k < static_cast<int>(m) - 1) {
      k = std::min<int>(k + detect.k_step, static_cast<int>(m) - 1);
      geo = geodesic_distances(knn_graph(sub, k));
    }
    const int want = std::min<int>(embedding_dim_max, static_cast<int>(m) - 1);
    const Embedding embedding = classical_mds(geo.distances, std::max(want, 1));
    analysis.residual_curves.push_back(
        residual_variance(geo.distances, embedding));
    analysis.dimension_estimates.push_back(
        analysis.residual_curves.back().empty()
            ? 0
            : estimate_dimension(analysis.residual_curves.back()));
    analysis.embeddings.push_back(embedding.coordinates);
    analysis.members.push_back(std::move(members));
  }
  return analysis;
}

namespace {

// Evaluation tasks must be fresh: re-draw any angle that collides with a
// training task (deterministically, from the same stream).
std::vector<Task> sample_disjoint_tasks(const TaskDistribution& dist, int n,
                                        const ArmConfig& cfg,
                                        const std::vector<Task>& avoid) {
  Rng rng(dist.seed);
  std::vector<Task> tasks;
  tasks.reserve(static_cast<std::size_t>(n));
  int attempts = 0;
  while (static_cast<int>(tasks.size()) < n) {
    if (++attempts > 1000 * n) {
      throw Error("sample_disjoint_tasks: cannot find fresh task angles");
    }
    const double angle = rng.uniform(dist.angle_min, dist.angle_max);
    bool fresh = true;
    for (const Task& t : avoid) {
      if (std::abs(t.angle - angle) < 1e-9) {
        fresh = false;
        break;
      }
    }
    for (const Task& t : tasks) {
      if (std::abs(t.angle - angle) < 1e-9) {
        fresh = false;
        break;
      }
    }
    if (fresh) tasks.push_back(task_from_angle(angle, cfg));
  }
  return tasks;
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) return kNan;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const StageFn& on_stage) {
  const auto start_time = std::chrono::steady_clock::now();
  cfg.validate();
  const auto stage = [&](const std::string& name) {
    if (on_stage) on_stage(name);
  };

  const std::filesystem::path out_dir(cfg.output_dir);
  const std::string hash = config_hash(cfg);
  const std::filesystem::path report_path = out_dir / "report.json";
  if (std::filesystem::exists(report_path)) {
    // Stale outputs from another configuration must not be silently
    // replaced; same-config reruns are fine (and byte-identical).
    try {
      const json previous = json::parse(read_text_file(report_path));
      if (previous.contains("hash") && previous["hash"] != hash) {
        throw IoError("run_experiment: " + report_path.string() +
                      " was produced by config " +
                      previous["hash"].get<std::string>() +
                      ", current config is " + hash +
                      "; refusing to overwrite");
      }
    } catch (const json::exception&) {
      throw IoError("run_experiment: cannot read existing report at " +
                    report_path.string() + "; refusing to overwrite");
    }
  }

  RunLog log;
  const SimContext ctx = cfg.sim_context();
  ExperimentReport report;
  report.hash = hash;

  stage("sample-tasks");
  TaskDistribution train_dist = cfg.tasks;
  train_dist.seed = derive_seed(cfg.master_seed, {kSeedTrainingTasks});
  const std::vector<Task> train_tasks =
      sample_tasks(train_dist, cfg.num_training_tasks, cfg.arm);
  TaskDistribution eval_dist = cfg.tasks;
  eval_dist.seed = derive_seed(cfg.master_seed, {kSeedEvalTasks});
  const std::vector<Task> eval_tasks = sample_disjoint_tasks(
      eval_dist, cfg.num_eval_tasks, cfg.arm, train_tasks);

  stage("learn-examples");
  TrainingPool pool = build_training_set(train_tasks, cfg, &log);
  report.total_rollouts += pool.total_rollouts;

  stage("analyze-manifold");
  std::vector<PolicyVector> pool_policies;
  pool_policies.reserve(pool.records.size());
  for (const TaskLearnRecord& r : pool.records) {
    pool_policies.push_back(r.policy);
  }
  const Eigen::VectorXd feature_scales =
      policy_feature_scales(cfg.exploration);
  report.charts = analyze_charts(pool_policies, feature_scales,
                                 cfg.chart_detect, cfg.embedding_dim_max);
  for (std::size_t i = 0; i < pool.records.size(); ++i) {
    pool.records[i].chart = report.charts.assignment.chart_of[i];
  }
  report.training = pool.records;

  const TaskSpace space{cfg.tasks.angle_min, cfg.tasks.angle_max};
  {
    std::vector<double> features;
    std::vector<int> labels;
    for (const TaskLearnRecord& r : pool.records) {
      features.push_back(space.normalize(r.angle));
      labels.push_back(r.chart);
    }
    const ChartClassifier clf = train_classifier(
        features, labels, report.charts.assignment.num_charts);
    report.classifier_accuracy = clf.training_accuracy;
    report.boundary_angle = kNan;
    if (const auto crossing = clf.boundary_feature()) {
      report.boundary_angle =
          cfg.tasks.angle_min +
          *crossing * (cfg.tasks.angle_max - cfg.tasks.angle_min);
    }
  }

  stage("learn-references");
  std::vector<PolicyVector> references;
  references.reserve(eval_tasks.size());
  for (std::size_t e = 0; e < eval_tasks.size(); ++e) {
    ProgressFn progress = [&log, e, &eval_tasks](const UpdateProgress& p) {
      log.learn_event("reference", static_cast<int>(e), eval_tasks[e].angle,
                      p);
    };
    const RaceResult raced = race_learn(
        eval_tasks[e], {cfg.init_policy, mirrored_policy(cfg.init_policy)},
        cfg, ctx, kSeedReference, static_cast<std::uint64_t>(e), progress);
    const LearnResult& learned = raced.winner;
    log.task_summary("reference", static_cast<int>(e), eval_tasks[e].angle,
                     learned);
    report.total_rollouts += learned.rollouts_used;
    report.eval_angles.push_back(eval_tasks[e].angle);
    report.reference_updates.push_back(learned.updates_used);
    report.cold_start_updates.push_back(raced.sequential_updates);
    report.cold_start_converged.push_back(learned.converged);
    references.push_back(learned.final_theta);
  }

  stage("sweep");
  for (int k : cfg.sweep) {
    const int k_eff = std::min<int>(k, static_cast<int>(pool.records.size()));
    if (k_eff < k) {
      log.note("sweep", "sweep size " + std::to_string(k) + " reduced to " +
                            std::to_string(k_eff) + " (training failures)");
    }
    // The skill at sweep size k sees exactly the first k solved examples,
    // and runs the whole method (chart detection included) on them.
    TrainingSet subset;
    std::vector<PolicyVector> subset_policies;
    for (int i = 0; i < k_eff; ++i) {
      subset.tasks.push_back(pool.tasks[static_cast<std::size_t>(i)]);
      subset.policies.push_back(pool.records[static_cast<std::size_t>(i)].policy);
      subset_policies.push_back(subset.policies.back());
    }
    const PointCloud subset_cloud =
        make_policy_cloud(subset.policies, feature_scales);
    const ChartAssignment subset_charts =
        detect_charts_adaptive(subset_cloud, cfg.chart_detect);
    subset.chart_labels = subset_charts.chart_of;

    const SkillModel skill_model = train_skill(subset, space, cfg.skill);

    // Per-dimension parameter scales from this skill's own examples.
    Eigen::VectorXd scales =
        Eigen::VectorXd::Zero(subset.policies.front().dimension());
    for (const PolicyVector& p : subset.policies) {
      scales = scales.cwiseMax(p.flatten().cwiseAbs());
    }
    scales = scales.cwiseMax(1e-9);

    SweepSummary summary;
    summary.k = k_eff;
    summary.num_charts = subset_charts.num_charts;
    summary.classifier_accuracy = skill_model.classifier.training_accuracy;
    std::vector<double> param_errors;
    std::vector<double> zero_shots;
    std::vector<double> fine_tunes;

    for (std::size_t e = 0; e < eval_tasks.size(); ++e) {
      const Task& task = eval_tasks[e];
      EvalRecord record;
      record.sweep_k = k_eff;
      record.eval_index = static_cast<int>(e);
      record.angle = task.angle;

      const PolicyVector predicted = predict(skill_model, task);
      const Eigen::VectorXd delta =
          predicted.flatten() - references[e].flatten();
      record.param_rmse =
          std::sqrt(delta.squaredNorm() / static_cast<double>(delta.size()));
      record.param_error = (delta.cwiseAbs().cwiseQuotient(scales)).mean();

      record.zero_shot_distance =
          simulate_throw(predicted, task, ctx).distance_to_target;

      const std::uint64_t seed =
          derive_seed(cfg.master_seed, {kSeedFineTune,
                                        static_cast<std::uint64_t>(k),
                                        static_cast<std::uint64_t>(e)});
      const std::string ft_stage = "fine-tune-k" + std::to_string(k_eff);
      ProgressFn progress = [&log, &ft_stage, e, &task](const UpdateProgress& p) {
        log.learn_event(ft_stage, static_cast<int>(e), task.angle, p);
      };
      const LearnResult tuned = learn_policy(task, predicted, cfg.exploration,
                                             ctx, seed, progress);
      log.task_summary(ft_stage, static_cast<int>(e), task.angle, tuned);
      report.total_rollouts += tuned.rollouts_used;
      record.fine_tune_updates = tuned.updates_used;
      record.fine_tune_converged = tuned.converged;

      if (report.cold_start_converged[e]) {
        param_errors.push_back(record.param_error);
      }
      zero_shots.push_back(record.zero_shot_distance);
      fine_tunes.push_back(static_cast<double>(record.fine_tune_updates));
      report.evals.push_back(record);
    }

    summary.mean_param_error = mean_of(param_errors);
    summary.mean_zero_shot_distance = mean_of(zero_shots);
    summary.mean_fine_tune_updates = mean_of(fine_tunes);
    report.sweep.push_back(summary);
  }

  stage("write-outputs");
  std::filesystem::create_directories(out_dir);
  save_config(cfg, out_dir / "config.json");
  save_report(report, report_path);
  log.save(out_dir / "runlog.csv", hash);
  {
    // Flat view of the learned examples (doubles as the raw data behind
    // the policy-versus-task figure).
    std::vector<std::string> header = {"task_index", "angle", "chart",
                                       "updates_used", "best_distance"};
    const int dim = pool.records.empty()
                        ? 0
                        : pool.records.front().policy.dimension();
    header.push_back("release_phase");
    header.push_back("goal");
    for (int wi = 0; wi < dim - PolicyVector::kWeightOffset; ++wi) {
      header.push_back("weight_" + std::to_string(wi + 1));
    }
    CsvWriter writer(header, {"config_hash=" + hash});
    for (const TaskLearnRecord& r : pool.records) {
      std::vector<std::string> row = {
          std::to_string(r.task_index), format_double(r.angle),
          std::to_string(r.chart), std::to_string(r.updates_used),
          format_double(r.best_distance)};
      const Eigen::VectorXd flat = r.policy.flatten();
      for (Eigen::Index i = 0; i < flat.size(); ++i) {
        row.push_back(format_double(flat[i]));
      }
      writer.add_row(row);
    }
    writer.save(out_dir / "training_policies.csv");
  }
  emit_figures(report, out_dir);

  report.total_runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    start_time)
          .count();
  return report;
}

namespace {

json chart_analysis_to_json(const ChartAnalysis& charts) {
  json j;
  j["num_charts"] = charts.assignment.num_charts;
  j["k_used"] = charts.assignment.k_used;
  j["single_chart_fallback"] = charts.assignment.single_chart_fallback;
  j["chart_of"] = charts.assignment.chart_of;
  j["chart_sizes"] = charts.assignment.chart_sizes;
  j["residual_curves"] = charts.residual_curves;
  j["dimension_estimates"] = charts.dimension_estimates;
  json embeddings = json::array();
  for (const Eigen::MatrixXd& e : charts.embeddings) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < e.rows(); ++r) {
      rows.push_back(vector_to_json(e.row(r)));
    }
    embeddings.push_back(std::move(rows));
  }
  j["embeddings"] = std::move(embeddings);
  j["members"] = charts.members;
  return j;
}

ChartAnalysis chart_analysis_from_json(const json& j) {
  ChartAnalysis charts;
  charts.assignment.num_charts = j.at("num_charts").get<int>();
  charts.assignment.k_used = j.at("k_used").get<int>();
  charts.assignment.single_chart_fallback =
      j.at("single_chart_fallback").get<bool>();
  charts.assignment.chart_of = j.at("chart_of").get<std::vector<int>>();
  charts.assignment.chart_sizes = j.at("chart_sizes").get<std::vector<int>>();
  charts.residual_curves =
      j.at("residual_curves").get<std::vector<std::vector<double>>>();
  charts.dimension_estimates =
      j.at("dimension_estimates").get<std::vector<int>>();
  for (const json& rows : j.at("embeddings")) {
    Eigen::MatrixXd e(rows.size(),
                      rows.empty() ? 0 : rows.front().size());
    Eigen::Index r = 0;
    for (const json& row : rows) {
      e.row(r++) = vector_from_json(row, "embedding row");
    }
    charts.embeddings.push_back(std::move(e));
  }
  charts.members = j.at("members").get<std::vector<std::vector<int>>>();
  return charts;
}

}  // namespace

void save_report(const ExperimentReport& report,
                 const std::filesystem::path& path) {
  json j;
  j["format"] = "dartskill-report";
  j["version"] = 1;
  j["hash"] = report.hash;
  json training = json::array();
  for (const TaskLearnRecord& r : report.training) {
    training.push_back({{"task_index", r.task_index},
                        {"angle", r.angle},
                        {"chart", r.chart},
                        {"updates_used", r.updates_used},
                        {"rollouts_used", r.rollouts_used},
                        {"best_distance", r.best_distance},
                        {"converged", r.converged},
                        {"policy", vector_to_json(r.policy.flatten())}});
  }
  j["training"] = std::move(training);
  j["charts"] = chart_analysis_to_json(report.charts);
  if (std::isnan(report.boundary_angle)) {
    j["boundary_angle"] = nullptr;
  } else {
    j["boundary_angle"] = report.boundary_angle;
  }
  j["classifier_accuracy"] = report.classifier_accuracy;
  j["eval_angles"] = report.eval_angles;
  j["reference_updates"] = report.reference_updates;
  j["cold_start_updates"] = report.cold_start_updates;
  {
    json flags = json::array();
    for (bool b : report.cold_start_converged) flags.push_back(b);
    j["cold_start_converged"] = std::move(flags);
  }
  json evals = json::array();
  for (const EvalRecord& r : report.evals) {
    evals.push_back({{"sweep_k", r.sweep_k},
                     {"eval_index", r.eval_index},
                     {"angle", r.angle},
                     {"param_error", r.param_error},
                     {"param_rmse", r.param_rmse},
                     {"zero_shot_distance", r.zero_shot_distance},
                     {"fine_tune_updates", r.fine_tune_updates},
                     {"fine_tune_converged", r.fine_tune_converged}});
  }
  j["evals"] = std::move(evals);
  json sweep = json::array();
  for (const SweepSummary& s : report.sweep) {
    sweep.push_back({{"k", s.k},
                     {"num_charts", s.num_charts},
                     {"classifier_accuracy", s.classifier_accuracy},
                     {"mean_param_error", s.mean_param_error},
                     {"mean_zero_shot_distance", s.mean_zero_shot_distance},
                     {"mean_fine_tune_updates", s.mean_fine_tune_updates}});
  }
  j["sweep"] = std::move(sweep);
  j["total_rollouts"] = report.total_rollouts;
  write_text_file(path, j.dump(2) + "\n");
}

ExperimentReport load_report(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& error) {
    throw FormatError(std::string("report file: not valid JSON: ") +
                      error.what());
  }
  try {
    if (j.at("format") != "dartskill-report" || j.at("version") != 1) {
      throw FormatError("report file: wrong format tag or version");
    }
    ExperimentReport report;
    report.hash = j.at("hash").get<std::string>();
    for (const json& r : j.at("training")) {
      TaskLearnRecord record;
      record.task_index = r.at("task_index").get<int>();
      record.angle = r.at("angle").get<double>();
      record.chart = r.at("chart").get<int>();
      record.updates_used = r.at("updates_used").get<int>();
      record.rollouts_used = r.at("rollouts_used").get<long long>();
      record.best_distance = r.at("best_distance").get<double>();
      record.converged = r.at("converged").get<bool>();
      record.policy =
          PolicyVector::from_flat(vector_from_json(r.at("policy"), "policy"));
      report.training.push_back(std::move(record));
    }
    report.charts = chart_analysis_from_json(j.at("charts"));
    report.boundary_angle = j.at("boundary_angle").is_null()
                                ? kNan
                                : j.at("boundary_angle").get<double>();
    report.classifier_accuracy = j.at("classifier_accuracy").get<double>();
    report.eval_angles = j.at("eval_angles").get<std::vector<double>>();
    report.reference_updates =
        j.at("reference_updates").get<std::vector<int>>();
    report.cold_start_updates =
        j.at("cold_start_updates").get<std::vector<int>>();
    for (const json& b : j.at("cold_start_converged")) {
      report.cold_start_converged.push_back(b.get<bool>());
    }
    for (const json& r : j.at("evals")) {
      EvalRecord record;
      record.sweep_k = r.at("sweep_k").get<int>();
      record.eval_index = r.at("eval_index").get<int>();
      record.angle = r.at("angle").get<double>();
      record.param_error = r.at("param_error").get<double>();
      record.param_rmse = r.at("param_rmse").get<double>();
      record.zero_shot_distance = r.at("zero_shot_distance").get<double>();
      record.fine_tune_updates = r.at("fine_tune_updates").get<int>();
      record.fine_tune_converged = r.at("fine_tune_converged").get<bool>();
      report.evals.push_back(record);
    }
    for (const json& s : j.at("sweep")) {
      SweepSummary summary;
      summary.k = s.at("k").get<int>();
      summary.num_charts = s.at("num_charts").get<int>();
      summary.classifier_accuracy = s.at("classifier_accuracy").get<double>();
      summary.mean_param_error = s.at("mean_param_error").get<double>();
      summary.mean_zero_shot_distance =
          s.at("mean_zero_shot_distance").get<double>();
      summary.mean_fine_tune_updates =
          s.at("mean_fine_tune_updates").get<double>();
      report.sweep.push_back(summary);
    }
    report.total_rollouts = j.at("total_rollouts").get<long long>();
    return report;
  } catch (const json::exception& error) {
    throw FormatError(std::string("report file: missing or invalid field: ") +
                      error.what());
  }
}

namespace {

const char* chart_color(int chart) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                  "#9467bd", "#ff7f0e", "#8c564b"};
  return kColors[(chart - 1) % 6];
}

}  // namespace

void emit_figures(const ExperimentReport& report,
                  const std::filesystem::path& output_dir) {
  std::filesystem::create_directories(output_dir);
  const std::vector<std::string> provenance = {"config_hash=" + report.hash};

  // Policy parameters as a function of the task, split by chart.
  {
    CsvWriter writer({"angle", "chart", "release_phase", "goal", "weight_1",
                      "weight_18", "weight_35"},
                     provenance);
    for (const TaskLearnRecord& r : report.training) {
      const Eigen::VectorXd flat = r.policy.flatten();
      const Eigen::Index n = flat.size();
      writer.add_row({format_double(r.angle), std::to_string(r.chart),
                      format_double(flat[0]), format_double(flat[1]),
                      format_double(flat[std::min<Eigen::Index>(2, n - 1)]),
                      format_double(flat[std::min<Eigen::Index>(19, n - 1)]),
                      format_double(flat[n - 1])});
    }
    writer.save(output_dir / "fig2_policy_vs_task.csv");

    std::vector<PlotSeries> series;
    int max_chart = 0;
    for (const TaskLearnRecord& r : report.training) {
      max_chart = std::max(max_chart, r.chart);
    }
    for (int chart = 1; chart <= max_chart; ++chart) {
      PlotSeries s;
      s.name = "chart " + std::to_string(chart);
      s.color = chart_color(chart);
      s.draw_line = false;
      for (const TaskLearnRecord& r : report.training) {
        if (r.chart != chart) continue;
        s.x.push_back(r.angle);
        s.y.push_back(r.policy.goal);
      }
      series.push_back(std::move(s));
    }
    write_svg_plot(output_dir / "fig2_goal_vs_task.svg",
                   {"Goal parameter across tasks", "task angle (rad)",
                    "goal (rad)"},
                   series);
  }

  // Per-chart 2-D embedding of the policies.
  {
    CsvWriter writer({"chart", "point_index", "angle", "coord_1", "coord_2"},
                     provenance);
    std::vector<PlotSeries> series;
    for (std::size_t chart = 0; chart < report.charts.embeddings.size();
         ++chart) {
      const Eigen::MatrixXd& coords = report.charts.embeddings[chart];
      const std::vector<int>& members = report.charts.members[chart];
      PlotSeries s;
      s.name = "chart " + std::to_string(chart + 1);
      s.color = chart_color(static_cast<int>(chart) + 1);
      s.draw_line = false;
      for (Eigen::Index r = 0; r < coords.rows(); ++r) {
        const double c1 = coords.cols() > 0 ? coords(r, 0) : 0.0;
        const double c2 = coords.cols() > 1 ? coords(r, 1) : 0.0;
        const int point = members[static_cast<std::size_t>(r)];
        const double angle =
            point < static_cast<int>(report.training.size())
                ? report.training[static_cast<std::size_t>(point)].angle
                : kNan;
        writer.add_row({std::to_string(chart + 1), std::to_string(point),
                        format_double(angle), format_double(c1),
                        format_double(c2)});
        s.x.push_back(c1);
        s.y.push_back(c2);
      }
      series.push_back(std::move(s));
    }
    writer.save(output_dir / "fig3_embedding.csv");
    write_svg_plot(output_dir / "fig3_embedding.svg",
                   {"Policy embedding by chart", "coordinate 1",
                    "coordinate 2"},
                   series);
  }

  // Sweep curves: parameter error, zero-shot distance, fine-tune updates.
  {
    CsvWriter writer({"training_examples", "mean_param_error"}, provenance);
    PlotSeries s;
    s.name = "prediction error";
    for (const SweepSummary& row : report.sweep) {
      writer.add_row({std::to_string(row.k),
                      format_double(row.mean_param_error)});
      s.x.push_back(row.k);
      s.y.push_back(row.mean_param_error);
    }
    writer.save(output_dir / "fig5_param_error.csv");
    write_svg_plot(output_dir / "fig5_param_error.svg",
                   {"Predicted-parameter error vs training size",
                    "training examples", "mean scaled error"},
                   {s});
  }
  {
    CsvWriter writer({"training_examples", "mean_zero_shot_distance"},
                     provenance);
    PlotSeries s;
    s.name = "zero-shot distance";
    s.color = "#d62728";
    for (const SweepSummary& row : report.sweep) {
      writer.add_row({std::to_string(row.k),
                      format_double(row.mean_zero_shot_distance)});
      s.x.push_back(row.k);
      s.y.push_back(row.mean_zero_shot_distance);
    }
    writer.save(output_dir / "fig6_zero_shot.csv");
    write_svg_plot(output_dir / "fig6_zero_shot.svg",
                   {"Zero-shot distance to target vs training size",
                    "training examples", "mean distance (m)"},
                   {s});
  }
  {
    double cold_mean = kNan;
    if (!report.cold_start_updates.empty()) {
      double sum = 0.0;
      for (int u : report.cold_start_updates) sum += u;
      cold_mean = sum / static_cast<double>(report.cold_start_updates.size());
    }
    CsvWriter writer({"training_examples", "mean_fine_tune_updates",
                      "mean_cold_start_updates"},
                     provenance);
    PlotSeries tuned;
    tuned.name = "after prediction";
    tuned.color = "#2ca02c";
    PlotSeries cold;
    cold.name = "from scratch";
    cold.color = "#666666";
    cold.draw_markers = false;
    for (const SweepSummary& row : report.sweep) {
      writer.add_row({std::to_string(row.k),
                      format_double(row.mean_fine_tune_updates),
                      format_double(cold_mean)});
      tuned.x.push_back(row.k);
      tuned.y.push_back(row.mean_fine_tune_updates);
      cold.x.push_back(row.k);
      cold.y.push_back(cold_mean);
    }
    writer.save(output_dir / "fig7_fine_tune.csv");
    write_svg_plot(output_dir / "fig7_fine_tune.svg",
                   {"Updates to threshold vs training size",
                    "training examples", "mean policy updates"},
                   {tuned, cold});
  }
}

}  // namespace dartskill
