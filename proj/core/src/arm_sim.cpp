#include "dartskill/arm_sim.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "dartskill/errors.hpp"
#include "dartskill/text_io.hpp"

namespace dartskill {

void ArmConfig::validate() const {
  for (double l : link_lengths) {
    if (!(l > 0.0)) throw ParameterDomainError("ArmConfig: link lengths > 0");
  }
  for (double m : link_masses) {
    if (!(m > 0.0)) throw ParameterDomainError("ArmConfig: link masses > 0");
  }
  for (double d : joint_damping) {
    if (!(d >= 0.0)) throw ParameterDomainError("ArmConfig: damping >= 0");
  }
  if (!(torque_limit > 0.0)) {
    throw ParameterDomainError("ArmConfig: torque_limit > 0");
  }
  if (!(dt > 0.0)) throw ParameterDomainError("ArmConfig: dt > 0");
  if (!(room_width > 0.0) || !(room_height > 0.0)) {
    throw ParameterDomainError("ArmConfig: room dimensions > 0");
  }
  if (!(gravity >= 0.0)) throw ParameterDomainError("ArmConfig: gravity >= 0");
  if (!(horizon > 0.0)) throw ParameterDomainError("ArmConfig: horizon > 0");
  if (!(no_release_penalty > 0.0)) {
    throw ParameterDomainError("ArmConfig: no_release_penalty > 0");
  }
  if (!(base_position.x() > 0.0) || !(base_position.x() < room_width) ||
      !(base_position.y() > 0.0) || !(base_position.y() < room_height)) {
    throw ParameterDomainError("ArmConfig: base must be inside the room");
  }
}

Task task_from_angle(double angle, const ArmConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(angle) || angle < 0.0 || angle > 3.1415926535897932) {
    throw ParameterDomainError("task_from_angle: bearing outside [0, pi]");
  }
  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  const Eigen::Vector2d base = cfg.base_position;

  // Nearest positive ray parameter whose hit stays on the wall/ceiling
  // segment.  With the base strictly inside and the bearing in [0, pi],
  // at least one candidate is always valid.
  double best_t = std::numeric_limits<double>::infinity();
  Eigen::Vector2d best_point = base;
  const auto consider = [&](double t, const Eigen::Vector2d& point) {
    if (t > 0.0 && t < best_t) {
      best_t = t;
      best_point = point;
    }
  };
  if (dx > 0.0) {
    const double t = (cfg.room_width - base.x()) / dx;
    const double y = base.y() + t * dy;
    if (y >= 0.0 && y <= cfg.room_height) {
      consider(t, Eigen::Vector2d(cfg.room_width, y));
    }
  }
  if (dx < 0.0) {
    const double t = -base.x() / dx;
    const double y = base.y() + t * dy;
    if (y >= 0.0 && y <= cfg.room_height) {
      consider(t, Eigen::Vector2d(0.0, y));
    }
  }
  if (dy > 0.0) {
    const double t = (cfg.room_height - base.y()) / dy;
    const double x = base.x() + t * dx;
    if (x >= 0.0 && x <= cfg.room_width) {
      consider(t, Eigen::Vector2d(x, cfg.room_height));
    }
  }
  if (!std::isfinite(best_t)) {
    throw GeometryError("task_from_angle: bearing ray misses the boundary");
  }
  Task task;
  task.angle = angle;
  task.surface_point = best_point;
  return task;
}

namespace {

// Cumulative link orientations phi_j = q_1 + ... + q_j.
Eigen::Vector3d cumulative_angles(const Eigen::Vector3d& q) {
  return {q[0], q[0] + q[1], q[0] + q[1] + q[2]};
}

// Mass carried at or beyond link j (point masses sit at link tips, so
// link j's orientation moves every mass from j outward).
Eigen::Vector3d carried_mass(const ArmConfig& cfg) {
  const auto& m = cfg.link_masses;
  return {m[0] + m[1] + m[2], m[1] + m[2], m[2]};
}

// Kinetic energy is (1/2) phidot^T A(phi) phidot over cumulative-angle
// rates, with A_{jl} = mu_max(j,l) * L_j * L_l * cos(phi_j - phi_l).
// The joint-space mass matrix is then M = B^T A B where B maps joint
// rates to cumulative rates (lower-triangular ones).
Eigen::Matrix3d orientation_inertia(const Eigen::Vector3d& phi,
                                    const ArmConfig& cfg) {
  const Eigen::Vector3d mu = carried_mass(cfg);
  Eigen::Matrix3d a;
  for (int j = 0; j < 3; ++j) {
    for (int l = 0; l < 3; ++l) {
      a(j, l) = mu[std::max(j, l)] * cfg.link_lengths[j] *
                cfg.link_lengths[l] * std::cos(phi[j] - phi[l]);
    }
  }
  return a;
}

// d A / d q_m: only the cosine factors depend on q, and
// d(phi_j - phi_l)/dq_m = [j >= m] - [l >= m].
Eigen::Matrix3d orientation_inertia_derivative(const Eigen::Vector3d& phi,
                                               int m, const ArmConfig& cfg) {
  const Eigen::Vector3d mu = carried_mass(cfg);
  Eigen::Matrix3d da = Eigen::Matrix3d::Zero();
  for (int j = 0; j < 3; ++j) {
    for (int l = 0; l < 3; ++l) {
      const int dphi = (j >= m ? 1 : 0) - (l >= m ? 1 : 0);
      if (dphi == 0) continue;
      da(j, l) = -mu[std::max(j, l)] * cfg.link_lengths[j] *
                 cfg.link_lengths[l] * std::sin(phi[j] - phi[l]) * dphi;
    }
  }
  return da;
}

Eigen::Matrix3d joint_rate_map() {
  Eigen::Matrix3d b;
  b << 1, 0, 0, 1, 1, 0, 1, 1, 1;
  return b;
}

// Gravity torque dV/dq_m = g * sum_{j >= m} mu_j L_j cos(phi_j).
Eigen::Vector3d gravity_torque(const Eigen::Vector3d& phi,
                               const ArmConfig& cfg) {
  const Eigen::Vector3d mu = carried_mass(cfg);
  Eigen::Vector3d tau = Eigen::Vector3d::Zero();
  for (int m = 0; m < 3; ++m) {
    for (int j = m; j < 3; ++j) {
      tau[m] += cfg.gravity * mu[j] * cfg.link_lengths[j] * std::cos(phi[j]);
    }
  }
  return tau;
}

// M(q) qdd + (Mdot qd - dKE/dq) + dV/dq + damping qd = applied torque.
Eigen::Vector3d acceleration(const Eigen::Vector3d& q,
                             const Eigen::Vector3d& qd, double torque,
                             const ArmConfig& cfg) {
  const Eigen::Vector3d phi = cumulative_angles(q);
  const Eigen::Matrix3d b = joint_rate_map();
  const Eigen::Matrix3d mass = b.transpose() * orientation_inertia(phi, cfg) * b;

  Eigen::Matrix3d mass_dot = Eigen::Matrix3d::Zero();
  Eigen::Vector3d ke_gradient = Eigen::Vector3d::Zero();
  for (int m = 0; m < 3; ++m) {
    const Eigen::Matrix3d dm =
        b.transpose() * orientation_inertia_derivative(phi, m, cfg) * b;
    mass_dot += dm * qd[m];
    ke_gradient[m] = 0.5 * qd.dot(dm * qd);
  }

  Eigen::Vector3d rhs = -(mass_dot * qd) + ke_gradient -
                        gravity_torque(phi, cfg);
  for (int m = 0; m < 3; ++m) rhs[m] -= cfg.joint_damping[m] * qd[m];
  rhs[1] += torque;

  return mass.ldlt().solve(rhs);
}

}  // namespace

Eigen::Vector2d tip_position(const Eigen::Vector3d& joint_angles,
                             const ArmConfig& cfg) {
  const Eigen::Vector3d phi = cumulative_angles(joint_angles);
  Eigen::Vector2d p = cfg.base_position;
  for (int j = 0; j < 3; ++j) {
    p.x() += cfg.link_lengths[j] * std::cos(phi[j]);
    p.y() += cfg.link_lengths[j] * std::sin(phi[j]);
  }
  return p;
}

Eigen::Vector2d tip_velocity(const Eigen::Vector3d& joint_angles,
                             const Eigen::Vector3d& joint_velocities,
                             const ArmConfig& cfg) {
  const Eigen::Vector3d phi = cumulative_angles(joint_angles);
  const Eigen::Vector3d phi_dot = joint_rate_map() * joint_velocities;
  Eigen::Vector2d v{0.0, 0.0};
  for (int j = 0; j < 3; ++j) {
    v.x() -= cfg.link_lengths[j] * phi_dot[j] * std::sin(phi[j]);
    v.y() += cfg.link_lengths[j] * phi_dot[j] * std::cos(phi[j]);
  }
  return v;
}

ArmState step(const ArmState& state, double torque, const ArmConfig& cfg) {
  if (!state.joint_angles.allFinite() || !state.joint_velocities.allFinite() ||
      !std::isfinite(torque)) {
    throw NumericDomainError("step: non-finite state or torque");
  }
  const double tau =
      std::clamp(torque, -cfg.torque_limit, cfg.torque_limit);
  const double dt = cfg.dt;

  // RK4 over y = (q, qd) with the torque held across the step.
  const auto deriv = [&](const Eigen::Vector3d& q, const Eigen::Vector3d& qd,
                         Eigen::Vector3d& dq, Eigen::Vector3d& dqd) {
    dq = qd;
    dqd = acceleration(q, qd, tau, cfg);
  };

  Eigen::Vector3d k1q, k1v, k2q, k2v, k3q, k3v, k4q, k4v;
  const Eigen::Vector3d& q = state.joint_angles;
  const Eigen::Vector3d& v = state.joint_velocities;
  deriv(q, v, k1q, k1v);
  deriv(q + 0.5 * dt * k1q, v + 0.5 * dt * k1v, k2q, k2v);
  deriv(q + 0.5 * dt * k2q, v + 0.5 * dt * k2v, k3q, k3v);
  deriv(q + dt * k3q, v + dt * k3v, k4q, k4v);

  ArmState next = state;
  next.joint_angles = q + dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
  next.joint_velocities = v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  return next;
}

PidOutput pid_torque(double desired_angle, double desired_velocity,
                     const ArmState& state, const PidGains& gains,
                     double integrator, double dt) {
  const double error = desired_angle - state.joint_angles[1];
  const double error_rate = desired_velocity - state.joint_velocities[1];
  PidOutput out;
  out.torque = gains.kp * error + gains.ki * integrator + gains.kd * error_rate;
  out.integrator = integrator + error * dt;
  return out;
}

Eigen::Vector2d ballistic_impact(const ReleaseState& release,
                                 const ArmConfig& cfg) {
  const Eigen::Vector2d p = release.position;
  const Eigen::Vector2d v = release.velocity;
  if (!p.allFinite() || !v.allFinite()) {
    throw NumericDomainError("ballistic_impact: non-finite release state");
  }
  if (!(p.x() > 0.0) || !(p.x() < cfg.room_width) || !(p.y() > 0.0) ||
      !(p.y() < cfg.room_height)) {
    throw GeometryError("ballistic_impact: release point outside the room");
  }
  const double g = cfg.gravity;

  double best_t = std::numeric_limits<double>::infinity();
  Eigen::Vector2d best_point{0.0, 0.0};
  const auto height_at = [&](double t) {
    return p.y() + v.y() * t - 0.5 * g * t * t;
  };
  const auto consider = [&](double t, const Eigen::Vector2d& point) {
    if (t > 0.0 && t < best_t) {
      best_t = t;
      best_point = point;
    }
  };

  // Side walls: linear horizontal motion.
  if (v.x() > 0.0) {
    const double t = (cfg.room_width - p.x()) / v.x();
    const double y = height_at(t);
    if (y >= 0.0 && y <= cfg.room_height) {
      consider(t, Eigen::Vector2d(cfg.room_width, y));
    }
  }
  if (v.x() < 0.0) {
    const double t = -p.x() / v.x();
    const double y = height_at(t);
    if (y >= 0.0 && y <= cfg.room_height) {
      consider(t, Eigen::Vector2d(0.0, y));
    }
  }
  // Floor and ceiling: quadratic (or linear when gravity is off) roots of
  // height_at(t) = level, keeping the earliest positive root that stays
  // within the horizontal span.
  const auto consider_level = [&](double level) {
    if (g == 0.0) {
      if (v.y() == 0.0) return;
      const double t = (level - p.y()) / v.y();
      const double x = p.x() + v.x() * t;
      if (t > 0.0 && x >= 0.0 && x <= cfg.room_width) {
        consider(t, Eigen::Vector2d(x, level));
      }
      return;
    }
    // 0.5*g*t^2 - vy*t + (level - py) = 0
    const double disc = v.y() * v.y() - 2.0 * g * (level - p.y());
    if (disc < 0.0) return;
    const double sq = std::sqrt(disc);
    for (double t : {(v.y() - sq) / g, (v.y() + sq) / g}) {
      if (t <= 0.0) continue;
      const double x = p.x() + v.x() * t;
      if (x >= 0.0 && x <= cfg.room_width) {
        consider(t, Eigen::Vector2d(x, level));
        break;  // x(t) is monotone, so the later root can't re-enter span
      }
    }
  };
  consider_level(cfg.room_height);
  consider_level(0.0);

  if (!std::isfinite(best_t)) {
    throw GeometryError("ballistic_impact: path never meets the boundary");
  }
  return best_point;
}

std::string serialize_outcome(const ThrowOutcome& outcome) {
  std::string s;
  s += outcome.released ? "1" : "0";
  const double scalars[] = {
      outcome.release_t,          outcome.release_state.position.x(),
      outcome.release_state.position.y(), outcome.release_state.velocity.x(),
      outcome.release_state.velocity.y(), outcome.landing_point.x(),
      outcome.landing_point.y(),  outcome.distance_to_target};
  for (double value : scalars) {
    s += ',';
    s += format_double(value);
  }
  for (const ArmState& sample : outcome.trajectory) {
    for (int i = 0; i < 3; ++i) {
      s += ',';
      s += format_double(sample.joint_angles[i]);
    }
    for (int i = 0; i < 3; ++i) {
      s += ',';
      s += format_double(sample.joint_velocities[i]);
    }
  }
  return s;
}

ThrowOutcome simulate_throw(const PolicyVector& theta, const Task& task,
                            const SimContext& ctx) {
  ctx.arm.validate();
  ctx.dmp.validate();
  theta.validate(ctx.dmp);
  if (!std::isfinite(task.angle) || !task.surface_point.allFinite()) {
    throw ParameterDomainError("simulate_throw: non-finite task");
  }

  const ArmConfig& cfg = ctx.arm;
  const double dt = cfg.dt;
  const int horizon_steps =
      static_cast<int>(std::floor(cfg.horizon / dt + 1e-9));

  // The reference only matters up to the release instant; cap the
  // integration there instead of rolling the primitive out to the full
  // horizon.  Two extra steps absorb the sampled-phase comparison.
  double duration = cfg.horizon;
  if (const auto t_release = release_time(theta.release_phase, ctx.dmp)) {
    duration = std::min(cfg.horizon, *t_release + 2.0 * dt);
  }
  const double joint2_start = cfg.initial_angles[1];
  const DesiredTrajectory desired =
      integrate_dmp(theta, joint2_start, duration, ctx.dmp, dt);

  ArmState state;
  state.joint_angles = Eigen::Vector3d(
      cfg.initial_angles[0], cfg.initial_angles[1], cfg.initial_angles[2]);
  state.joint_velocities.setZero();
  state.dart_held = true;

  ThrowOutcome outcome;
  constexpr int kSampleEvery = 20;  // 20 ms diagnostic samples
  double integrator = 0.0;

  for (int step_index = 0; step_index <= horizon_steps; ++step_index) {
    const bool have_reference =
        step_index < static_cast<int>(desired.size());
    const double phase = have_reference
                             ? desired.phase[static_cast<std::size_t>(step_index)]
                             : 0.0;
    const bool release_now = have_reference &&
                             theta.release_phase > 0.0 &&
                             phase <= theta.release_phase;
    if (release_now) {
      state.dart_held = false;
      outcome.released = true;
      outcome.release_t = step_index * dt;
      outcome.release_state.position = tip_position(state.joint_angles, cfg);
      outcome.release_state.velocity =
          tip_velocity(state.joint_angles, state.joint_velocities, cfg);
      outcome.trajectory.push_back(state);
      break;
    }
    if (step_index % kSampleEvery == 0) outcome.trajectory.push_back(state);
    if (step_index == horizon_steps) break;

    const double ref_angle =
        have_reference ? desired.angle[static_cast<std::size_t>(step_index)]
                       : desired.angle.back();
    const double ref_velocity =
        have_reference ? desired.velocity[static_cast<std::size_t>(step_index)]
                       : 0.0;
    const PidOutput pid = pid_torque(ref_angle, ref_velocity, state,
                                     ctx.gains, integrator, dt);
    integrator = pid.integrator;
    state = step(state, pid.torque, cfg);
  }

  if (outcome.released) {
    outcome.landing_point = ballistic_impact(outcome.release_state, cfg);
    outcome.distance_to_target =
        (outcome.landing_point - task.surface_point).norm();
  } else {
    outcome.landing_point.setZero();
    outcome.distance_to_target = cfg.no_release_penalty;
    if (horizon_steps % kSampleEvery != 0) outcome.trajectory.push_back(state);
  }
  return outcome;
}

}  // namespace dartskill
