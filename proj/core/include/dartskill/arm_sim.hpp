#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

#include "dartskill/dmp.hpp"

namespace dartskill {

// Planar room cross-section with the arm base mid-air at the center (the
// arm hangs off the back wall of the room).  x runs right in [0, width],
// y runs up in [0, height]; gravity points along -y.
struct ArmConfig {
  std::array<double, 3> link_lengths{0.5, 0.4, 0.3};  // m
  std::array<double, 3> link_masses{2.0, 1.5, 1.0};   // kg, point mass at tip
  double gravity = 9.81;                              // m/s^2 downward
  std::array<double, 3> joint_damping{0.05, 0.0, 0.05};  // N*m*s/rad
  double torque_limit = 20.0;                         // N*m, actuated joint
  double dt = 1e-3;                                   // s
  double room_width = 4.0;                            // m
  double room_height = 3.0;                           // m
  Eigen::Vector2d base_position{2.0, 1.5};            // m, mid-height center
  std::array<double, 3> initial_angles{
      -1.5707963267948966, 0.0, 0.0};  // hanging straight down
  double horizon = 2.0;                // s per throw
  double no_release_penalty = 10.0;    // m, scored when the dart never leaves
  double reward_scale = 3.0;           // reward = exp(-scale * distance)

  void validate() const;  // throws ParameterDomainError
};

struct PidGains {
  double kp = 60.0;
  double ki = 0.0;
  double kd = 10.0;
};

// Target on the room boundary, named both ways: by bearing from the arm
// base (0 = toward the right wall at base height, pi/2 = straight up,
// pi = toward the left wall) and by the boundary point that bearing hits.
struct Task {
  double angle = 0.0;
  Eigen::Vector2d surface_point{0.0, 0.0};
};

// Casts the bearing ray from the base and intersects it with the upper
// room boundary (right wall above base, ceiling, left wall above base).
Task task_from_angle(double angle, const ArmConfig& cfg);

struct ArmState {
  Eigen::Vector3d joint_angles{0.0, 0.0, 0.0};
  Eigen::Vector3d joint_velocities{0.0, 0.0, 0.0};
  bool dart_held = true;
};

struct ReleaseState {
  Eigen::Vector2d position{0.0, 0.0};
  Eigen::Vector2d velocity{0.0, 0.0};
};

struct ThrowOutcome {
  Eigen::Vector2d landing_point{0.0, 0.0};
  double distance_to_target = 0.0;  // Euclidean, or the no-release penalty
  bool released = false;
  double release_t = 0.0;  // simulated seconds; meaningful when released
  ReleaseState release_state;
  std::vector<ArmState> trajectory;  // decimated samples for diagnostics
};

// Canonical text form of an outcome (decimal full-precision cells); the
// determinism contract is stated over these bytes.
std::string serialize_outcome(const ThrowOutcome& outcome);

// Everything a throw needs besides the policy and the task.
struct SimContext {
  ArmConfig arm;
  PidGains gains;
  DmpConstants dmp = DmpConstants::defaults();
};

// Forward kinematics of the dart (tip of link 3).
Eigen::Vector2d tip_position(const Eigen::Vector3d& joint_angles,
                             const ArmConfig& cfg);
Eigen::Vector2d tip_velocity(const Eigen::Vector3d& joint_angles,
                             const Eigen::Vector3d& joint_velocities,
                             const ArmConfig& cfg);

// One dt of rigid-body dynamics (RK4).  The torque acts on joint 2 only
// and is clamped to the configured limit; joints 1 and 3 feel only
// gravity and their viscous damping.
ArmState step(const ArmState& state, double torque, const ArmConfig& cfg);

// PID for the actuated joint; returns the raw (unclamped) torque and the
// advanced error integrator.
struct PidOutput {
  double torque = 0.0;
  double integrator = 0.0;
};
PidOutput pid_torque(double desired_angle, double desired_velocity,
                     const ArmState& state, const PidGains& gains,
                     double integrator, double dt);

// Drag-free flight from a release inside the room to the first boundary
// crossing of the parabolic path (closed form, no time stepping).
Eigen::Vector2d ballistic_impact(const ReleaseState& release,
                                 const ArmConfig& cfg);

// Full throw: integrate the primitive as joint 2's reference, track it
// with PID, release at the first sampled instant with phase <= the
// policy's release threshold, then fly the dart to the wall.
ThrowOutcome simulate_throw(const PolicyVector& theta, const Task& task,
                            const SimContext& ctx);

}  // namespace dartskill
