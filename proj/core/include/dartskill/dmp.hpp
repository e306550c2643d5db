#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

namespace dartskill {

// Constants of the dynamic movement primitive that shapes the throwing
// motion of the actuated joint.  The transformation system is a critically
// damped spring-damper toward `goal`, modulated by a learned forcing term:
//
//   temporal_scale * s'    = -phase_decay * s
//   temporal_scale * x'    = v
//   temporal_scale * v'    = spring_constant * (goal - x) - damping * v
//                            + (goal - start) * forcing(s)
//
// The phase s runs from 1 toward 0; the forcing term is a normalized mix
// of Gaussian bumps in s, so it fades out as the motion completes and the
// spring guarantees convergence to the goal.
struct DmpConstants {
  double spring_constant = 100.0;
  double damping = 20.0;  // 2*sqrt(spring_constant): critically damped
  double temporal_scale = 1.0;
  double phase_decay = 4.0;
  Eigen::VectorXd centers;  // basis centers in phase, strictly decreasing
  Eigen::VectorXd widths;   // basis inverse squared widths, positive

  int num_bases() const { return static_cast<int>(centers.size()); }

  // Layout used throughout: `count` centers equally spaced in time across
  // one temporal_scale unit, so c_i = exp(-phase_decay*(i-1)/(count-1)),
  // with widths chosen so each bump decays to 1/2 at the midpoint toward
  // its neighbor.  The last basis reuses its predecessor's width.
  static DmpConstants defaults(int count = 35);

  void validate() const;  // throws ParameterDomainError
};

// A complete throw, as a flat learnable parameter vector:
//   [0]      release_phase: phase threshold at which the dart leaves the
//            hand (s <= release_phase); 0 means "never release"
//   [1]      goal: resting joint angle the spring pulls toward
//   [2..]    weights: forcing-term basis weights
struct PolicyVector {
  static constexpr int kReleaseIndex = 0;
  static constexpr int kGoalIndex = 1;
  static constexpr int kWeightOffset = 2;

  double release_phase = 0.5;
  double goal = 0.0;
  Eigen::VectorXd weights;

  int dimension() const { return kWeightOffset + static_cast<int>(weights.size()); }

  Eigen::VectorXd flatten() const;
  static PolicyVector from_flat(const Eigen::VectorXd& flat);

  bool all_finite() const;
  void validate(const DmpConstants& constants) const;
};

// Reference motion of the actuated joint, sampled on a fixed time grid.
struct DesiredTrajectory {
  std::vector<double> time;
  std::vector<double> phase;
  std::vector<double> angle;
  std::vector<double> velocity;  // time derivative of angle

  std::size_t size() const { return time.size(); }
};

// Phase at time t: s(t) = exp(-phase_decay * t / temporal_scale).
double canonical_phase(double t, const DmpConstants& constants);

// First time at which s(t) <= release_phase, or nullopt when the phase
// never gets there (release_phase <= 0).  Thresholds >= 1 release at t=0.
std::optional<double> release_time(double release_phase,
                                   const DmpConstants& constants);

// Normalized radial-basis mix sum(w_i psi_i(s)) / sum(psi_i(s)) with
// psi_i(s) = exp(-widths_i * (s - centers_i)^2).  Evaluated in shifted
// form so the ratio stays exact even where every bump is tiny; returns 0
// only when the absolute activation underflows double entirely.
double forcing(double s, const Eigen::VectorXd& weights,
               const DmpConstants& constants);

// Integrates the primitive from rest at start_angle for `duration`
// seconds with fixed-step RK4, sampling every `dt`.  The returned grid
// has floor(duration/dt)+1 points including t=0.
DesiredTrajectory integrate_dmp(const PolicyVector& policy,
                                double start_angle, double duration,
                                const DmpConstants& constants, double dt);

}  // namespace dartskill
