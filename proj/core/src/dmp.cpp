#include "dartskill/dmp.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "dartskill/errors.hpp"

namespace dartskill {

DmpConstants DmpConstants::defaults(int count) {
  if (count < 2) {
    throw ParameterDomainError("DmpConstants: need at least 2 bases");
  }
  DmpConstants c;
  c.centers.resize(count);
  c.widths.resize(count);
  for (int i = 0; i < count; ++i) {
    const double t_frac = static_cast<double>(i) / (count - 1);
    c.centers[i] = std::exp(-c.phase_decay * t_frac);
  }
  // exp(-w * (gap/2)^2) = 1/2  =>  w = 4*ln2 / gap^2
  constexpr double four_ln2 = 2.772588722239781;
  for (int i = 0; i + 1 < count; ++i) {
    const double gap = c.centers[i] - c.centers[i + 1];
    c.widths[i] = four_ln2 / (gap * gap);
  }
  c.widths[count - 1] = c.widths[count - 2];
  return c;
}

void DmpConstants::validate() const {
  if (!(spring_constant > 0.0) || !(damping > 0.0) ||
      !(temporal_scale > 0.0) || !(phase_decay > 0.0)) {
    throw ParameterDomainError(
        "DmpConstants: spring, damping, temporal_scale and phase_decay "
        "must be positive");
  }
  if (centers.size() < 2 || widths.size() != centers.size()) {
    throw ParameterDomainError(
        "DmpConstants: need >= 2 centers and matching widths");
  }
  for (int i = 0; i < centers.size(); ++i) {
    if (!std::isfinite(centers[i]) || centers[i] <= 0.0 ||
        centers[i] > 1.0) {
      throw ParameterDomainError("DmpConstants: centers must lie in (0, 1]");
    }
    if (i > 0 && centers[i] >= centers[i - 1]) {
      throw ParameterDomainError(
          "DmpConstants: centers must be strictly decreasing");
    }
    if (!std::isfinite(widths[i]) || widths[i] <= 0.0) {
      throw ParameterDomainError("DmpConstants: widths must be positive");
    }
  }
}

Eigen::VectorXd PolicyVector::flatten() const {
  Eigen::VectorXd flat(dimension());
  flat[kReleaseIndex] = release_phase;
  flat[kGoalIndex] = goal;
  flat.segment(kWeightOffset, weights.size()) = weights;
  return flat;
}

PolicyVector PolicyVector::from_flat(const Eigen::VectorXd& flat) {
  if (flat.size() < kWeightOffset + 1) {
    throw ParameterDomainError(
        "PolicyVector: flat vector needs release, goal and >= 1 weight");
  }
  PolicyVector p;
  p.release_phase = flat[kReleaseIndex];
  p.goal = flat[kGoalIndex];
  p.weights = flat.segment(kWeightOffset, flat.size() - kWeightOffset);
  return p;
}

bool PolicyVector::all_finite() const {
  return std::isfinite(release_phase) && std::isfinite(goal) &&
         weights.allFinite();
}

void PolicyVector::validate(const DmpConstants& constants) const {
  if (!all_finite()) {
    throw ParameterDomainError("PolicyVector: non-finite entries");
  }
  if (release_phase < 0.0 || release_phase > 1.0) {
    throw ParameterDomainError("PolicyVector: release_phase " +
                               std::to_string(release_phase) +
                               " outside [0, 1]");
  }
  if (weights.size() != constants.num_bases()) {
    throw ParameterDomainError("PolicyVector: weight count " +
                               std::to_string(weights.size()) +
                               " != basis count " +
                               std::to_string(constants.num_bases()));
  }
}

double canonical_phase(double t, const DmpConstants& constants) {
  return std::exp(-constants.phase_decay * t / constants.temporal_scale);
}

std::optional<double> release_time(double release_phase,
                                   const DmpConstants& constants) {
  if (release_phase <= 0.0) return std::nullopt;
  if (release_phase >= 1.0) return 0.0;
  return constants.temporal_scale / constants.phase_decay *
         std::log(1.0 / release_phase);
}

double forcing(double s, const Eigen::VectorXd& weights,
               const DmpConstants& constants) {
  const int n = constants.num_bases();
  if (weights.size() != n) {
    throw ParameterDomainError("forcing: weight/basis count mismatch");
  }
  // Work with exponents shifted by their minimum so the dominant bump has
  // activation exactly 1; bumps more than e^-40 below it cannot move the
  // ratio at double precision and are skipped.
  double min_exponent = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double d = s - constants.centers[i];
    const double e = constants.widths[i] * d * d;
    if (e < min_exponent) min_exponent = e;
  }
  // exp(-745) is below the smallest subnormal double: all activations are
  // true zeros and the mix is defined to vanish with them.
  if (min_exponent > 745.0) return 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = s - constants.centers[i];
    const double e = constants.widths[i] * d * d - min_exponent;
    if (e > 40.0) continue;
    const double psi = std::exp(-e);
    numerator += weights[i] * psi;
    denominator += psi;
  }
  return numerator / denominator;
}

DesiredTrajectory integrate_dmp(const PolicyVector& policy,
                                double start_angle, double duration,
                                const DmpConstants& constants, double dt) {
  constants.validate();
  policy.validate(constants);
  if (!(duration >= 0.0) || !(dt > 0.0)) {
    throw ParameterDomainError(
        "integrate_dmp: duration must be >= 0 and dt > 0");
  }

  const double inv_scale = 1.0 / constants.temporal_scale;
  const double amplitude = policy.goal - start_angle;
  // State y = (x, v, s); scaled derivatives per the header equations.
  const auto derivative = [&](const double y[3], double out[3]) {
    const double f = forcing(y[2], policy.weights, constants);
    out[0] = y[1] * inv_scale;
    out[1] = (constants.spring_constant * (policy.goal - y[0]) -
              constants.damping * y[1] + amplitude * f) *
             inv_scale;
    out[2] = -constants.phase_decay * y[2] * inv_scale;
  };

  const int steps = static_cast<int>(std::floor(duration / dt + 1e-9));
  DesiredTrajectory traj;
  traj.time.reserve(steps + 1);
  traj.phase.reserve(steps + 1);
  traj.angle.reserve(steps + 1);
  traj.velocity.reserve(steps + 1);

  double y[3] = {start_angle, 0.0, 1.0};
  for (int step = 0; step <= steps; ++step) {
    traj.time.push_back(step * dt);
    traj.phase.push_back(y[2]);
    traj.angle.push_back(y[0]);
    traj.velocity.push_back(y[1] * inv_scale);
    if (step == steps) break;

    double k1[3], k2[3], k3[3], k4[3], probe[3];
    derivative(y, k1);
    for (int i = 0; i < 3; ++i) probe[i] = y[i] + 0.5 * dt * k1[i];
    derivative(probe, k2);
    for (int i = 0; i < 3; ++i) probe[i] = y[i] + 0.5 * dt * k2[i];
    derivative(probe, k3);
    for (int i = 0; i < 3; ++i) probe[i] = y[i] + dt * k3[i];
    derivative(probe, k4);
    for (int i = 0; i < 3; ++i) {
      y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  }
  return traj;
}

}  // namespace dartskill
