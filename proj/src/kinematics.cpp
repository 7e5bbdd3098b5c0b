#include "fesilc/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fesilc {

namespace {
constexpr double kSingularSine = 1e-6;
}

std::vector<double> TaskTrajectory::displacement() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.r_d);
  return out;
}

std::vector<double> TaskTrajectory::times() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.t);
  return out;
}

double line_magnitude(Point2 p1, Point2 p2) { return std::hypot(p2.x - p1.x, p2.y - p1.y); }

double line_orientation(double d, double l) { return std::atan(d / l); }

TaskTrajectory line_trajectory(Point2 p1, Point2 p2, double duration, double ts, TimeProfile profile) {
  if (!(duration > 0.0) || !(ts > 0.0))
    throw std::invalid_argument("line_trajectory: duration and Ts must be positive");
  const double steps = duration / ts;
  const double n = std::round(steps);
  if (std::abs(steps - n) > 1e-9 * std::max(1.0, steps))
    throw std::invalid_argument("line_trajectory: duration is not an integer multiple of Ts");

  TaskTrajectory traj;
  traj.Ts = ts;
  traj.origin = p1;
  traj.magnitude = line_magnitude(p1, p2);
  if (traj.magnitude > 0.0)
    traj.direction = {(p2.x - p1.x) / traj.magnitude, (p2.y - p1.y) / traj.magnitude};

  const auto count = static_cast<std::size_t>(n) + 1;
  traj.samples.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double tau = static_cast<double>(k) / n;
    const double shape = profile == TimeProfile::Ramp ? tau : tau * tau * (3.0 - 2.0 * tau);
    const double r = traj.magnitude * shape;
    traj.samples.push_back({static_cast<double>(k) * ts, r, p1.x + r * traj.direction.x,
                            p1.y + r * traj.direction.y});
  }
  return traj;
}

ArmKinematics ArmKinematics::from_arm(const ArmParams& arm, Point2 line_origin, double line_angle) {
  ArmKinematics kin;
  kin.l_u = arm.upper_arm_length();
  kin.l_f = arm.forearm_length();
  kin.line_origin = line_origin;
  kin.shoulder_base = {line_origin.x - arm.d1, line_origin.y};
  kin.line_angle = line_angle;
  return kin;
}

Point2 ArmKinematics::line_direction() const { return {std::cos(line_angle), std::sin(line_angle)}; }

void ArmKinematics::validate() const {
  if (!(l_u > 0.0 && l_f > 0.0)) throw std::invalid_argument("ArmKinematics: link lengths must be positive");
}

Point2 forward_kinematics(const ArmKinematics& kin, double theta_u, double theta_f) {
  return {kin.shoulder_base.x + kin.l_u * std::cos(theta_u) + kin.l_f * std::cos(theta_u + theta_f),
          kin.shoulder_base.y + kin.l_u * std::sin(theta_u) + kin.l_f * std::sin(theta_u + theta_f)};
}

JointAngles inverse_kinematics(const ArmKinematics& kin, double x, double y) {
  const double px = x - kin.shoulder_base.x;
  const double py = y - kin.shoulder_base.y;
  const double r2 = px * px + py * py;
  const double reach = kin.l_u + kin.l_f;
  const double inner = std::abs(kin.l_u - kin.l_f);
  // Boundary points are accepted with a small slack so the straight and
  // folded poses remain representable.
  const double slack = 1e-12 * reach;
  const double r = std::sqrt(r2);
  if (r > reach + slack || r < inner - slack)
    throw KinematicsError("inverse_kinematics: point outside the reachable annulus");

  const double c = std::clamp((r2 - kin.l_u * kin.l_u - kin.l_f * kin.l_f) / (2.0 * kin.l_u * kin.l_f), -1.0, 1.0);
  JointAngles q;
  q.theta_f = std::acos(c);
  q.theta_u = std::atan2(py, px) - std::atan2(kin.l_f * std::sin(q.theta_f), kin.l_u + kin.l_f * c);
  return q;
}

std::array<double, 4> jacobian(const ArmKinematics& kin, double theta_u, double theta_f) {
  const double su = std::sin(theta_u), cu = std::cos(theta_u);
  const double suf = std::sin(theta_u + theta_f), cuf = std::cos(theta_u + theta_f);
  return {-kin.l_u * su - kin.l_f * suf, -kin.l_f * suf,  //
          kin.l_u * cu + kin.l_f * cuf, kin.l_f * cuf};
}

double line_displacement_for_elbow(const ArmKinematics& kin, double theta_f) {
  const double reach2 = kin.l_u * kin.l_u + kin.l_f * kin.l_f + 2.0 * kin.l_u * kin.l_f * std::cos(theta_f);
  const Point2 d = kin.line_direction();
  const double ox = kin.line_origin.x - kin.shoulder_base.x;
  const double oy = kin.line_origin.y - kin.shoulder_base.y;
  // |o + s d - shoulder|^2 = reach^2, taking the root ahead of the closest approach.
  const double b = d.x * ox + d.y * oy;
  const double c = ox * ox + oy * oy - reach2;
  const double disc = b * b - c;
  if (disc < 0.0) throw KinematicsError("line_displacement_for_elbow: elbow angle does not reach the task line");
  if (std::sqrt(disc) < 1e-9)
    throw KinematicsError("line_displacement_for_elbow: line is tangent to the reach circle");
  return -b + std::sqrt(disc);
}

std::vector<double> differentiate(std::span<const double> signal, double ts) {
  if (signal.size() < 2) throw std::invalid_argument("differentiate: need at least two samples");
  std::vector<double> out(signal.size(), 0.0);
  for (std::size_t k = 1; k < signal.size(); ++k) out[k] = (signal[k] - signal[k - 1]) / ts;
  return out;
}

double VelocityProfile::max() const {
  return r_dot.empty() ? 0.0 : *std::max_element(r_dot.begin(), r_dot.end());
}

VelocityProfile resultant_velocity(const ArmKinematics& kin, std::span<const double> theta_f, double ts) {
  if (theta_f.size() < 2) throw std::invalid_argument("resultant_velocity: need at least two samples");
  kin.validate();
  const std::size_t n = theta_f.size();
  const Point2 d = kin.line_direction();

  std::vector<double> theta_u(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(std::sin(theta_f[k])) < kSingularSine)
      throw KinematicsError("resultant_velocity: singular arm configuration", static_cast<std::ptrdiff_t>(k));
    double s;
    try {
      s = line_displacement_for_elbow(kin, theta_f[k]);
    } catch (const KinematicsError& e) {
      throw KinematicsError(e.what(), static_cast<std::ptrdiff_t>(k));
    }
    const JointAngles q = inverse_kinematics(kin, kin.line_origin.x + s * d.x, kin.line_origin.y + s * d.y);
    theta_u[k] = q.theta_u;
    // unwrap
    if (k > 0) theta_u[k] -= 2.0 * std::numbers::pi * std::round((theta_u[k] - theta_u[k - 1]) / (2.0 * std::numbers::pi));
  }

  const auto du = differentiate(theta_u, ts);
  const auto df = differentiate(theta_f, ts);
  VelocityProfile out;
  out.t.resize(n);
  out.r_dot.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto J = jacobian(kin, theta_u[k], theta_f[k]);
    const double vx = J[0] * du[k] + J[1] * df[k];
    const double vy = J[2] * du[k] + J[3] * df[k];
    out.t[k] = static_cast<double>(k) * ts;
    out.r_dot[k] = std::hypot(vx, vy);
  }
  return out;
}

}  // namespace fesilc
