#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fesilc/plant.hpp"

namespace fesilc {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

enum class TimeProfile { Ramp, Smoothstep };

struct TrajectorySample {
  double t = 0.0;    // s
  double r_d = 0.0;  // displacement along the line, m
  double x = 0.0;    // m
  double y = 0.0;    // m
};

struct TaskTrajectory {
  double Ts = 0.0;
  Point2 origin{};
  Point2 direction{1.0, 0.0};  // unit vector toward the end point
  double magnitude = 0.0;
  std::vector<TrajectorySample> samples;

  std::vector<double> displacement() const;
  std::vector<double> times() const;
};

/// Euclidean distance between the end points.
double line_magnitude(Point2 p1, Point2 p2);

/// Orientation of a line offset `d` over a run `l`: atan(d / l).
double line_orientation(double d, double l);

/**
 * Straight point-to-point reference sampled every `ts` seconds.
 *
 * Produces duration/ts + 1 samples with r_d rising from 0 to the line
 * magnitude under the chosen time profile. Coincident end points are allowed
 * and give an all-zero displacement. Throws std::invalid_argument if the
 * duration is not an integer multiple of ts (within 1e-9).
 */
TaskTrajectory line_trajectory(Point2 p1, Point2 p2, double duration, double ts,
                               TimeProfile profile = TimeProfile::Ramp);

/// Raised when a requested configuration cannot be reached or is singular.
class KinematicsError : public std::runtime_error {
 public:
  KinematicsError(const std::string& what, std::ptrdiff_t sample = -1)
      : std::runtime_error(what), sample_(sample) {}
  /// Offending sample index, or -1 when not tied to a series.
  std::ptrdiff_t sample() const { return sample_; }

 private:
  std::ptrdiff_t sample_;
};

/// Planar shoulder-elbow arm whose hand is kept on a task line.
struct ArmKinematics {
  double l_u = 0.308;  // upper arm, m
  double l_f = 0.406;  // forearm, m
  Point2 shoulder_base{-0.2, 0.0};
  Point2 line_origin{0.0, 0.0};
  double line_angle = 0.7853981633974483;  // rad

  /// Upper-arm and forearm lengths from `arm`; shoulder placed d1 behind the
  /// line origin along -x.
  static ArmKinematics from_arm(const ArmParams& arm, Point2 line_origin, double line_angle);

  Point2 line_direction() const;
  void validate() const;
};

struct JointAngles {
  double theta_u = 0.0;  // shoulder, rad
  double theta_f = 0.0;  // elbow, rad (0 = straight arm)
};

Point2 forward_kinematics(const ArmKinematics& kin, double theta_u, double theta_f);
/// Solution with theta_f in [0, pi]. Throws KinematicsError outside the annulus.
JointAngles inverse_kinematics(const ArmKinematics& kin, double x, double y);

/// 2x2 hand Jacobian d(x, y)/d(theta_u, theta_f), row-major.
std::array<double, 4> jacobian(const ArmKinematics& kin, double theta_u, double theta_f);

/// Point on the task line, ahead of the closest approach to the shoulder, at
/// which the elbow angle equals `theta_f`; returned as displacement from the
/// line origin.
double line_displacement_for_elbow(const ArmKinematics& kin, double theta_f);

/// Backward difference (s[k] - s[k-1]) / ts with a leading zero.
std::vector<double> differentiate(std::span<const double> signal, double ts);

struct VelocityProfile {
  std::vector<double> t;
  std::vector<double> r_dot;  // m/s

  double max() const;
};

/**
 * Resultant hand speed for an elbow-angle series with the hand held on the
 * task line.
 *
 * The shoulder angle at each sample is the inverse-kinematics solution for the
 * line point implied by the elbow angle; both joint rates come from
 * differentiate() and are mapped through the Jacobian. Throws KinematicsError
 * with the sample index at a singular configuration.
 */
VelocityProfile resultant_velocity(const ArmKinematics& kin, std::span<const double> theta_f, double ts);

}  // namespace fesilc
