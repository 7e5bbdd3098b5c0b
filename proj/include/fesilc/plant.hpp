#pragma once

#include <span>

#include "fesilc/lti.hpp"

namespace fesilc {

/// Anthropometric arm parameters. Defaults are the reference subject.
struct ArmParams {
  double m_f = 0.84;        // forearm mass, kg
  double l_f1 = 0.203;      // olecranon to forearm centre of gravity, m
  double l_f2 = 0.203;      // forearm centre of gravity to thumb web, m
  double l_u1 = 0.154;      // shoulder to upper-arm centre of gravity, m
  double l_u2 = 0.154;      // upper-arm centre of gravity to olecranon, m
  double I_f = 0.12;        // forearm inertia (units as published)
  double I_e = 0.15;        // forearm moment (units as published)
  double gamma = 1.0472;    // constrained forearm elevation, rad
  double r2_malor = 0.3;    // maximum length of reach, m
  double r1_milor = 0.1;    // minimum length of reach, m
  double phi = 0.6109;      // task-space orientation, rad
  double d1 = 0.2;          // horizontal distance from the body, m

  double forearm_length() const { return l_f1 + l_f2; }
  double upper_arm_length() const { return l_u1 + l_u2; }
  /// Throws std::invalid_argument on non-positive lengths/mass or gamma outside (0, pi).
  void validate() const;
};

/// Hammerstein/Hill muscle parameters. Only w_n shapes the linearized model;
/// the static-curve constants matter for the cancellation check alone.
struct MuscleParams {
  double a1 = 1.0;
  double a2 = 2.0;
  double a3 = 1.0;
  double w_n = 2.6700187265260893;  // sqrt(7.129) rad/s
  double epsilon = 0.5;
  double theta_dot_max = 3.141592653589793;  // rad/s
  double l_max = 0.406;                      // m, l_f1 + l_f2

  void validate() const;
};

/// Composite second-order arm-robot coefficients: inertial (b_a3 + K_M2) and
/// damping (K_B2) terms.
struct PlantCoefficients {
  double inertial_sum = 0.5571;
  double damping = 5.78;

  void validate() const;
};

/**
 * Effective forearm inertia term
 *   m_f l_f1^2 + I_f + I_e (sin g / (1 - cos^2 g cos^2 g))^2.
 *
 * The trigonometric factor is evaluated exactly as published (cos^4 in the
 * denominator). Throws std::domain_error when 1 - cos^4(gamma) vanishes.
 */
double compute_b_a3(const ArmParams& p);

/// Type-1 plant 1 / (inertial_sum s^2 + damping s); output is elbow displacement.
TransferFunction build_plant(const PlantCoefficients& c);

/// Critically damped activation dynamics w_n^2 / (s^2 + 2 w_n s + w_n^2).
TransferFunction build_muscle_linear(const MuscleParams& mp);

/// Isometric recruitment curve a1 (e^{a2 u} - 1) / (e^{a2 u} + a3).
double h_irc(double u, const MuscleParams& mp);
/// Closed-form inverse of h_irc on [0, a1). Throws std::out_of_range otherwise.
double h_irc_inverse(double y, const MuscleParams& mp);
/// Force-velocity factor 0.54 atan(5.69 v + 0.51) + 0.745, v normalized.
double f_ma(double theta_dot_norm);
/// Passive force-length factor exp(-((l - 1) / epsilon)^2), l normalized.
double f_mp(double l_norm, double epsilon);

struct LinearizationOptions {
  /// When false the compensating inverse blocks are left out (negative control).
  bool compensate = true;
  double normalized_length = 1.0;
  PlantCoefficients plant{};
};

/**
 * Runs the nonlinear muscle chain with its inverse-dynamics compensators and
 * returns max |compensated torque - H_lad(input)| over the series.
 *
 * Per sample: the command passes through h_irc_inverse then h_irc, the
 * activation dynamics are stepped (ZOH), the result is divided by F_ma and
 * multiplied by the physical F_ma, then F_mp is added by the passive element
 * and removed by its compensator. F_ma uses the elbow velocity of the previous
 * sample, obtained by driving the plant with the resulting torque.
 *
 * Throws std::out_of_range if an input lies outside [0, a1) and
 * std::domain_error if F_ma reaches a non-invertible value.
 */
double verify_linearization(const MuscleParams& mp, std::span<const double> inputs, double ts,
                            const LinearizationOptions& options = {});

}  // namespace fesilc
