#include "fesilc/plant.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fesilc {

void ArmParams::validate() const {
  for (double v : {m_f, l_f1, l_f2, l_u1, l_u2, r1_milor, r2_malor, d1})
    if (!(v > 0.0)) throw std::invalid_argument("ArmParams: lengths and mass must be positive");
  if (!(gamma > 0.0 && gamma < std::numbers::pi))
    throw std::invalid_argument("ArmParams: gamma must lie in (0, pi)");
}

void MuscleParams::validate() const {
  if (!(w_n > 0.0)) throw std::invalid_argument("MuscleParams: w_n must be positive");
  if (!(epsilon > 0.0)) throw std::invalid_argument("MuscleParams: epsilon must be positive");
  if (!(a3 > 0.0)) throw std::invalid_argument("MuscleParams: a3 must be positive");
  if (!(a1 > 0.0 && a2 > 0.0)) throw std::invalid_argument("MuscleParams: a1 and a2 must be positive");
  if (!(theta_dot_max > 0.0 && l_max > 0.0))
    throw std::invalid_argument("MuscleParams: normalizers must be positive");
}

void PlantCoefficients::validate() const {
  if (!(inertial_sum > 0.0 && damping > 0.0))
    throw std::invalid_argument("PlantCoefficients: both coefficients must be positive");
}

double compute_b_a3(const ArmParams& p) {
  const double c = std::cos(p.gamma);
  const double denom = 1.0 - c * c * c * c;
  if (std::abs(denom) < 1e-12) throw std::domain_error("compute_b_a3: 1 - cos^4(gamma) is zero");
  const double trig = std::sin(p.gamma) / denom;
  return p.m_f * p.l_f1 * p.l_f1 + p.I_f + p.I_e * trig * trig;
}

TransferFunction build_plant(const PlantCoefficients& c) {
  c.validate();
  return {{1.0}, {c.inertial_sum, c.damping, 0.0}};
}

TransferFunction build_muscle_linear(const MuscleParams& mp) {
  if (!(mp.w_n > 0.0)) throw std::invalid_argument("build_muscle_linear: w_n must be positive");
  const double w2 = mp.w_n * mp.w_n;
  return {{w2}, {1.0, 2.0 * mp.w_n, w2}};
}

double h_irc(double u, const MuscleParams& mp) {
  // Rewritten with e^{-a2 u} for large u so the asymptote a1 is reached without overflow.
  const double x = mp.a2 * u;
  if (x > 50.0) {
    const double em = std::exp(-x);
    return mp.a1 * (1.0 - em) / (1.0 + mp.a3 * em);
  }
  const double e = std::exp(x);
  return mp.a1 * std::expm1(x) / (e + mp.a3);
}

double h_irc_inverse(double y, const MuscleParams& mp) {
  if (!(y >= 0.0 && y < mp.a1))
    throw std::out_of_range("h_irc_inverse: value " + std::to_string(y) + " outside [0, a1)");
  const double r = y / mp.a1;
  return std::log1p(r * mp.a3) / mp.a2 - std::log1p(-r) / mp.a2;
}

double f_ma(double theta_dot_norm) {
  return 0.54 * std::atan(5.69 * theta_dot_norm + 0.51) + 0.745;
}

double f_mp(double l_norm, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("f_mp: epsilon must be positive");
  const double z = (l_norm - 1.0) / epsilon;
  return std::exp(-z * z);
}

double verify_linearization(const MuscleParams& mp, std::span<const double> inputs, double ts,
                            const LinearizationOptions& options) {
  mp.validate();
  for (std::size_t i = 0; i < inputs.size(); ++i)
    if (!(inputs[i] >= 0.0 && inputs[i] < mp.a1))
      throw std::out_of_range("verify_linearization: input " + std::to_string(i) +
                              " outside the invertible recruitment range [0, a1)");

  const DiscreteSystem lad = discretize_zoh(to_state_space(build_muscle_linear(mp)), ts);
  const DiscreteSystem arm = discretize_zoh(to_state_space(build_plant(options.plant)), ts);
  DiscreteStepper reference(lad);
  DiscreteStepper activation(lad);
  DiscreteStepper elbow(arm);

  const double passive = f_mp(options.normalized_length, mp.epsilon);
  double prev_angle = 0.0;
  double velocity_norm = 0.0;
  double worst = 0.0;
  for (double w : inputs) {
    const double recruited = options.compensate ? h_irc(h_irc_inverse(w, mp), mp) : h_irc(w, mp);
    const double act = activation.step(recruited);

    const double fv = f_ma(velocity_norm);
    double torque;
    if (options.compensate) {
      if (std::abs(fv) < 1e-12) throw std::domain_error("verify_linearization: F_ma is not invertible");
      torque = ((act / fv) * fv + passive) - passive;
    } else {
      torque = act * fv + passive;
    }

    worst = std::max(worst, std::abs(torque - reference.step(w)));

    const double angle = elbow.step(torque);
    velocity_norm = (angle - prev_angle) / ts / mp.theta_dot_max;
    prev_angle = angle;
  }
  return worst;
}

}  // namespace fesilc
