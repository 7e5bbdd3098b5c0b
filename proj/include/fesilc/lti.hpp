#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace fesilc {

/// Polynomial coefficients in descending powers of s.
using Polynomial = std::vector<double>;

Polynomial poly_multiply(const Polynomial& a, const Polynomial& b);
/// Sum with the shorter operand aligned on the constant term.
Polynomial poly_add(const Polynomial& a, const Polynomial& b);
std::complex<double> poly_evaluate(const Polynomial& p, std::complex<double> s);

/**
 * Continuous-time SISO transfer function num(s)/den(s).
 *
 * Leading zeros of the numerator are dropped on construction. The denominator
 * must have a nonzero leading coefficient and the ratio must be proper.
 */
class TransferFunction {
 public:
  TransferFunction(Polynomial num, Polynomial den);

  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }
  int order() const { return static_cast<int>(den_.size()) - 1; }

  std::complex<double> evaluate(std::complex<double> s) const;
  std::complex<double> frequency_response(double omega) const {
    return evaluate({0.0, omega});
  }
  /// Value at s = 0; infinite when den(0) = 0.
  double dc_gain() const;

 private:
  Polynomial num_;
  Polynomial den_;
};

TransferFunction series(const TransferFunction& a, const TransferFunction& b);
/// forward / (1 + forward), no pole-zero cancellation.
TransferFunction feedback_unity(const TransferFunction& forward);

struct StateSpace {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;  // n x 1
  Eigen::MatrixXd C;  // 1 x n
  double D = 0.0;

  int states() const { return static_cast<int>(A.rows()); }
  std::complex<double> frequency_response(double omega) const;
};

/// Controllable canonical realization.
StateSpace to_state_space(const TransferFunction& tf);

/// Cascade: the output of `first` drives `second`. The state vector is
/// [x_first; x_second].
StateSpace series(const StateSpace& first, const StateSpace& second);

struct DiscreteSystem {
  Eigen::MatrixXd Ad;
  Eigen::MatrixXd Bd;
  Eigen::MatrixXd Cd;
  double Dd = 0.0;
  double Ts = 0.0;

  int states() const { return static_cast<int>(Ad.rows()); }
  /// State reached after holding a constant input forever; requires no pole
  /// at z = 1.
  Eigen::VectorXd steady_state(double u) const;
};

/// Matrix exponential by scaling and squaring a truncated Taylor series.
Eigen::MatrixXd expm(const Eigen::MatrixXd& m, double tolerance = 1e-12);

/// Zero-order-hold discretization via the exponential of [A B; 0 0].
DiscreteSystem discretize_zoh(const StateSpace& ss, double ts);
/// Bilinear (Tustin) discretization.
DiscreteSystem discretize_tustin(const StateSpace& ss, double ts);

/// Sample-by-sample runner of a DiscreteSystem.
class DiscreteStepper {
 public:
  explicit DiscreteStepper(DiscreteSystem sys);
  DiscreteStepper(DiscreteSystem sys, Eigen::VectorXd x0);

  /// Output for the current state when `u` is applied (y = Cx + Du).
  double output(double u = 0.0) const;
  /// Returns y[k] and advances x[k] -> x[k+1].
  double step(double u);

  const Eigen::VectorXd& state() const { return x_; }
  void set_state(const Eigen::VectorXd& x);
  void reset() { x_.setZero(); }
  const DiscreteSystem& system() const { return sys_; }

 private:
  DiscreteSystem sys_;
  Eigen::VectorXd x_;
};

/// y[k] = Cd x[k] + Dd u[k]; x[k+1] = Ad x[k] + Bd u[k].
std::vector<double> simulate(const DiscreteSystem& dsys, std::span<const double> input,
                             const Eigen::VectorXd& x0);
std::vector<double> simulate(const DiscreteSystem& dsys, std::span<const double> input);

struct FrequencyPoint {
  double omega = 0.0;      // rad/s
  double magnitude = 0.0;  // absolute gain
  double phase = 0.0;      // rad
};

std::vector<FrequencyPoint> bode(const TransferFunction& tf, std::span<const double> omegas);
/// Log-spaced grid including both endpoints.
std::vector<double> logspace(double lo, double hi, int count);

/**
 * Smallest frequency where |tf(jw)| falls to |tf(0)|/sqrt(2).
 *
 * Scans 400 points per decade over [1e-3, 1e4] rad/s, then bisects the first
 * bracketing interval to 1e-6 rad/s. Throws std::domain_error if the DC gain
 * is zero or infinite, or if no crossing exists in the scan range.
 */
double bandwidth_3db(const TransferFunction& tf);

}  // namespace fesilc
