#include "fesilc/lti.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fesilc {

namespace {

Polynomial strip_leading_zeros(Polynomial p) {
  auto first = std::find_if(p.begin(), p.end(), [](double c) { return c != 0.0; });
  if (first == p.end()) return {0.0};
  p.erase(p.begin(), first);
  return p;
}

bool is_zero_poly(const Polynomial& p) {
  return std::all_of(p.begin(), p.end(), [](double c) { return c == 0.0; });
}

}  // namespace

Polynomial poly_multiply(const Polynomial& a, const Polynomial& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("poly_multiply: empty polynomial");
  Polynomial out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

Polynomial poly_add(const Polynomial& a, const Polynomial& b) {
  Polynomial out(std::max(a.size(), b.size()), 0.0);
  const std::size_t oa = out.size() - a.size();
  const std::size_t ob = out.size() - b.size();
  for (std::size_t i = 0; i < a.size(); ++i) out[oa + i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[ob + i] += b[i];
  return out;
}

std::complex<double> poly_evaluate(const Polynomial& p, std::complex<double> s) {
  std::complex<double> acc = 0.0;
  for (double c : p) acc = acc * s + c;
  return acc;
}

TransferFunction::TransferFunction(Polynomial num, Polynomial den)
    : num_(strip_leading_zeros(std::move(num))), den_(std::move(den)) {
  if (den_.empty()) throw std::invalid_argument("TransferFunction: empty denominator");
  if (den_.front() == 0.0)
    throw std::invalid_argument("TransferFunction: leading denominator coefficient is zero");
  if (num_.size() > den_.size())
    throw std::invalid_argument("TransferFunction: improper (numerator degree exceeds denominator)");
}

std::complex<double> TransferFunction::evaluate(std::complex<double> s) const {
  return poly_evaluate(num_, s) / poly_evaluate(den_, s);
}

double TransferFunction::dc_gain() const {
  const double d0 = den_.back();
  const double n0 = num_.back();
  if (d0 == 0.0) return n0 == 0.0 ? std::nan("") : INFINITY;
  return n0 / d0;
}

TransferFunction series(const TransferFunction& a, const TransferFunction& b) {
  return {poly_multiply(a.num(), b.num()), poly_multiply(a.den(), b.den())};
}

TransferFunction feedback_unity(const TransferFunction& forward) {
  Polynomial den = poly_add(forward.den(), forward.num());
  if (is_zero_poly(den)) throw std::domain_error("feedback_unity: closed-loop denominator is identically zero");
  den = strip_leading_zeros(std::move(den));
  return {forward.num(), std::move(den)};
}

std::complex<double> StateSpace::frequency_response(double omega) const {
  const int n = states();
  if (n == 0) return D;
  using CMat = Eigen::MatrixXcd;
  CMat m = std::complex<double>(0.0, omega) * CMat::Identity(n, n) - A.cast<std::complex<double>>();
  Eigen::VectorXcd x = m.partialPivLu().solve(B.cast<std::complex<double>>());
  return (C.cast<std::complex<double>>() * x)(0, 0) + D;
}

StateSpace to_state_space(const TransferFunction& tf) {
  const int n = tf.order();
  const double lead = tf.den().front();
  // Monic denominator s^n + a1 s^(n-1) + ... + an, numerator padded to n+1 terms.
  std::vector<double> a(n + 1), b(n + 1, 0.0);
  for (int i = 0; i <= n; ++i) a[i] = tf.den()[i] / lead;
  const auto& num = tf.num();
  const std::size_t off = b.size() - num.size();
  for (std::size_t i = 0; i < num.size(); ++i) b[off + i] = num[i] / lead;

  StateSpace ss;
  ss.D = b[0];
  ss.A = Eigen::MatrixXd::Zero(n, n);
  ss.B = Eigen::MatrixXd::Zero(n, 1);
  ss.C = Eigen::MatrixXd::Zero(1, n);
  if (n == 0) return ss;
  for (int j = 0; j < n; ++j) {
    ss.A(0, j) = -a[j + 1];
    ss.C(0, j) = b[j + 1] - a[j + 1] * b[0];
  }
  for (int i = 1; i < n; ++i) ss.A(i, i - 1) = 1.0;
  ss.B(0, 0) = 1.0;
  return ss;
}

StateSpace series(const StateSpace& first, const StateSpace& second) {
  const int n1 = first.states();
  const int n2 = second.states();
  StateSpace out;
  out.A = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
  out.A.topLeftCorner(n1, n1) = first.A;
  out.A.bottomLeftCorner(n2, n1) = second.B * first.C;
  out.A.bottomRightCorner(n2, n2) = second.A;
  out.B = Eigen::MatrixXd::Zero(n1 + n2, 1);
  out.B.topRows(n1) = first.B;
  out.B.bottomRows(n2) = second.B * first.D;
  out.C = Eigen::MatrixXd::Zero(1, n1 + n2);
  out.C.leftCols(n1) = second.D * first.C;
  out.C.rightCols(n2) = second.C;
  out.D = second.D * first.D;
  return out;
}

Eigen::VectorXd DiscreteSystem::steady_state(double u) const {
  const int n = states();
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) - Ad;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible()) throw std::domain_error("steady_state: system has a pole at z = 1");
  return lu.solve(Bd * u);
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& m, double tolerance) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n) throw std::invalid_argument("expm: matrix must be square");
  if (n == 0) return m;
  if (!m.allFinite()) throw std::domain_error("expm: non-finite matrix");

  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Eigen::MatrixXd scaled = m / std::ldexp(1.0, squarings);

  Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k < 60; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() <= tolerance * sum.cwiseAbs().maxCoeff()) break;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

DiscreteSystem discretize_zoh(const StateSpace& ss, double ts) {
  if (!(ts > 0.0)) throw std::invalid_argument("discretize_zoh: Ts must be positive");
  const int n = ss.states();
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = ss.A;
  aug.topRightCorner(n, 1) = ss.B;
  const Eigen::MatrixXd phi = expm(aug * ts);
  return {phi.topLeftCorner(n, n), phi.topRightCorner(n, 1), ss.C, ss.D, ts};
}

DiscreteSystem discretize_tustin(const StateSpace& ss, double ts) {
  if (!(ts > 0.0)) throw std::invalid_argument("discretize_tustin: Ts must be positive");
  const int n = ss.states();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd half = ss.A * (ts / 2.0);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(I - half);
  DiscreteSystem d;
  d.Ts = ts;
  d.Ad = lu.solve(I + half);
  d.Bd = lu.solve(ss.B) * ts;
  d.Cd = ss.C * lu.inverse();
  d.Dd = ss.D + (ss.C * d.Bd)(0, 0) / 2.0;
  return d;
}

DiscreteStepper::DiscreteStepper(DiscreteSystem sys)
    : sys_(std::move(sys)), x_(Eigen::VectorXd::Zero(sys_.states())) {}

DiscreteStepper::DiscreteStepper(DiscreteSystem sys, Eigen::VectorXd x0) : sys_(std::move(sys)) {
  set_state(x0);
}

void DiscreteStepper::set_state(const Eigen::VectorXd& x) {
  if (x.size() != sys_.states())
    throw std::invalid_argument("DiscreteStepper: state dimension " + std::to_string(x.size()) +
                                " does not match system order " + std::to_string(sys_.states()));
  x_ = x;
}

double DiscreteStepper::output(double u) const {
  if (x_.size() == 0) return sys_.Dd * u;
  return (sys_.Cd * x_)(0, 0) + sys_.Dd * u;
}

double DiscreteStepper::step(double u) {
  const double y = output(u);
  if (x_.size() > 0) x_ = sys_.Ad * x_ + sys_.Bd.col(0) * u;
  return y;
}

std::vector<double> simulate(const DiscreteSystem& dsys, std::span<const double> input,
                             const Eigen::VectorXd& x0) {
  if (input.empty()) throw std::invalid_argument("simulate: input must contain at least one sample");
  DiscreteStepper stepper(dsys, x0);
  std::vector<double> y;
  y.reserve(input.size());
  for (double u : input) y.push_back(stepper.step(u));
  return y;
}

std::vector<double> simulate(const DiscreteSystem& dsys, std::span<const double> input) {
  return simulate(dsys, input, Eigen::VectorXd::Zero(dsys.states()));
}

std::vector<double> logspace(double lo, double hi, int count) {
  if (count < 2 || !(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("logspace: bad range");
  std::vector<double> out(count);
  const double l0 = std::log10(lo);
  const double step = (std::log10(hi) - l0) / (count - 1);
  for (int i = 0; i < count; ++i) out[i] = std::pow(10.0, l0 + step * i);
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<FrequencyPoint> bode(const TransferFunction& tf, std::span<const double> omegas) {
  std::vector<FrequencyPoint> out;
  out.reserve(omegas.size());
  for (double w : omegas) {
    const auto h = tf.frequency_response(w);
    out.push_back({w, std::abs(h), std::arg(h)});
  }
  return out;
}

double bandwidth_3db(const TransferFunction& tf) {
  const double dc = std::abs(tf.evaluate(0.0));
  if (!std::isfinite(dc) || dc == 0.0)
    throw std::domain_error("bandwidth_3db: DC gain must be finite and nonzero");
  const double target = dc / std::sqrt(2.0);
  const auto below = [&](double w) { return std::abs(tf.frequency_response(w)) < target; };

  constexpr double kLo = 1e-3, kHi = 1e4;
  constexpr int kPerDecade = 400;
  const auto grid = logspace(kLo, kHi, 7 * kPerDecade + 1);
  if (below(grid.front())) throw std::domain_error("bandwidth_3db: gain already below -3 dB at scan start");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!below(grid[i])) continue;
    double lo = grid[i - 1], hi = grid[i];
    while (hi - lo > 1e-6) {
      const double mid = 0.5 * (lo + hi);
      (below(mid) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
  }
  throw std::domain_error("bandwidth_3db: no -3 dB crossing within [1e-3, 1e4] rad/s");
}

}  // namespace fesilc
