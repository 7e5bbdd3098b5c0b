#include "fesilc/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fesilc {

void PhaseLeadConfig::validate() const {
  if (!(Kp > 0.0)) throw std::invalid_argument("PhaseLeadConfig: Kp must be positive");
  if (!(Kd >= 0.0)) throw std::invalid_argument("PhaseLeadConfig: Kd must be non-negative");
  if (!(omega_lead > 0.0 && omega_lead < 1.0))
    throw std::invalid_argument("PhaseLeadConfig: lead ratio must lie in (0, 1)");
}

TransferFunction build_phase_lead(const PhaseLeadConfig& cfg) {
  cfg.validate();
  const double tau = cfg.Kd / cfg.Kp;
  return {{cfg.Kd, cfg.Kp}, {cfg.omega_lead * tau, 1.0}};
}

TransferFunction build_q_filter(double cutoff_hz) {
  if (!(cutoff_hz > 0.0)) throw std::invalid_argument("build_q_filter: cutoff must be positive");
  const double wc = 2.0 * std::numbers::pi * cutoff_hz;
  return {{wc}, {1.0, wc}};
}

IlcMemory IlcMemory::zeros(std::size_t samples, double L) {
  IlcMemory m;
  m.U.assign(samples, 0.0);
  m.e.assign(samples, 0.0);
  m.L = L;
  return m;
}

void IlcMemory::validate() const {
  if (U.size() != e.size())
    throw std::invalid_argument("IlcMemory: feedforward and error series differ in length");
  if (!(L > 0.0)) throw std::invalid_argument("IlcMemory: learning gain must be positive");
  if (reference_mode && (L < 0.1 || L > 1.0))
    throw std::invalid_argument("IlcMemory: learning gain must lie in [0.1, 1]");
  if (q_mode != QFilterMode::Bypass && !(q_cutoff_hz > 0.0))
    throw std::invalid_argument("IlcMemory: Q-filter cutoff must be positive");
}

namespace {

std::vector<double> forward_pass(const DiscreteSystem& q, std::span<const double> x) {
  if (x.empty()) return {};
  DiscreteStepper f(q, q.steady_state(x.front()));
  std::vector<double> y;
  y.reserve(x.size());
  for (double v : x) y.push_back(f.step(v));
  return y;
}

}  // namespace

std::vector<double> apply_q_filter(std::span<const double> signal, double cutoff_hz, double ts, QFilterMode mode) {
  if (mode == QFilterMode::Bypass) return {signal.begin(), signal.end()};
  const DiscreteSystem q = discretize_tustin(to_state_space(build_q_filter(cutoff_hz)), ts);
  auto y = forward_pass(q, signal);
  if (mode == QFilterMode::ZeroPhase) {
    std::reverse(y.begin(), y.end());
    y = forward_pass(q, y);
    std::reverse(y.begin(), y.end());
  }
  return y;
}

IlcMemory ilc_update(const IlcMemory& mem, double ts) {
  mem.validate();
  std::vector<double> raw(mem.U.size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = mem.U[i] + mem.L * mem.e[i];
  IlcMemory next = mem;
  next.U = apply_q_filter(raw, mem.q_cutoff_hz, ts, mem.q_mode);
  next.e.assign(next.U.size(), 0.0);
  next.iteration_index = mem.iteration_index + 1;
  return next;
}

double ConstraintState::bound() const {
  if (V.empty()) throw std::logic_error("ConstraintState: empty constraint series");
  return *std::max_element(V.begin(), V.end());
}

void ConstraintState::validate() const {
  if (!(r_dot_max > r_dot_min && r_dot_min >= 0.0))
    throw std::invalid_argument("ConstraintState: need r_dot_max > r_dot_min >= 0");
  if (!(psi >= 0.0)) throw std::invalid_argument("ConstraintState: psi must be non-negative");
  for (double v : V)
    if (!std::isfinite(v)) throw std::invalid_argument("ConstraintState: non-finite constraint entry");
}

double bea_epsilon(std::span<const double> r_dot, const ConstraintState& cs) {
  if (r_dot.empty()) throw std::invalid_argument("bea_epsilon: empty velocity profile");
  double upper = INFINITY;
  for (double r : r_dot) upper = std::min(upper, cs.r_dot_max - r);

  std::size_t start = 0;
  if (cs.lower_mode == LowerBoundMode::SkipRestOnset)
    while (start < r_dot.size() && r_dot[start] <= cs.r_dot_min) ++start;
  double lower = INFINITY;
  for (std::size_t i = start; i < r_dot.size(); ++i) lower = std::min(lower, r_dot[i] - cs.r_dot_min);
  // A profile that never leaves rest has no motion segment to judge.
  if (start == r_dot.size()) lower = 0.0;
  return std::min(upper, lower);
}

ConstraintState dilc_update(const ConstraintState& cs, std::span<const double> r_dot) {
  if (r_dot.size() != cs.V.size())
    throw std::invalid_argument("dilc_update: velocity profile length does not match constraint series");
  ConstraintState next = cs;
  next.epsilon = bea_epsilon(r_dot, cs);
  for (std::size_t i = 0; i < r_dot.size(); ++i) {
    if (next.epsilon > 0.0)
      next.V[i] += cs.psi * (cs.r_dot_max - r_dot[i]);
    else
      next.V[i] -= cs.psi * std::max(0.0, r_dot[i] - cs.r_dot_max);
  }
  return next;
}

double sat_constrain(double u, double bound) {
  const double b = std::max(0.0, bound);
  return std::clamp(u, -b, b);
}

std::vector<double> sat_constrain(std::span<const double> u_pd, double bound) {
  std::vector<double> out;
  out.reserve(u_pd.size());
  for (double u : u_pd) out.push_back(sat_constrain(u, bound));
  return out;
}

std::vector<double> sat_constrain(std::span<const double> u_pd, const ConstraintState& cs) {
  return sat_constrain(u_pd, cs.bound());
}

void FesConfig::validate() const {
  if (!(pw_min_us < pw_max_us)) throw std::invalid_argument("FesConfig: pw_min must be below pw_max");
  if (!(full_scale > 0.0)) throw std::invalid_argument("FesConfig: full scale must be positive");
}

std::vector<double> fes_modulate(std::span<const double> u, const FesConfig& cfg) {
  cfg.validate();
  std::vector<double> pw;
  pw.reserve(u.size());
  const double span = cfg.pw_max_us - cfg.pw_min_us;
  for (double v : u) pw.push_back(std::clamp(cfg.pw_min_us + span * v / cfg.full_scale, cfg.pw_min_us, cfg.pw_max_us));
  return pw;
}

}  // namespace fesilc
