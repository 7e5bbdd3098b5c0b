#include "fesilc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fesilc {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

ScenarioConfig ScenarioConfig::defaults(Scenario s) {
  ScenarioConfig cfg;
  cfg.scenario = s;
  switch (s) {
    case Scenario::FeedbackOnly: cfg.iterations = 10; break;
    case Scenario::FeedbackPlusPilc: cfg.iterations = 16; break;
    case Scenario::FullConstrained: cfg.iterations = 13; break;
  }
  return cfg;
}

std::size_t ScenarioConfig::samples() const {
  return static_cast<std::size_t>(std::llround(duration / Ts)) + 1;
}

void ScenarioConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("ScenarioConfig: iterations must be at least 1");
  if (!(Ts > 0.0 && duration > 0.0)) throw std::invalid_argument("ScenarioConfig: Ts and duration must be positive");
  const double steps = duration / Ts;
  if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
    throw std::invalid_argument("ScenarioConfig: duration is not an integer multiple of Ts");
  if (scenario != Scenario::FeedbackOnly) {
    if (!(L > 0.0)) throw std::invalid_argument("ScenarioConfig: learning gain must be positive");
    if (reference_mode && (L < 0.1 || L > 1.0))
      throw std::invalid_argument("ScenarioConfig: learning gain must lie in [0.1, 1]");
    if (q_mode != QFilterMode::Bypass && !(q_cutoff_hz > 0.0))
      throw std::invalid_argument("ScenarioConfig: Q-filter cutoff must be positive");
  }
  if (scenario == Scenario::FullConstrained) {
    if (!(psi >= 0.0)) throw std::invalid_argument("ScenarioConfig: psi must be non-negative");
    if (!(r_dot_min >= 0.0)) throw std::invalid_argument("ScenarioConfig: r_dot_min must be non-negative");
    if (!(v0_scale > 0.0)) throw std::invalid_argument("ScenarioConfig: v0_scale must be positive");
  }
  arm.validate();
  muscle.validate();
  plant.validate();
  lead.validate();
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::FeedbackOnly: return "feedback-only";
    case Scenario::FeedbackPlusPilc: return "feedback+pilc";
    case Scenario::FullConstrained: return "feedback+pilc+constraint";
  }
  return "unknown";
}

std::string to_string(QFilterMode m) {
  switch (m) {
    case QFilterMode::Causal: return "causal";
    case QFilterMode::ZeroPhase: return "zero-phase";
    case QFilterMode::Bypass: return "bypass";
  }
  return "unknown";
}

std::string to_string(IlcInjection m) {
  return m == IlcInjection::ReferenceShift ? "reference" : "output";
}

std::string to_string(LowerBoundMode m) {
  return m == LowerBoundMode::SkipRestOnset ? "skip-rest" : "strict";
}

std::vector<double> RunReport::rmse_series() const {
  std::vector<double> out;
  out.reserve(trials.size());
  for (const auto& t : trials) out.push_back(t.rmse);
  return out;
}

DiscreteSystem discrete_compensator(const ScenarioConfig& cfg) {
  return discretize_tustin(to_state_space(build_phase_lead(cfg.lead)), cfg.Ts);
}

DiscreteSystem discrete_muscle_arm(const ScenarioConfig& cfg) {
  const StateSpace chain = series(to_state_space(build_muscle_linear(cfg.muscle)), to_state_space(build_plant(cfg.plant)));
  return discretize_zoh(chain, cfg.Ts);
}

ArmKinematics task_kinematics(const ScenarioConfig& cfg) {
  const double angle = std::atan2(cfg.end.y - cfg.start.y, cfg.end.x - cfg.start.x);
  return ArmKinematics::from_arm(cfg.arm, cfg.start, angle);
}

double rms(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("rms: empty series");
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

double rmse(std::span<const double> desired, std::span<const double> actual) {
  if (desired.size() != actual.size()) throw std::invalid_argument("rmse: series differ in length");
  if (desired.empty()) throw std::invalid_argument("rmse: empty series");
  double acc = 0.0;
  for (std::size_t i = 0; i < desired.size(); ++i) {
    const double d = desired[i] - actual[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(desired.size()));
}

double nrmse(std::span<const double> desired, std::span<const double> actual) {
  const double err = rmse(desired, actual);
  const auto [lo, hi] = std::minmax_element(desired.begin(), desired.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) throw std::domain_error("nrmse: desired series has zero range");
  return err / range;
}

TrialRecord run_trial(const ScenarioConfig& cfg, const IlcMemory* ilc, const ConstraintState* cs) {
  cfg.validate();
  const TaskTrajectory traj = line_trajectory(cfg.start, cfg.end, cfg.duration, cfg.Ts, cfg.profile);
  const std::size_t n = traj.samples.size();
  if (ilc && ilc->U.size() != n) throw std::invalid_argument("run_trial: feedforward length does not match the trial");

  DiscreteStepper pd(discrete_compensator(cfg));
  DiscreteStepper body(discrete_muscle_arm(cfg));
  const double bound = cs ? cs->bound() : kNaN;

  TrialRecord rec;
  rec.t = traj.times();
  rec.r_d = traj.displacement();
  for (auto* col : {&rec.r, &rec.e, &rec.u_fb, &rec.u_ff, &rec.u_applied}) col->assign(n, 0.0);
  std::vector<double> u_sat(n, 0.0);

  for (std::size_t k = 0; k < n; ++k) {
    const double r = body.output();
    const double e = rec.r_d[k] - r;
    const double ff = ilc ? ilc->U[k] : 0.0;
    const bool shift = cfg.injection == IlcInjection::ReferenceShift;
    const double u_fb = pd.step(shift ? e + ff : e);
    const double u_pd = cs ? sat_constrain(u_fb, bound) : u_fb;
    const double u = shift ? u_pd : u_pd + ff;
    if (!std::isfinite(r) || !std::isfinite(u))
      throw SimulationDivergence("run_trial: non-finite signal at sample " + std::to_string(k), k);
    body.step(u);

    rec.r[k] = r;
    rec.e[k] = e;
    rec.u_fb[k] = u_fb;
    rec.u_ff[k] = ff;
    rec.u_applied[k] = u;
    u_sat[k] = u_pd;
  }

  const ArmKinematics kin = task_kinematics(cfg);
  const Point2 dir = kin.line_direction();
  rec.theta_f.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    rec.theta_f[k] = inverse_kinematics(kin, kin.line_origin.x + rec.r[k] * dir.x, kin.line_origin.y + rec.r[k] * dir.y).theta_f;
  rec.r_dot = resultant_velocity(kin, rec.theta_f, cfg.Ts).r_dot;

  rec.rmse = rmse(rec.r_d, rec.r);
  const auto [lo, hi] = std::minmax_element(rec.r_d.begin(), rec.r_d.end());
  rec.nrmse = *hi > *lo ? rec.rmse / (*hi - *lo) : kNaN;
  rec.pd_energy = rms(rec.u_fb);
  rec.constrained_pd_energy = rms(u_sat);
  rec.max_velocity = *std::max_element(rec.r_dot.begin(), rec.r_dot.end());
  rec.constraint_bound = bound;
  return rec;
}

VelocityBound identify_velocity_bound(const ScenarioConfig& cfg) {
  ScenarioConfig fb = cfg;
  fb.scenario = Scenario::FeedbackOnly;
  const TrialRecord rec = run_trial(fb);
  return {rec.max_velocity, rec.pd_energy};
}

RunReport run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  RunReport report;
  report.config = cfg;
  report.r_dot_max = kNaN;
  report.v0 = kNaN;
  const std::size_t n = cfg.samples();

  std::optional<IlcMemory> mem;
  if (cfg.scenario != Scenario::FeedbackOnly) {
    mem = IlcMemory::zeros(n, cfg.L);
    mem->q_cutoff_hz = cfg.q_cutoff_hz;
    mem->q_mode = cfg.q_mode;
    mem->reference_mode = cfg.reference_mode;
  }

  std::optional<ConstraintState> cs;
  if (cfg.scenario == Scenario::FullConstrained) {
    VelocityBound vb{};
    if (!cfg.r_dot_max_override || !cfg.v0_override) vb = identify_velocity_bound(cfg);
    report.r_dot_max = cfg.r_dot_max_override.value_or(vb.r_dot_max);
    report.v0 = cfg.v0_override.value_or(cfg.v0_scale * vb.pd_energy);
    cs = ConstraintState{};
    cs->V.assign(n, report.v0);
    cs->psi = cfg.psi;
    cs->r_dot_max = report.r_dot_max;
    cs->r_dot_min = cfg.r_dot_min;
    cs->lower_mode = cfg.lower_mode;
    cs->validate();
  }

  report.trials.reserve(static_cast<std::size_t>(cfg.iterations));
  for (int k = 0; k < cfg.iterations; ++k) {
    TrialRecord rec = run_trial(cfg, mem ? &*mem : nullptr, cs ? &*cs : nullptr);
    if (cs) {
      if (rec.max_velocity > cs->r_dot_max) report.velocity_bound_held = false;
      *cs = dilc_update(*cs, rec.r_dot);
    }
    if (mem) {
      mem->e = rec.e;
      *mem = ilc_update(*mem, cfg.Ts);
    }
    report.trials.push_back(std::move(rec));
  }

  report.plateau_iteration = plateau_iteration(report.rmse_series());
  return report;
}

std::optional<int> plateau_iteration(std::span<const double> rmse_seq, double tolerance) {
  for (std::size_t k = 1; k < rmse_seq.size(); ++k)
    if (std::abs(rmse_seq[k] - rmse_seq[k - 1]) < tolerance) return static_cast<int>(k);
  return std::nullopt;
}

int iterations_to_final(std::span<const double> rmse_seq, double fraction) {
  if (rmse_seq.empty()) throw std::invalid_argument("iterations_to_final: empty sequence");
  const double last = rmse_seq.back();
  for (std::size_t k = 0; k < rmse_seq.size(); ++k)
    if (std::abs(rmse_seq[k] - last) <= fraction * std::abs(last)) return static_cast<int>(k) + 1;
  return static_cast<int>(rmse_seq.size());
}

}  // namespace fesilc
