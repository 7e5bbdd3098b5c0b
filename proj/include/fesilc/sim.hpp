#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fesilc/controllers.hpp"
#include "fesilc/kinematics.hpp"
#include "fesilc/plant.hpp"

namespace fesilc {

enum class Scenario {
  FeedbackOnly = 1,
  FeedbackPlusPilc = 2,
  FullConstrained = 3,
};

/// Where the learned feedforward enters the loop.
enum class IlcInjection {
  /// Added to the tracking error ahead of the phase-lead compensator.
  ReferenceShift,
  /// Added to the compensator output, after saturation.
  OutputAdd,
};

struct ScenarioConfig {
  Scenario scenario = Scenario::FeedbackOnly;
  int iterations = 10;
  double Ts = 0.05;
  double duration = 10.0;

  double L = 0.1;
  double q_cutoff_hz = 0.40;
  QFilterMode q_mode = QFilterMode::ZeroPhase;
  IlcInjection injection = IlcInjection::ReferenceShift;

  double psi = 0.01;
  double r_dot_min = 0.0;
  LowerBoundMode lower_mode = LowerBoundMode::SkipRestOnset;
  /// V0 = v0_scale * PD energy of the unconstrained feedback-only trial.
  double v0_scale = 1.2;
  std::optional<double> r_dot_max_override;
  std::optional<double> v0_override;

  Point2 start{0.0, 0.0};
  Point2 end{0.2, 0.2};
  TimeProfile profile = TimeProfile::Ramp;

  ArmParams arm{};
  MuscleParams muscle{};
  PlantCoefficients plant{};
  PhaseLeadConfig lead{};

  bool reference_mode = false;

  /// Defaults for a scenario: 10, 16 and 13 iterations respectively.
  static ScenarioConfig defaults(Scenario s);
  std::size_t samples() const;
  void validate() const;
};

std::string to_string(Scenario s);
std::string to_string(QFilterMode m);
std::string to_string(IlcInjection m);
std::string to_string(LowerBoundMode m);

struct TrialRecord {
  std::vector<double> t;
  std::vector<double> r_d;
  std::vector<double> r;
  std::vector<double> e;
  std::vector<double> theta_f;
  std::vector<double> u_fb;       // compensator output before saturation
  std::vector<double> u_ff;       // learned feedforward
  std::vector<double> u_applied;  // stimulation command driving the muscle
  std::vector<double> r_dot;

  double rmse = 0.0;
  double nrmse = 0.0;  // NaN when the reference has zero range
  /// RMS of u_fb.
  double pd_energy = 0.0;
  /// RMS of the saturated compensator output.
  double constrained_pd_energy = 0.0;
  double max_velocity = 0.0;
  double constraint_bound = 0.0;  // NaN when no saturation is active

  std::size_t size() const { return t.size(); }
};

struct RunReport {
  ScenarioConfig config;
  std::vector<TrialRecord> trials;

  /// Identified speed limit and initial constraint (scenario 3 only, else NaN).
  double r_dot_max = 0.0;
  double v0 = 0.0;
  /// First iteration (1-based) of two consecutive ones whose rmse differ by
  /// less than 1e-4 m.
  std::optional<int> plateau_iteration;
  /// Scenario 3: every trial kept max_velocity <= r_dot_max.
  bool velocity_bound_held = true;

  std::vector<double> rmse_series() const;
};

class SimulationDivergence : public std::runtime_error {
 public:
  SimulationDivergence(const std::string& what, std::size_t sample) : std::runtime_error(what), sample_(sample) {}
  std::size_t sample() const { return sample_; }

 private:
  std::size_t sample_;
};

/// Discrete phase-lead compensator (Tustin) and muscle-plus-arm cascade (ZOH).
DiscreteSystem discrete_compensator(const ScenarioConfig& cfg);
DiscreteSystem discrete_muscle_arm(const ScenarioConfig& cfg);

/// Kinematic model placed so the shoulder sits d1 behind the task line start.
ArmKinematics task_kinematics(const ScenarioConfig& cfg);

/**
 * One trial from rest. Feedforward is taken from `ilc` when given and the
 * compensator output is clamped to `cs->bound()` when `cs` is given.
 *
 * Throws SimulationDivergence at the first non-finite sample.
 */
TrialRecord run_trial(const ScenarioConfig& cfg, const IlcMemory* ilc = nullptr,
                      const ConstraintState* cs = nullptr);

RunReport run_scenario(const ScenarioConfig& cfg);

struct VelocityBound {
  double r_dot_max = 0.0;  // m/s
  double pd_energy = 0.0;  // RMS compensator output
};

/// Feedback-only trial with `cfg`'s model and reference.
VelocityBound identify_velocity_bound(const ScenarioConfig& cfg);

double rmse(std::span<const double> desired, std::span<const double> actual);
/// Throws std::domain_error when `desired` has zero range.
double nrmse(std::span<const double> desired, std::span<const double> actual);
double rms(std::span<const double> x);

/// Report plateau rule applied to an rmse sequence.
std::optional<int> plateau_iteration(std::span<const double> rmse_seq, double tolerance = 1e-4);
/// First iteration (1-based) whose rmse lies within `fraction` of the final value.
int iterations_to_final(std::span<const double> rmse_seq, double fraction = 0.05);

}  // namespace fesilc
