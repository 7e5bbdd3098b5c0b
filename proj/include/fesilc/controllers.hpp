#pragma once

#include <span>
#include <vector>

#include "fesilc/lti.hpp"

namespace fesilc {

// ---------------------------------------------------------------------------
// Feedback: phase-lead compensator K_P (tau s + 1) / (w tau s + 1), tau = K_D / K_P.
// ---------------------------------------------------------------------------

struct PhaseLeadConfig {
  double Kp = 10.0;
  double Kd = 2.0;
  double omega_lead = 0.05;

  void validate() const;
};

TransferFunction build_phase_lead(const PhaseLeadConfig& cfg);

// ---------------------------------------------------------------------------
// Feedforward: P-type ILC, U_{k+1} = Q(U_k + L e_k).
// ---------------------------------------------------------------------------

/// First-order low-pass wc / (s + wc) with wc = 2 pi cutoff_hz.
TransferFunction build_q_filter(double cutoff_hz);

enum class QFilterMode {
  Causal,     ///< single forward pass, state matched to the first sample
  ZeroPhase,  ///< forward pass then reverse pass, each state-matched
  Bypass,     ///< no filtering
};

struct IlcMemory {
  std::vector<double> U;  // feedforward for the coming trial
  std::vector<double> e;  // error recorded in the trial that used U
  double L = 0.1;
  double q_cutoff_hz = 0.40;
  QFilterMode q_mode = QFilterMode::ZeroPhase;
  int iteration_index = 0;
  /// Enforces L in [0.1, 1].
  bool reference_mode = false;

  static IlcMemory zeros(std::size_t samples, double L);
  void validate() const;
};

/// Applies the discretized (Tustin) Q-filter to a trial-length signal.
std::vector<double> apply_q_filter(std::span<const double> signal, double cutoff_hz, double ts, QFilterMode mode);

/// Returns the memory for the next trial: U = Q(U + L e), iteration_index + 1.
/// Throws std::invalid_argument on length mismatch.
IlcMemory ilc_update(const IlcMemory& mem, double ts);

// ---------------------------------------------------------------------------
// Velocity constraint: D-ILC with bounded-error acceptance and saturation.
// ---------------------------------------------------------------------------

enum class LowerBoundMode {
  /// Samples before motion onset (r_dot <= r_dot_min from t = 0) are left out
  /// of the lower-bound margin; every trial starts at rest.
  SkipRestOnset,
  /// Every sample counts, so a trial starting at rest always has margin 0.
  Strict,
};

struct ConstraintState {
  std::vector<double> V;  // per-sample constraint on the PD output
  double psi = 0.01;
  double r_dot_max = 0.0;  // m/s
  double r_dot_min = 0.0;  // m/s
  double epsilon = 0.0;    // last computed margin
  LowerBoundMode lower_mode = LowerBoundMode::SkipRestOnset;

  /// Largest entry of V; the saturation level used in the next trial.
  double bound() const;
  void validate() const;
};

/// min(min(r_max - r_i), min(r_i - r_min)); the trial is accepted iff > 0.
double bea_epsilon(std::span<const double> r_dot, const ConstraintState& cs);

/**
 * Next constraint state from the velocity profile of the finished trial.
 *
 * Accepted trials learn toward the bound, V += psi (r_max - r_i). Rejected
 * trials pull back only where the bound was exceeded,
 * V -= psi max(0, r_i - r_max). The new state carries the computed margin.
 */
ConstraintState dilc_update(const ConstraintState& cs, std::span<const double> r_dot);

/// Symmetric clamp of every sample to +-bound.
std::vector<double> sat_constrain(std::span<const double> u_pd, double bound);
/// Uses cs.bound().
std::vector<double> sat_constrain(std::span<const double> u_pd, const ConstraintState& cs);
double sat_constrain(double u, double bound);

// ---------------------------------------------------------------------------
// FES pulse-width mapping.
// ---------------------------------------------------------------------------

struct FesConfig {
  double amplitude_mA = 5.0;
  double frequency_hz = 50.0;
  double pw_min_us = 0.0;
  double pw_max_us = 500.0;
  double full_scale = 1.0;  // controller output that maps onto pw_max

  void validate() const;
};

/// Affine map of [0, full_scale] onto [pw_min, pw_max] with hard clipping.
std::vector<double> fes_modulate(std::span<const double> u, const FesConfig& cfg);

}  // namespace fesilc
