#pragma once

/// @file solver.hpp
/// @brief Conservative upwind time stepping for u_t + div(u v) = 0 with
///        v = -grad (-Delta)^{-s} u, trajectories and the run-level audits
///        (scaling twin, smoothing exponent, energy functionals).

#include <limits>
#include <utility>
#include <vector>

#include "fpme/grid.hpp"

namespace fpme {

struct SolverConfig {
  double s = 0.5;
  double cfl = 0.4;
  double t_end = 1.0;
  int snapshot_stride = 1;
  bool dealias = true;
  double boundary_margin = 0.1;

  /// Largest step, used when the velocity vanishes.
  double dt_max = 0.05;
  /// Two-stage Heun instead of forward Euler.
  bool heun = false;
  /// Extra times the run must land on exactly; each gets a snapshot.
  std::vector<double> output_times;
  /// Track the two energy functionals every step.
  bool track_energy = true;

  /// Throws InvalidArgument / InvalidOrder on out-of-range fields.
  void validate() const;
};

struct StepRecord {
  double t;
  double dt;
  double mass;
  double sup;
  double support_radius;
};

/// Energy bookkeeping at the start of each step (and at the final time).
///   entropy      = int u log u
///   dissipation  = sum |xi|^{2-2s} |uhat|^2 * volume  (d/dt entropy = -dissipation)
///   potential    = 1/2 sum |xi|^{-2s} |uhat|^2 * volume
///   kinetic      = int u |v|^2                         (d/dt potential = -kinetic)
/// `first` and `second` are the Lyapunov functionals with the time integrals
/// of dissipation and kinetic accumulated by the rectangle rule.
struct EnergyRecord {
  double t;
  double entropy;
  double dissipation;
  double potential;
  double kinetic;
  double first;
  double second;
};

struct Trajectory {
  Grid grid;
  SolverConfig config;
  std::vector<double> times;
  std::vector<Field> fields;
  std::vector<StepRecord> series;
  std::vector<EnergyRecord> energies;

  std::size_t snapshot_count() const noexcept { return times.size(); }
};

/// Support threshold used for radii and boundary contact, relative to sup u0.
inline constexpr double kSupportThreshold = 1e-10;

/// Total outgoing face speed per cell, maximized over cells. The upwind step
/// keeps u >= 0 whenever dt * this / dx <= 1.
double max_outgoing_speed(const Grid& g, const std::vector<Field>& v);

/// One step. dt = cfl dx / max(outgoing speed, 1e-14), then capped by
/// cfg.dt_max and `dt_cap`. NotNonnegative on negative input, NumericalBlowup
/// if the update produces a negative or non-finite value.
std::pair<Field, double> step(const Field& u, const SolverConfig& cfg,
                              double dt_cap = std::numeric_limits<double>::infinity());

/// Largest |x| over cells with u > threshold, 0 for an empty support.
double support_radius(const Field& u, double threshold);

/// Integrates to cfg.t_end. Snapshot 0 is u0; then every snapshot_stride
/// steps, at each requested output time and at t_end. BoundaryContact if the
/// support reaches |x_a| > L (1 - 2 margin) along any axis.
Trajectory run(const Field& u0, const SolverConfig& cfg);

/// Energy functionals of a single state (first/second fields left at 0).
EnergyRecord energy_state(const Field& u, double s);

struct EnergyAudit {
  double scale;
  double max_rate_first;
  double max_rate_second;
  double tolerance;
  bool pass;
};
/// Per-step growth rate (F(n+1) - F(n)) / (dt * scale) of both functionals,
/// scale = max(|E(0)| of the first functional, mass). Pass iff both rates stay
/// below `tolerance`.
EnergyAudit audit_energy(const Trajectory& traj, double tolerance = 1e-6);

struct ScalingReport {
  double A;
  double B;
  double C;
  std::vector<double> times;        ///< rescaled-run times
  std::vector<double> discrepancy;  ///< max |uhat - A u(B., Ct)| / max |uhat|
  double max_discrepancy;
};
/// Twin runs: u from u0 up to cfg.t_end, uhat from A u0(B x) up to
/// cfg.t_end / C, with C = A B^{2-2s}, compared at `samples` matched times.
ScalingReport scaling_check(const Field& u0, double A, double B, const SolverConfig& cfg, int samples = 4);

struct SmoothingFit {
  double alpha_hat;
  double alpha_target;
  double gamma_target;
  double r_squared;
  std::size_t samples;
};
/// alpha = N / (N + 2 - 2s), gamma = (2 - 2s) / (N + 2 - 2s).
double smoothing_alpha(int dim, double s);
double smoothing_gamma(int dim, double s);
/// Least-squares slope of log sup u vs log t over t in [t1, t2] using the
/// per-step series (snapshots when the series is empty). InsufficientData for
/// fewer than 10 samples or a flat sup.
SmoothingFit smoothing_exponent_fit(const Trajectory& traj, double t1, double t2);

}  // namespace fpme
