#pragma once

/// @file degiorgi.hpp
/// @brief Truncation diagnostics on trajectories: normalized frames, slanted
///        cylinders, level-set fractions, truncation energies A_k, Sobolev
///        ratio, oscillation-based Hoelder estimates and lemma audits.
///
/// A Frame maps physical data to the unit-normalized picture used by the
/// truncation lemmas,
///
///     uhat(xi, tau) = A u(x0 + gamma(t) + xi / B, t0 + tau / C),  C = B^{2-2s} / A,
///
/// so that uhat solves the same equation. All radii, times and levels below
/// are in normalized units unless stated otherwise.

#include <string>
#include <vector>

#include "fpme/cutoffs.hpp"
#include "fpme/solver.hpp"

namespace fpme {

/// Piecewise-linear physical displacement gamma(t) of a cylinder axis.
struct DriftPath {
  std::vector<double> times;  ///< ascending
  std::vector<Vec> gamma;
  std::vector<Vec> speed;

  /// gamma at t by linear interpolation; OutOfDomain outside [times.front(), times.back()].
  Vec at(double t) const;
  bool empty() const noexcept { return times.empty(); }
};

/// Builds gamma(t_i) = sum of speed * dt (left rectangle) anchored so that
/// gamma(anchor_time) = 0. `times` ascending, anchor inside the range.
DriftPath integrate_path(const std::vector<double>& times, const std::vector<Vec>& speeds, double anchor_time);

struct Frame {
  Vec x0{0.0, 0.0, 0.0};
  double t0 = 0.0;
  double amplitude = 1.0;
  double space = 1.0;
  double s = 0.5;

  double time_scale() const;
  double physical_time(double tau) const { return t0 + tau / time_scale(); }
};

/// Pointwise truncation against a cutoff field.
struct Truncation {
  Field plus;
  Field minus;
};
Truncation truncate(const Field& u, const Field& phi);

enum class LevelSense { Above, AtLeast, Below };

/// Space-time cylinder in normalized units: |xi - gamma| <= radius,
/// tau in [tau_low, tau_high].
struct Cylinder {
  double radius;
  double tau_low;
  double tau_high = 0.0;
};

/// Fraction of the cylinder where uhat is above / at least / below `level`,
/// by cell counting with midpoint-in-time snapshot weights. OutOfDomain when
/// the time window leaves the trajectory or the ball leaves the box.
double level_set_fraction(const Trajectory& traj, const Frame& frame, const Cylinder& cyl, double level,
                          LevelSense sense, const DriftPath* path = nullptr);

/// Absolute normalized space-time measure of the same set.
double level_set_measure(const Trajectory& traj, const Frame& frame, const Cylinder& cyl, double level,
                         LevelSense sense, const DriftPath* path = nullptr);

/// sup and inf of uhat over a cylinder.
struct Extremes {
  double sup;
  double inf;
  std::size_t samples;
};
Extremes cylinder_extremes(const Trajectory& traj, const Frame& frame, const Cylinder& cyl,
                           const DriftPath* path = nullptr);

/// A_k = sup_{T_k <= tau <= 0} int (uhat - phi_k)_+^2 dxi
///     + int_{T_k}^0 B((uhat - phi_k)_+) dtau,
/// evaluated on the physical grid and converted to normalized units. Needs at
/// least 8 snapshots in the window (InsufficientData).
double truncation_energy(const Trajectory& traj, const Frame& frame, const CutoffFamily& family, int k);

struct CascadeReport {
  std::vector<double> energies;  ///< A_0..A_kmax
  std::vector<double> ladder_times;
  bool monotone;
  bool reduced;          ///< A_kmax below the threshold
  double threshold;
  double sup_gamma1;     ///< sup of uhat on |xi| <= 1, tau in [-1, 0]
  bool sup_below_7_8;
  double decay_rate;     ///< least-squares slope of log A_k over the positive entries (NaN if < 2)
};
CascadeReport degiorgi_cascade_report(const Trajectory& traj, const Frame& frame, const CutoffFamily& family,
                                      int k_max, double threshold = 1e-8);

struct SobolevCheck {
  double lhs;
  double rhs;
  double ratio;
};
/// (int |u|^p)^{2/p} against B(u,u) + ||u||_2^2 with p = 2N/(N-1).
/// NotApplicable for N = 1.
SobolevCheck sobolev_embedding_check(const Field& u);

struct HolderEstimate {
  std::vector<double> radii;
  std::vector<double> oscillation;
  double alpha_hat;
  double r_squared;
  bool degenerate;
};
/// Oscillation of u over physical cylinders |x - center - gamma(t)| <= R,
/// t in [t0 - aspect R^{2-2s}, t0], and the log-log slope against R.
/// Radii strictly decreasing, at least 3 (InsufficientData). `degenerate`
/// flags osc(R_min) <= 10 x (1e-12 sup u), the snapshot noise floor.
HolderEstimate holder_estimate(const Trajectory& traj, const Vec& center, double t0, const std::vector<double>& radii,
                               double aspect = 1.0, const DriftPath* path = nullptr);

struct LemmaParams {
  double mu = 0.125;
  double mu0 = 0.25;
  double mu1 = 0.125;
  double delta = 0.1;
  double delta0 = 0.1;
  double eps0 = 0.1;
  double lambda = 0.5;
  double rho = 0.1;
};

struct LemmaCheck {
  std::string name;
  bool hypotheses;
  bool conclusion;
  double measured;    ///< the hypothesis measure (fraction or absolute)
  double extreme;     ///< sup or inf entering the conclusion
  bool falsified() const noexcept { return hypotheses && !conclusion; }
};

struct LemmaAudit {
  std::vector<LemmaCheck> checks;
  bool any_falsified() const noexcept;
};
/// Observational audit of the hypotheses and conclusions of the four
/// oscillation lemmas in the frame (needs the window tau in [-4, 0]).
LemmaAudit lemma_hypothesis_audit(const Trajectory& traj, const Frame& frame, const LemmaParams& params,
                                  const CutoffFamily& family);

/// Largest K in (0, 1/4) such that psi(K r) / (1 - mu1/2) <= psi(r) at every
/// sampled radius (log-spaced from the barrier onset over `decades`).
/// Bisection on K; returns 0 if no K > 1e-12 works.
double wing_growth_constant(double eps, double lambda, double s, double mu1, int samples = 2000,
                            double decades = 8.0);
bool wing_growth_holds(double K, double eps, double lambda, double s, double mu1, int samples = 2000,
                       double decades = 8.0);

/// Normalized frame centered at a support-edge point: x0 is the cell with the
/// largest first coordinate (ties: smallest |x_1|) where
/// u(t0) >= edge_fraction * sup u(t0); amplitude = 1 / sup u over the window
/// tau in [-4, 0] (fixed point, since the window depends on the amplitude),
/// so uhat <= 1 on the strip. `space` is B. OutOfDomain if the window starts
/// before the trajectory.
Frame edge_frame(const Trajectory& traj, std::size_t snapshot, double space, double edge_fraction = 1e-3);

}  // namespace fpme
