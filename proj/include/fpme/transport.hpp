#pragma once

/// @file transport.hpp
/// @brief Drift velocity integrals, moving frames x' = x - gamma(t), the
///        extension/rescaling cascade at degenerate points and the weak
///        residual of the transformed equation.
///
/// All drift integrals are quadratures of grad L_s(y) W(|y|) u(center + y)
/// over the minimum-image torus, dy = dx^N, which equals the fluid velocity
/// -grad p at the center when W = 1.

#include <functional>
#include <string>
#include <vector>

#include "fpme/cutoffs.hpp"
#include "fpme/degiorgi.hpp"
#include "fpme/error.hpp"
#include "fpme/solver.hpp"

namespace fpme {

struct DriftResult {
  Vec velocity{};
  /// Upper bound on |velocity| from local data (cutoff and annular versions).
  double bound = 0.0;
  /// Full kernel only: partial sums excluding 1 and 3 cells around the
  /// center, and whether they differ by more than 10%.
  Vec inner{};
  Vec outer{};
  bool ill_conditioned = false;
};

/// sum grad L_s(y) W(|y|) u(center + y) dx^N. With exclude_cells = 2m + 1 the
/// block of cells within m index steps (per axis) of the cell nearest to the
/// center is skipped; exclude_cells = 0 skips only y = 0.
Vec drift_integral(const Field& u, double s, const Vec& center, const std::function<double(double)>& weight,
                   int exclude_cells);

/// Principal-value quadrature of the full drift; the center cell is
/// excluded symmetrically. `velocity` is the 1-cell exclusion sum.
DriftResult drift_velocity_full(const Field& u, double s, const Vec& center = {});

/// Drift with weight Psi(scale * |y|). bound = |g| (eps_c / scale)^{2s-N-1} ||u||_1.
DriftResult drift_velocity_cutoff(const Field& u, const CutoffFamily& family, double s, const Vec& center = {},
                                  double scale = 1.0);

/// Drift with weight Psi(scale |y|) - Psi(scale |y| / B), supported on the
/// annulus eps_c <= scale |y| <= 2 B eps_c. bound = |g| sup_annulus |u| times
/// the integral of |y|^{2s-N-1} over the annulus (sigma_N ln(2B) at s = 1/2).
/// InvalidScale if B <= 1.
DriftResult annular_correction_speed(const Field& u, double B, const CutoffFamily& family, double s,
                                     const Vec& center = {}, double scale = 1.0);

/// Each snapshot translated spectrally so that the new field at x' is
/// u(x' + gamma(t)). `path` must cover every snapshot time. ExcessiveDrift
/// when |gamma| >= L/2 at some snapshot. Series records are dropped (they are
/// frame dependent); energies are kept.
Trajectory apply_moving_frame(const Trajectory& traj, const DriftPath& path);

/// Negated path (inverse frame).
DriftPath negate(const DriftPath& path);

enum class RescalingMode { Full, Cutoff };

struct RescalingReport {
  Vec lhs{};
  Vec rhs{};
  double factor;     ///< A B^{1-2s}
  double mismatch;   ///< |lhs - rhs| / |lhs| (absolute when |lhs| < 1e-300)
};

/// v(u; W) against A B^{1-2s} v(u_2; W_1) with u_2(z) = u(z / B) / A and
/// W_1(z) = W(z / B); W = 1 (Full) or the transport cutoff Psi (Cutoff).
/// Requires A > 0, B >= 1 (InvalidScale).
RescalingReport velocity_rescaling_check(const Field& u, double A, double B, double s, RescalingMode mode,
                                         const CutoffFamily& family = {}, const Vec& center = {});

struct CascadeParams {
  double mu = 0.125;
  double B = 2.0;
  CutoffFamily family{};
  int k_max = 5;
  /// reg.1b routing: stop with NondegenerateBranch when
  /// |{uhat >= 1/2} cap Q_4| >= (1 - delta) |Q_4|.
  double delta = 0.1;
  int min_cells = 8;
  int min_snapshots = 8;

  /// InvalidArgument on mu outside (0,1/2], k_max < 1; InvalidScale on B <= 1.
  void validate() const;
};

struct CascadeRecord {
  int k;                    ///< 0-based step; frame k has factors A^k, B^k, T^k
  double amplitude_factor;  ///< A^k
  double space_factor;      ///< B^k
  double time_factor;       ///< T^k, T = A B^{2-2s}
  double precondition_sup;  ///< sup uhat_k over the reduced cylinder Q_{4/C'}
  double upper_fraction;    ///< |{uhat_k > 1/2} cap Q_{4/C'}| / |Q_{4/C'}|
  double sup_osc;           ///< sup uhat_k over the quarter cylinder (radius and height 1/C')
  double corr_speed;        ///< max_t |V_k| in frame-k units
  double c_prime;           ///< 1 + corr_speed
  double slant;             ///< C_k in frame-0 units
  double physical_radius;   ///< radius of Q_4 in physical units
  std::size_t snapshots;    ///< snapshots in the frame-k window
  std::string flags;        ///< '|'-joined: trivial, precondition_failed, hypothesis_open, nondegenerate
};

enum class CascadeTermination { Completed, ResolutionExhausted, NondegenerateBranch };

const char* to_string(CascadeTermination t) noexcept;

struct CascadeResult {
  std::vector<CascadeRecord> records;
  CascadeTermination termination = CascadeTermination::Completed;
  std::string note;
  DriftPath path;  ///< accumulated physical drift over the last window
  double A;
  double T;

  /// C_k - C_{k-1} for k >= 1.
  std::vector<double> slant_increments() const;
};

/// Thrown (as an fpme::Error with code OscillationNotReduced) with the
/// records gathered so far.
class CascadeFailure : public Error {
public:
  CascadeFailure(std::string message, CascadeResult partial);
  const CascadeResult& partial() const noexcept { return partial_; }

private:
  CascadeResult partial_;
};

/// Runs the transport-corrected cascade around `base` (the frame of step 0;
/// its amplitude must make uhat <= 1 on Q_4). Step k uses amplitude
/// base.amplitude A^{-k} and space base.space B^k:
///  (a) the drift W-integral around the current axis at each snapshot of
///      the window, W = Psi (k = 0) or Psi - Psi(./B) (k >= 1), in frame-k
///      units;
///  (b) the axis path gains its time integral (anchored at t0);
///  (c) C' = 1 + max_t |V_k|; the reduced cylinder is Q_{4/C'};
///  (d) when the reduced-cylinder sup is <= 1 and its {uhat > 1/2} fraction
///      is <= delta, the quarter-cylinder sup must be <= 1 - mu (else
///      CascadeFailure); a fraction >= 1 - delta on Q_4 ends the cascade
///      with NondegenerateBranch;
///  (e) rescale and repeat.
/// C_0 = max|V_0|, C_k = C_{k-1} + (A B^{1-2s})^k max|V_k|.
/// Stops early with ResolutionExhausted when the physical radius of Q_4 is
/// under min_cells cells or the window holds fewer than min_snapshots
/// snapshots. InvalidScale when T <= 1 (windows would not nest).
CascadeResult iteration_cascade(const Trajectory& traj, const Frame& base, const CascadeParams& params);

/// cascade.csv body: k,A^k,B^k,T^k,sup_osc,corr_speed,C_k,flags.
std::string cascade_csv(const CascadeResult& result);
/// gamma.csv body: t,gamma_1[,gamma_2].
std::string gamma_csv(const DriftPath& path, int dim);

struct ResidualBasket {
  /// Test-function centers relative to the center of mass of the first snapshot.
  std::vector<Vec> offsets{{-1.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
  double width = 1.0;
};

/// Weak residual of u_t + div(u W) = 0 with W = v(u~) - gamma'(t) on the
/// frame-shifted trajectory u~(x') = u(x' + gamma(t)), against
/// eta_j(x, t) = exp(-|x - c_j|^2 / (2 w^2)) sin^2(pi (t - t_a) / (t_b - t_a)),
/// trapezoid in time over the snapshots. Returns max_j |R_j| / sum of the
/// absolute terms of R_j (0 when that sum is 0). An empty path means
/// gamma = 0. Needs >= 3 snapshots.
double transformed_residual(const Trajectory& traj, const DriftPath& path, const ResidualBasket& basket = {});

/// Tail integral of |grad L(y) Psi(y) - grad L(y - x)| over |y| >= rho in 1D:
/// midpoint rule with step dy up to `cutoff`, plus the integral of the
/// leading |g| (2 - 2s) |x| |y|^{2s-3} decay beyond it. Requires rho > |x| + 2 eps_c.
double kernel_difference_tail(double s, double x, double rho, const CutoffFamily& family, double dy = 1e-3,
                              double cutoff = 1e4);

}  // namespace fpme
