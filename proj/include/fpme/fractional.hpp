#pragma once

/// @file fractional.hpp
/// @brief Fractional Laplacian powers, Riesz and Hilbert transforms, Riesz
///        kernels and the order-one energy form B.
///
/// All spectral operators act on the mean-free part of a field: symbols that
/// are singular or vanish at xi = 0 map the zero mode to 0.

#include <string>
#include <vector>

#include "fpme/grid.hpp"

namespace fpme {

/// Constants of the Riesz potential L_s(x) = c(N,s) |x|^{-N+2s}, the
/// realization of (-Delta)^{-s} in R^N.
struct RieszKernel {
  int dim;
  double s;

  /// c(N,s) = Gamma(N/2 - s) / (4^s pi^{N/2} Gamma(s)). NotApplicable when
  /// N <= 2s (logarithmic or growing kernel; only the gradient is used).
  double potential_constant() const;
  /// g(N,s) with grad L_s(x) = g |x|^{2s-N-2} x; finite for every N >= 1.
  double gradient_constant() const;
  /// c_N = Gamma((N+1)/2) pi^{-(N+1)/2}, the singular-integral constant of
  /// the velocity v = -R u.
  static double velocity_constant(int dim);
  /// Constant C'_N of the difference-quotient form of B, equal to c_N / 2.
  static double form_constant(int dim);
};

/// Throws InvalidOrder unless 0 < s < 1.
void check_order(double s);

/// p = (-Delta)^{-s} u (symbol |xi|^{-2s}, mean mapped to 0).
Field inv_frac_laplacian(const Field& u, double s);
/// (-Delta)^{s} u (symbol |xi|^{2s}).
Field frac_laplacian(const Field& u, double s);
/// (-Delta)^{1/4} u.
Field quarter_op(const Field& u);

/// v = -R u, component k with symbol -i xi_k / |xi|.
std::vector<Field> riesz_velocity(const Field& u);

/// v = -grad (-Delta)^{-s} u, symbol -i xi |xi|^{-2s}; equals riesz_velocity
/// at s = 1/2. With `dealias` the 2/3 rule removes modes with |k_a| > n/3.
std::vector<Field> pressure_velocity(const Field& u, double s, bool dealias = false);

/// 1D Hilbert transform, symbol -i sign(xi). Under this sign the transport
/// velocity of the 1D flow is v = -R u = H u. DimensionError unless dim = 1.
Field hilbert_transform(const Field& u);

/// B(v, w) = sum_xi |xi| vhat conj(what) * volume, i.e. the L2 pairing of
/// (-Delta)^{1/4} v and (-Delta)^{1/4} w. Normative definition of B.
double bilinear_form_spectral(const Field& v, const Field& w);

/// Generalization with symbol |xi|^{2 sigma}: sum |xi|^{2 sigma} vhat conj(what) * volume.
double spectral_energy(const Field& v, const Field& w, double sigma);

/// Largest grid (total cells) accepted by the kernel-quadrature oracle.
inline constexpr std::size_t kKernelOracleMaxCells = std::size_t{1} << 16;

/// Direct O(M^2) quadrature of
///   C'_N sum_{x != y} (v(x)-v(y)) (w(x)-w(y)) / |x-y|^{N+1} dx dy
/// with the kernel periodized over all images of the box (closed form in 1D,
/// image sum plus far-field integral in 2D). Offsets within `diag_exclusion`
/// cells of the diagonal (a (2e+1)^N block) are replaced by the exact integral
/// of the first-order Taylor term over that block. Cross-check oracle only.
double bilinear_form_kernel(const Field& v, const Field& w, int diag_exclusion = 0);

/// grad L_s(x) in dimension `dim`. SingularPoint at x = 0.
Vec grad_riesz_kernel(const Vec& x, double s, int dim);

/// Empirical C'_N: ratio of the spectral form to the unit-constant kernel
/// quadrature on a Gaussian bump of the given width.
struct KernelCalibration {
  int dim;
  int cells;
  double half_width;
  double bump_width;
  double calibrated;
  double analytic;
  double relative_gap;
};
KernelCalibration calibrate_form_constant(int dim, int cells, double half_width, double bump_width);

/// Versioned TSV of the kernel constants (c(N,s), g(N,s), c_N, C'_N with its
/// calibration) for audit trails.
std::string constants_table();

}  // namespace fpme
