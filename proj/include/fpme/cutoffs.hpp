#pragma once

/// @file cutoffs.hpp
/// @brief Cutoff functions of the truncation arguments: the phi_k ladder, the
///        outer envelope, the barrier psi_{eps,lambda} and the radial
///        transport cutoff Psi.

#include "fpme/grid.hpp"

namespace fpme {

struct CutoffFamily {
  /// Wing exponent of the envelope and of phi_k.
  double epsilon = 0.05;
  /// Geometric constant C of the generalized ladder (C = 4 is the classical one).
  double c_geom = 4.0;
  /// Inner radius of the transport cutoff Psi (Psi = 0 below, 1 beyond 2 eps_c).
  double eps_c = 0.5;

  /// Throws InvalidArgument on epsilon outside (0,1), c_geom < 4, eps_c <= 0.
  void validate() const;

  /// 1 + (|x|^eps - 2)_+.
  double envelope(double r) const;
  /// 1 - 1/(2C) + r^2/(4C) - C^{-k}/2.
  double phi_bar(int k, double r) const;
  /// min(envelope, phi_bar_k).
  double phi(int k, double r) const;
  /// Limit of phi_bar_k as k -> infinity.
  double phi_inf(double r) const;
  /// phi_bar_k - phi_bar_{k-1} = (C - 1) C^{-k} / 2, the step on {phi_k < 1}.
  double phi_increment(int k) const;
  /// Ladder times T_k = -2 (1 + 2^{-k}).
  static double ladder_time(int k);

  /// ((r - lambda^{-4/s})^eps - 1)_+ for r >= lambda^{-4/s}, 0 otherwise.
  static double barrier(double r, double eps, double lambda, double s);

  /// Radial C^2 ramp: 0 for r <= eps_c, 1 for r >= 2 eps_c, quintic smoothstep
  /// in between.
  double transport_cutoff(double r) const;
};

/// Quintic smoothstep 6t^5 - 15t^4 + 10t^3 clamped to [0,1].
double smoothstep5(double t);

}  // namespace fpme
