#include "fpme/cutoffs.hpp"

#include <algorithm>
#include <cmath>

#include "fpme/error.hpp"

namespace fpme {

void CutoffFamily::validate() const {
  require(epsilon > 0.0 && epsilon < 1.0, ErrorCode::InvalidArgument, "epsilon must lie in (0,1)");
  require(c_geom >= 4.0, ErrorCode::InvalidArgument, "geometric constant must be >= 4");
  require(eps_c > 0.0, ErrorCode::InvalidArgument, "cutoff radius must be positive");
}

double CutoffFamily::envelope(double r) const { return 1.0 + std::max(std::pow(r, epsilon) - 2.0, 0.0); }

double CutoffFamily::phi_bar(int k, double r) const {
  return 1.0 - 1.0 / (2.0 * c_geom) + r * r / (4.0 * c_geom) - 0.5 * std::pow(c_geom, -k);
}

double CutoffFamily::phi(int k, double r) const { return std::min(envelope(r), phi_bar(k, r)); }

double CutoffFamily::phi_inf(double r) const { return 1.0 - 1.0 / (2.0 * c_geom) + r * r / (4.0 * c_geom); }

double CutoffFamily::phi_increment(int k) const { return 0.5 * (c_geom - 1.0) * std::pow(c_geom, -k); }

double CutoffFamily::ladder_time(int k) { return -2.0 * (1.0 + std::pow(2.0, -k)); }

double CutoffFamily::barrier(double r, double eps, double lambda, double s) {
  const double r0 = std::pow(lambda, -4.0 / s);
  if (r < r0) return 0.0;
  return std::max(std::pow(r - r0, eps) - 1.0, 0.0);
}

double smoothstep5(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

double CutoffFamily::transport_cutoff(double r) const { return smoothstep5((r - eps_c) / eps_c); }

}  // namespace fpme
