#include "fpme/fractional.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "fpme/error.hpp"

namespace fpme {

namespace {

double norm_of(const Vec& xi, int dim) {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += xi[a] * xi[a];
  return std::sqrt(s);
}

Field power_multiplier(const Field& u, double exponent) {
  const int dim = u.grid().dim();
  return apply_multiplier(u, [dim, exponent](const Vec& xi, const Index&) -> Complex {
    double r = norm_of(xi, dim);
    if (r == 0.0) return 0.0;
    return std::pow(r, exponent);
  });
}

// Periodized kernel sum_m |z + 2Lm|^{-(N+1)} by periodic offset, zero inside
// the excluded diagonal block. 1D uses the closed form
// sum_m (z + Pm)^{-2} = (pi/P)^2 / sin^2(pi z / P). 2D sums the images with
// |m|_inf <= kImages and adds the far-field integral outside that square,
// int_{|y|_inf > a} |y|^{-3} dy = 4 sqrt(2) / a, divided by the cell area P^2.
constexpr int kImages = 24;

std::vector<double> periodic_kernel_table(const Grid& g, int diag_exclusion) {
  const int n = g.cells();
  const int dim = g.dim();
  const double dx = g.dx();
  const double period = 2.0 * g.half_width();
  const double tail = 4.0 * std::sqrt(2.0) / ((kImages + 0.5) * period * period * period);
  std::vector<double> table(g.size());
  for (std::size_t off = 0; off < g.size(); ++off) {
    Index d = g.index(off);
    bool excluded = true;
    Vec z{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) {
      int k = d[a] > n / 2 ? d[a] - n : d[a];
      if (std::abs(k) > diag_exclusion) excluded = false;
      z[a] = k * dx;
    }
    if (excluded) {
      table[off] = 0.0;
    } else if (dim == 1) {
      const double sn = std::sin(std::numbers::pi * z[0] / period);
      table[off] = (std::numbers::pi / period) * (std::numbers::pi / period) / (sn * sn);
    } else {
      double acc = 0.0;
      for (int m1 = -kImages; m1 <= kImages; ++m1)
        for (int m2 = -kImages; m2 <= kImages; ++m2) {
          const double a = z[0] + m1 * period;
          const double b = z[1] + m2 * period;
          const double r2 = a * a + b * b;
          acc += 1.0 / (r2 * std::sqrt(r2));
        }
      table[off] = acc + tail;
    }
  }
  return table;
}

bool outside_two_thirds(const Grid& g, const Index& slot) {
  const int limit = g.cells() / 3;
  for (int a = 0; a < g.dim(); ++a)
    if (std::abs(g.wavenumber(slot[a])) > limit) return true;
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// Kernel constants

double RieszKernel::potential_constant() const {
  check_order(s);
  if (dim <= 2.0 * s) fail(ErrorCode::NotApplicable, "Riesz potential is not a power kernel for N <= 2s");
  return std::tgamma(0.5 * dim - s) / (std::pow(4.0, s) * std::pow(std::numbers::pi, 0.5 * dim) * std::tgamma(s));
}

double RieszKernel::gradient_constant() const {
  check_order(s);
  // c(N,s) * (2s - N), written without the pole of Gamma(N/2 - s).
  return -2.0 * std::tgamma(0.5 * dim - s + 1.0) /
         (std::pow(4.0, s) * std::pow(std::numbers::pi, 0.5 * dim) * std::tgamma(s));
}

double RieszKernel::velocity_constant(int dim) {
  return std::tgamma(0.5 * (dim + 1)) * std::pow(std::numbers::pi, -0.5 * (dim + 1));
}

double RieszKernel::form_constant(int dim) { return 0.5 * velocity_constant(dim); }

void check_order(double s) {
  if (!(s > 0.0 && s < 1.0)) fail(ErrorCode::InvalidOrder, "fractional order must lie in (0,1)");
}

// ---------------------------------------------------------------------------
// Operators

Field inv_frac_laplacian(const Field& u, double s) {
  check_order(s);
  return power_multiplier(u, -2.0 * s);
}

Field frac_laplacian(const Field& u, double s) {
  check_order(s);
  return power_multiplier(u, 2.0 * s);
}

Field quarter_op(const Field& u) { return power_multiplier(u, 0.5); }

std::vector<Field> riesz_velocity(const Field& u) { return pressure_velocity(u, 0.5, false); }

std::vector<Field> pressure_velocity(const Field& u, double s, bool dealias) {
  check_order(s);
  const Grid& g = u.grid();
  std::vector<Field> out;
  out.reserve(static_cast<std::size_t>(g.dim()));
  for (int a = 0; a < g.dim(); ++a) {
    out.push_back(apply_multiplier(u, [&g, a, s, dealias](const Vec& xi, const Index& slot) -> Complex {
      if (g.is_nyquist(slot[a])) return 0.0;
      if (dealias && outside_two_thirds(g, slot)) return 0.0;
      double r = norm_of(xi, g.dim());
      if (r == 0.0) return 0.0;
      return {0.0, -xi[a] * std::pow(r, -2.0 * s)};
    }));
  }
  return out;
}

Field hilbert_transform(const Field& u) {
  const Grid& g = u.grid();
  if (g.dim() != 1) fail(ErrorCode::DimensionError, "Hilbert transform is one-dimensional");
  return apply_multiplier(u, [&g](const Vec& xi, const Index& slot) -> Complex {
    if (g.is_nyquist(slot[0]) || xi[0] == 0.0) return 0.0;
    return {0.0, xi[0] > 0.0 ? -1.0 : 1.0};
  });
}

double spectral_energy(const Field& v, const Field& w, double sigma) {
  if (!(v.grid() == w.grid())) fail(ErrorCode::GridError, "fields live on different grids");
  const Grid& g = v.grid();
  SpectralField vh = to_spectral(v);
  SpectralField wh = to_spectral(w);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double r = norm_of(g.wavevector(i), g.dim());
    if (r == 0.0) continue;
    acc += std::pow(r, 2.0 * sigma) * (vh[i] * std::conj(wh[i])).real();
  }
  return acc * g.volume();
}

double bilinear_form_spectral(const Field& v, const Field& w) { return spectral_energy(v, w, 0.5); }

// ---------------------------------------------------------------------------
// Kernel quadrature oracle

double bilinear_form_kernel(const Field& v, const Field& w, int diag_exclusion) {
  if (!(v.grid() == w.grid())) fail(ErrorCode::GridError, "fields live on different grids");
  const Grid& g = v.grid();
  if (g.size() > kKernelOracleMaxCells) fail(ErrorCode::TooLargeForOracle, "kernel quadrature limited to 2^16 cells");
  if (diag_exclusion < 0 || 2 * diag_exclusion + 1 >= g.cells())
    fail(ErrorCode::InvalidArgument, "diagonal exclusion out of range");

  const int n = g.cells();
  const int dim = g.dim();
  const double dx = g.dx();

  std::vector<double> table = periodic_kernel_table(g, diag_exclusion);

  auto vs = v.values();
  auto ws = w.values();
  double total = 0.0;
  if (dim == 1) {
    for (int i = 0; i < n; ++i) {
      double row = 0.0;
      for (int j = 0; j < n; ++j) {
        int off = j - i;
        if (off < 0) off += n;
        row += (vs[i] - vs[j]) * (ws[i] - ws[j]) * table[off];
      }
      total += row;
    }
  } else {
    for (int i1 = 0; i1 < n; ++i1)
      for (int i2 = 0; i2 < n; ++i2) {
        const std::size_t i = static_cast<std::size_t>(i1) * n + i2;
        const double vi = vs[i];
        const double wi = ws[i];
        double row = 0.0;
        for (int j1 = 0; j1 < n; ++j1) {
          int d1 = j1 - i1;
          if (d1 < 0) d1 += n;
          const double* trow = table.data() + static_cast<std::size_t>(d1) * n;
          const double* vrow = vs.data() + static_cast<std::size_t>(j1) * n;
          const double* wrow = ws.data() + static_cast<std::size_t>(j1) * n;
          // j2 - i2 wraps once; split the row into two contiguous runs.
          for (int j2 = i2; j2 < n; ++j2) row += (vi - vrow[j2]) * (wi - wrow[j2]) * trow[j2 - i2];
          for (int j2 = 0; j2 < i2; ++j2) row += (vi - vrow[j2]) * (wi - wrow[j2]) * trow[j2 - i2 + n];
        }
        total += row;
      }
  }
  total *= g.cell_volume() * g.cell_volume();

  // Excluded block: integral of (grad v . z)(grad w . z) / |z|^{N+1} over a
  // cube of side h centred on the diagonal.
  const double h = (2 * diag_exclusion + 1) * dx;
  const double block = dim == 1 ? h : 2.0 * h * std::asinh(1.0);
  auto gv = gradient(v);
  auto gw = gradient(w);
  double local = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double dot = 0.0;
    for (int a = 0; a < dim; ++a) dot += gv[a][i] * gw[a][i];
    local += dot;
  }
  total += local * block * g.cell_volume();

  return RieszKernel::form_constant(dim) * total;
}

Vec grad_riesz_kernel(const Vec& x, double s, int dim) {
  double r2 = 0.0;
  for (int a = 0; a < dim; ++a) r2 += x[a] * x[a];
  if (r2 == 0.0) fail(ErrorCode::SingularPoint, "Riesz kernel gradient is singular at the origin");
  const double g = RieszKernel{dim, s}.gradient_constant();
  const double scale = g * std::pow(r2, 0.5 * (2.0 * s - dim - 2.0));
  Vec out{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) out[a] = scale * x[a];
  return out;
}

KernelCalibration calibrate_form_constant(int dim, int cells, double half_width, double bump_width) {
  Grid g(dim, cells, half_width);
  Field bump = Field::from_function(g, [&](const Vec& x) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += x[a] * x[a];
    return std::exp(-0.5 * r2 / (bump_width * bump_width));
  });
  const double analytic = RieszKernel::form_constant(dim);
  const double spectral = bilinear_form_spectral(bump, bump);
  const double unit_kernel = bilinear_form_kernel(bump, bump, 0) / analytic;
  KernelCalibration c{dim, cells, half_width, bump_width, spectral / unit_kernel, analytic, 0.0};
  c.relative_gap = std::abs(c.calibrated - c.analytic) / c.analytic;
  return c;
}

std::string constants_table() {
  std::ostringstream os;
  os << "# fpme constants v1\n";
  os << "name\tN\ts\tvalue\tnote\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (int dim : {1, 2}) {
    for (double s : {0.25, 0.5, 0.75}) {
      RieszKernel k{dim, s};
      if (dim > 2.0 * s)
        os << "c_potential\t" << dim << '\t' << s << '\t' << num(k.potential_constant()) << "\tL_s(x)=c|x|^(2s-N)\n";
      else
        os << "c_potential\t" << dim << '\t' << s << "\tNA\tkernel not a power for N<=2s\n";
      os << "g_gradient\t" << dim << '\t' << s << '\t' << num(k.gradient_constant()) << "\tgrad L_s(x)=g|x|^(2s-N-2)x\n";
    }
    os << "c_velocity\t" << dim << "\t0.5\t" << num(RieszKernel::velocity_constant(dim))
       << "\tGamma((N+1)/2)pi^(-(N+1)/2)\n";
    os << "C_prime_analytic\t" << dim << "\t0.5\t" << num(RieszKernel::form_constant(dim)) << "\tc_N/2\n";
    KernelCalibration cal = dim == 1 ? calibrate_form_constant(1, 512, 32.0, 0.25)
                                     : calibrate_form_constant(2, 128, 16.0, 0.5);
    os << "C_prime_calibrated\t" << dim << "\t0.5\t" << num(cal.calibrated) << "\tgaussian width "
       << cal.bump_width << ", " << cal.cells << " cells/axis, L=" << cal.half_width << ", gap "
       << num(cal.relative_gap) << "\n";
  }
  return os.str();
}

}  // namespace fpme
