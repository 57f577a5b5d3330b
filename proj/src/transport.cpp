#include "fpme/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "fpme/fractional.hpp"

namespace fpme {

namespace {

double vec_norm(const Vec& v, int dim) {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += v[a] * v[a];
  return std::sqrt(s);
}

// Index offset of a cell from the cell nearest to `center`, per axis,
// wrapped to the torus.
int cell_offset(const Grid& g, double x, double c) {
  const int n = g.cells();
  long ci = std::lround((c + g.half_width()) / g.dx());
  long xi = std::lround((x + g.half_width()) / g.dx());
  long d = ((xi - ci) % n + n) % n;
  if (d > n / 2) d -= n;
  return static_cast<int>(d);
}

double sphere_area(int dim) { return dim == 1 ? 2.0 : 2.0 * std::numbers::pi; }

double gradient_constant(int dim, double s) { return RieszKernel{dim, s}.gradient_constant(); }

// Slope of the piecewise-linear gamma on the segment starting at t (the last
// segment at the final node).
Vec path_slope(const DriftPath& p, double t) {
  Vec out{};
  if (p.times.size() < 2) return out;
  auto it = std::upper_bound(p.times.begin(), p.times.end(), t);
  std::size_t j = static_cast<std::size_t>(it - p.times.begin());
  j = std::clamp<std::size_t>(j, 1, p.times.size() - 1);
  const double h = p.times[j] - p.times[j - 1];
  for (int a = 0; a < kMaxDim; ++a) out[a] = (p.gamma[j][a] - p.gamma[j - 1][a]) / h;
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Drift integrals

Vec drift_integral(const Field& u, double s, const Vec& center, const std::function<double(double)>& weight,
                   int exclude_cells) {
  check_order(s);
  require(exclude_cells == 0 || exclude_cells % 2 == 1, ErrorCode::InvalidArgument,
          "exclusion block must be 0 or odd");
  const Grid& g = u.grid();
  const int dim = g.dim();
  const int m = exclude_cells / 2;
  const double gc = gradient_constant(dim, s);
  const double dv = g.cell_volume();
  Vec sum{};
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (u[i] == 0.0) continue;
    const Vec x = g.position(i);
    if (exclude_cells > 0) {
      bool inside = true;
      for (int a = 0; a < dim && inside; ++a) inside = std::abs(cell_offset(g, x[a], center[a])) <= m;
      if (inside) continue;
    }
    const Vec y = g.displacement(x, center);
    const double r = g.norm(y);
    if (r == 0.0) continue;
    const double w = weight(r);
    if (w == 0.0) continue;
    const double k = gc * std::pow(r, 2.0 * s - dim - 2.0) * w * u[i] * dv;
    for (int a = 0; a < dim; ++a) sum[a] += k * y[a];
  }
  return sum;
}

DriftResult drift_velocity_full(const Field& u, double s, const Vec& center) {
  auto one = [](double) { return 1.0; };
  DriftResult r;
  r.inner = drift_integral(u, s, center, one, 1);
  r.outer = drift_integral(u, s, center, one, 3);
  r.velocity = r.inner;
  const int dim = u.grid().dim();
  Vec diff{};
  for (int a = 0; a < dim; ++a) diff[a] = r.inner[a] - r.outer[a];
  const double scale = std::max(vec_norm(r.inner, dim), vec_norm(r.outer, dim));
  r.ill_conditioned = scale > 0.0 && vec_norm(diff, dim) > 0.1 * scale;
  r.bound = std::numeric_limits<double>::infinity();
  return r;
}

DriftResult drift_velocity_cutoff(const Field& u, const CutoffFamily& family, double s, const Vec& center,
                                  double scale) {
  family.validate();
  require(scale > 0.0, ErrorCode::InvalidScale, "cutoff scale must be positive");
  const Grid& g = u.grid();
  DriftResult r;
  r.velocity = drift_integral(u, s, center, [&](double rad) { return family.transport_cutoff(scale * rad); }, 0);
  double l1 = 0.0;
  for (double v : u.values()) l1 += std::abs(v);
  l1 *= g.cell_volume();
  r.bound = std::abs(gradient_constant(g.dim(), s)) * std::pow(family.eps_c / scale, 2.0 * s - g.dim() - 1.0) * l1;
  return r;
}

DriftResult annular_correction_speed(const Field& u, double B, const CutoffFamily& family, double s,
                                     const Vec& center, double scale) {
  family.validate();
  if (!(B > 1.0)) fail(ErrorCode::InvalidScale, "annular correction needs B > 1");
  require(scale > 0.0, ErrorCode::InvalidScale, "cutoff scale must be positive");
  const Grid& g = u.grid();
  const int dim = g.dim();
  DriftResult r;
  r.velocity = drift_integral(
      u, s, center,
      [&](double rad) { return family.transport_cutoff(scale * rad) - family.transport_cutoff(scale * rad / B); }, 0);
  const double r1 = family.eps_c / scale;
  const double r2 = 2.0 * B * family.eps_c / scale;
  double sup = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double rad = g.norm(g.displacement(g.position(i), center));
    if (rad >= r1 && rad <= r2) sup = std::max(sup, std::abs(u[i]));
  }
  const double e = 2.0 * s - 1.0;
  const double radial = std::abs(e) < 1e-12 ? std::log(r2 / r1) : (std::pow(r2, e) - std::pow(r1, e)) / e;
  r.bound = std::abs(gradient_constant(dim, s)) * sphere_area(dim) * radial * sup;
  return r;
}

// ---------------------------------------------------------------------------
// Frames

Trajectory apply_moving_frame(const Trajectory& traj, const DriftPath& path) {
  const Grid& g = traj.grid;
  Trajectory out{g, traj.config, traj.times, {}, {}, traj.energies};
  out.fields.reserve(traj.fields.size());
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const Vec shift = path.at(traj.times[i]);
    if (vec_norm(shift, g.dim()) >= 0.5 * g.half_width())
      fail(ErrorCode::ExcessiveDrift, "frame displacement reaches L/2 at t = " + std::to_string(traj.times[i]));
    out.fields.push_back(translate(traj.fields[i], shift));
  }
  return out;
}

DriftPath negate(const DriftPath& path) {
  DriftPath p = path;
  for (Vec& v : p.gamma)
    for (double& c : v) c = -c;
  for (Vec& v : p.speed)
    for (double& c : v) c = -c;
  return p;
}

RescalingReport velocity_rescaling_check(const Field& u, double A, double B, double s, RescalingMode mode,
                                         const CutoffFamily& family, const Vec& center) {
  check_order(s);
  if (!(A > 0.0) || !(B >= 1.0)) fail(ErrorCode::InvalidScale, "rescaling needs A > 0 and B >= 1");
  const int dim = u.grid().dim();
  Field u2 = dilate(u, center, B) * (1.0 / A);
  RescalingReport rep;
  rep.factor = A * std::pow(B, 1.0 - 2.0 * s);
  Vec v2{};
  if (mode == RescalingMode::Full) {
    rep.lhs = drift_velocity_full(u, s, center).velocity;
    v2 = drift_velocity_full(u2, s, Vec{}).velocity;
  } else {
    rep.lhs = drift_velocity_cutoff(u, family, s, center, 1.0).velocity;
    v2 = drift_velocity_cutoff(u2, family, s, Vec{}, 1.0 / B).velocity;
  }
  Vec diff{};
  for (int a = 0; a < dim; ++a) {
    rep.rhs[a] = rep.factor * v2[a];
    diff[a] = rep.lhs[a] - rep.rhs[a];
  }
  const double ref = vec_norm(rep.lhs, dim);
  rep.mismatch = ref > 1e-300 ? vec_norm(diff, dim) / ref : vec_norm(diff, dim);
  return rep;
}

// ---------------------------------------------------------------------------
// Cascade

void CascadeParams::validate() const {
  require(mu > 0.0 && mu <= 0.5, ErrorCode::InvalidArgument, "mu must lie in (0, 1/2]");
  if (!(B > 1.0)) fail(ErrorCode::InvalidScale, "cascade needs B > 1");
  require(k_max >= 1, ErrorCode::InvalidArgument, "k_max must be >= 1");
  require(delta > 0.0 && delta < 0.5, ErrorCode::InvalidArgument, "delta must lie in (0, 1/2)");
  require(min_cells >= 1 && min_snapshots >= 1, ErrorCode::InvalidArgument, "resolution floors must be positive");
  family.validate();
}

const char* to_string(CascadeTermination t) noexcept {
  switch (t) {
    case CascadeTermination::Completed: return "completed";
    case CascadeTermination::ResolutionExhausted: return "resolution_exhausted";
    case CascadeTermination::NondegenerateBranch: return "nondegenerate_branch";
  }
  return "unknown";
}

std::vector<double> CascadeResult::slant_increments() const {
  std::vector<double> d;
  for (std::size_t i = 1; i < records.size(); ++i) d.push_back(records[i].slant - records[i - 1].slant);
  return d;
}

CascadeFailure::CascadeFailure(std::string message, CascadeResult partial)
    : Error(ErrorCode::OscillationNotReduced, message), partial_(std::move(partial)) {}

CascadeResult iteration_cascade(const Trajectory& traj, const Frame& base, const CascadeParams& params) {
  params.validate();
  const Grid& g = traj.grid;
  const int dim = g.dim();
  const double s = traj.config.s;
  require(base.amplitude > 0.0 && base.space > 0.0, ErrorCode::InvalidScale, "frame scales must be positive");
  CascadeResult res;
  res.A = 1.0 - params.mu;
  res.T = res.A * std::pow(params.B, 2.0 - 2.0 * s);
  if (!(res.T > 1.0)) fail(ErrorCode::InvalidScale, "time factor A B^{2-2s} must exceed 1");
  const double slant_step = res.A * std::pow(params.B, 1.0 - 2.0 * s);
  const CutoffFamily& fam = params.family;

  DriftPath path;  // empty: axis fixed at x0
  double slant = 0.0;
  for (int k = 0; k < params.k_max; ++k) {
    Frame fk = base;
    fk.s = s;
    fk.amplitude = base.amplitude * std::pow(res.A, -k);
    fk.space = base.space * std::pow(params.B, k);
    const double radius = 4.0 / fk.space;
    if (radius >= g.half_width()) fail(ErrorCode::OutOfDomain, "Q_4 does not fit in the box");
    if (radius < params.min_cells * g.dx()) {
      res.termination = CascadeTermination::ResolutionExhausted;
      res.note = "Q_4 radius " + fmt(radius) + " below " + std::to_string(params.min_cells) + " cells at step " +
                 std::to_string(k);
      break;
    }
    const double t_lo = fk.physical_time(-4.0);
    const double slack = 1e-12 * std::max(1.0, std::abs(fk.t0));
    if (t_lo < traj.times.front() - slack) fail(ErrorCode::OutOfDomain, "cascade window starts before the data");
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < traj.times.size(); ++i)
      if (traj.times[i] >= t_lo - slack && traj.times[i] <= fk.t0 + slack) idx.push_back(i);
    if (static_cast<int>(idx.size()) < params.min_snapshots || idx.size() < 2) {
      res.termination = CascadeTermination::ResolutionExhausted;
      res.note = std::to_string(idx.size()) + " snapshots in the window at step " + std::to_string(k);
      break;
    }

    // (a) drift integrals in physical units around the current axis.
    std::vector<double> times;
    std::vector<Vec> phys;
    double corr = 0.0;
    const double to_normal = fk.space / fk.time_scale();
    for (std::size_t i : idx) {
      const double t = traj.times[i];
      Vec c = fk.x0;
      if (!path.empty()) {
        Vec gp = path.at(t);
        for (int a = 0; a < dim; ++a) c[a] += gp[a];
      }
      const Field& u = traj.fields[i];
      Vec I = k == 0 ? drift_velocity_cutoff(u, fam, s, c, fk.space).velocity
                     : annular_correction_speed(u, params.B, fam, s, c, fk.space).velocity;
      times.push_back(t);
      phys.push_back(I);
      corr = std::max(corr, to_normal * vec_norm(I, dim));
    }

    // (b) accumulate the path on this window.
    DriftPath step = integrate_path(times, phys, fk.t0);
    DriftPath next{times, std::vector<Vec>(times.size(), Vec{}), std::vector<Vec>(times.size(), Vec{})};
    for (std::size_t j = 0; j < times.size(); ++j) {
      Vec prev = path.empty() ? Vec{} : path.at(times[j]);
      Vec prev_speed = path.empty() ? Vec{} : path_slope(path, times[j]);
      for (int a = 0; a < kMaxDim; ++a) {
        next.gamma[j][a] = prev[a] + step.gamma[j][a];
        next.speed[j][a] = prev_speed[a] + phys[j][a];
      }
    }
    path = std::move(next);

    // (c), (d)
    CascadeRecord rec;
    rec.k = k;
    rec.amplitude_factor = std::pow(res.A, k);
    rec.space_factor = std::pow(params.B, k);
    rec.time_factor = std::pow(res.T, k);
    rec.corr_speed = corr;
    rec.c_prime = 1.0 + corr;
    rec.physical_radius = radius;
    rec.snapshots = idx.size();
    slant = k == 0 ? corr : slant + std::pow(slant_step, k) * corr;
    rec.slant = slant;

    const Cylinder q4{4.0, -4.0, 0.0};
    const Cylinder reduced{4.0 / rec.c_prime, -4.0 / rec.c_prime, 0.0};
    const Cylinder quarter{1.0 / rec.c_prime, -1.0 / rec.c_prime, 0.0};
    const double pull_up = level_set_fraction(traj, fk, q4, 0.5, LevelSense::AtLeast, &path);
    rec.precondition_sup = cylinder_extremes(traj, fk, reduced, &path).sup;
    rec.upper_fraction = level_set_fraction(traj, fk, reduced, 0.5, LevelSense::Above, &path);
    rec.sup_osc = cylinder_extremes(traj, fk, quarter, &path).sup;

    std::vector<std::string> flags;
    if (rec.sup_osc == 0.0 && corr == 0.0) flags.push_back("trivial");
    const bool precondition = rec.precondition_sup <= 1.0 + 1e-12;
    if (!precondition) flags.push_back("precondition_failed");
    const bool degenerate_hyp = rec.upper_fraction <= params.delta;
    if (!degenerate_hyp) flags.push_back("hypothesis_open");
    const bool nondegenerate = pull_up >= 1.0 - params.delta;
    if (nondegenerate) flags.push_back("nondegenerate");
    for (std::size_t i = 0; i < flags.size(); ++i) rec.flags += (i ? "|" : "") + flags[i];
    res.records.push_back(rec);
    res.path = path;

    if (nondegenerate) {
      res.termination = CascadeTermination::NondegenerateBranch;
      res.note = "pull-up alternative at step " + std::to_string(k) + " (fraction " + fmt(pull_up) + ")";
      return res;
    }
    if (precondition && degenerate_hyp && rec.sup_osc > 1.0 - params.mu) {
      throw CascadeFailure("quarter-cylinder sup " + fmt(rec.sup_osc) + " exceeds 1 - mu at step " +
                               std::to_string(k),
                           res);
    }
  }
  return res;
}

std::string cascade_csv(const CascadeResult& result) {
  std::ostringstream os;
  os << "k,A^k,B^k,T^k,sup_osc,corr_speed,C_k,flags\n";
  for (const CascadeRecord& r : result.records)
    os << r.k << ',' << fmt(r.amplitude_factor) << ',' << fmt(r.space_factor) << ',' << fmt(r.time_factor) << ','
       << fmt(r.sup_osc) << ',' << fmt(r.corr_speed) << ',' << fmt(r.slant) << ',' << r.flags << '\n';
  return os.str();
}

std::string gamma_csv(const DriftPath& path, int dim) {
  std::ostringstream os;
  os << 't';
  for (int a = 0; a < dim; ++a) os << ",gamma_" << a + 1;
  os << '\n';
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    os << fmt(path.times[i]);
    for (int a = 0; a < dim; ++a) os << ',' << fmt(path.gamma[i][a]);
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Weak residual

double transformed_residual(const Trajectory& traj, const DriftPath& path, const ResidualBasket& basket) {
  const std::size_t n = traj.times.size();
  require(n >= 3, ErrorCode::InsufficientData, "weak residual needs at least 3 snapshots");
  require(!basket.offsets.empty(), ErrorCode::InvalidArgument, "empty test basket");
  const Grid& g = traj.grid;
  const int dim = g.dim();
  const double s = traj.config.s;
  const Trajectory moved = path.empty() ? traj : apply_moving_frame(traj, path);

  const Field& first = moved.fields.front();
  const double mass = integrate(first);
  if (mass == 0.0 && first.max() == 0.0) {
    bool all_zero = true;
    for (const Field& f : moved.fields) all_zero = all_zero && f.max() == 0.0 && f.min() == 0.0;
    if (all_zero) return 0.0;
  }
  Vec com{};
  if (mass != 0.0) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      Vec x = g.position(i);
      for (int a = 0; a < dim; ++a) com[a] += x[a] * first[i];
    }
    for (int a = 0; a < dim; ++a) com[a] *= g.cell_volume() / mass;
  }
  double w = basket.width;
  if (!(w > 0.0)) w = std::max(0.5 * support_radius(first, kSupportThreshold * first.max()), 4.0 * g.dx());

  const double ta = moved.times.front();
  const double tb = moved.times.back();
  const double span = tb - ta;
  require(span > 0.0, ErrorCode::InsufficientData, "trajectory has zero duration");
  const double om = std::numbers::pi / span;

  std::vector<double> res(basket.offsets.size(), 0.0);
  std::vector<double> absval(basket.offsets.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = moved.times[i];
    double wt = 0.0;
    if (i > 0) wt += 0.5 * (t - moved.times[i - 1]);
    if (i + 1 < n) wt += 0.5 * (moved.times[i + 1] - t);
    const double st = std::sin(om * (t - ta));
    const double time_fn = st * st;
    const double time_dot = 2.0 * om * st * std::cos(om * (t - ta));
    const Field& u = moved.fields[i];
    std::vector<Field> v = pressure_velocity(u, s, traj.config.dealias);
    Vec gdot = path.empty() ? Vec{} : path_slope(path, t);
    for (std::size_t j = 0; j < basket.offsets.size(); ++j) {
      Vec c{};
      for (int a = 0; a < dim; ++a) c[a] = com[a] + basket.offsets[j][a] * w;
      double r = 0.0, ab = 0.0;
      for (std::size_t q = 0; q < g.size(); ++q) {
        if (u[q] == 0.0) continue;
        const Vec d = g.displacement(g.position(q), c);
        const double r2 = [&] {
          double acc = 0.0;
          for (int a = 0; a < dim; ++a) acc += d[a] * d[a];
          return acc;
        }();
        const double gauss = std::exp(-r2 / (2.0 * w * w));
        const double term_t = u[q] * gauss * time_dot;
        double term_x = 0.0;
        for (int a = 0; a < dim; ++a) term_x += (v[a][q] - gdot[a]) * (-d[a] / (w * w)) * gauss;
        term_x *= u[q] * time_fn;
        r += term_t + term_x;
        ab += std::abs(term_t) + std::abs(term_x);
      }
      res[j] += wt * r * g.cell_volume();
      absval[j] += wt * ab * g.cell_volume();
    }
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < res.size(); ++j)
    if (absval[j] > 0.0) worst = std::max(worst, std::abs(res[j]) / absval[j]);
  return worst;
}

double kernel_difference_tail(double s, double x, double rho, const CutoffFamily& family, double dy, double cutoff) {
  check_order(s);
  family.validate();
  require(rho > std::abs(x) + 2.0 * family.eps_c, ErrorCode::InvalidArgument, "tail radius too small");
  require(dy > 0.0 && cutoff > rho, ErrorCode::InvalidArgument, "bad tail quadrature parameters");
  const double gc = gradient_constant(1, s);
  auto grad = [&](double y) { return gc * std::pow(std::abs(y), 2.0 * s - 3.0) * y; };
  const long steps = static_cast<long>(std::ceil((cutoff - rho) / dy));
  const double h = (cutoff - rho) / static_cast<double>(steps);
  double sum = 0.0;
  for (long i = 0; i < steps; ++i) {
    const double y = rho + (static_cast<double>(i) + 0.5) * h;
    for (double sg : {1.0, -1.0}) {
      const double yy = sg * y;
      sum += std::abs(grad(yy) * family.transport_cutoff(y) - grad(yy - x)) * h;
    }
  }
  // Beyond the cutoff |grad L(y) - grad L(y - x)| ~ |g| (2 - 2s) |x| |y|^{2s-3},
  // whose integral over |y| > cutoff is 2 |g| |x| cutoff^{2s-2}.
  sum += 2.0 * std::abs(gc) * std::abs(x) * std::pow(cutoff, 2.0 * s - 2.0);
  return sum;
}

}  // namespace fpme
