#include "fpme/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fpme/error.hpp"
#include "fpme/fractional.hpp"

namespace fpme {

namespace {

constexpr double kSpeedFloor = 1e-14;

// Flat index of the neighbour one cell along `axis` (periodic).
std::size_t neighbour(const Grid& g, std::size_t i, int axis, int dir) {
  Index idx = g.index(i);
  idx[axis] += dir;
  return g.flat(idx);
}

// Face velocities v_face[a][i] on the face between cell i and its +1
// neighbour along axis a.
std::vector<std::vector<double>> face_velocities(const Grid& g, const std::vector<Field>& v) {
  std::vector<std::vector<double>> faces(static_cast<std::size_t>(g.dim()), std::vector<double>(g.size()));
  for (int a = 0; a < g.dim(); ++a)
    for (std::size_t i = 0; i < g.size(); ++i)
      faces[a][i] = 0.5 * (v[a][i] + v[a][neighbour(g, i, a, 1)]);
  return faces;
}

double outgoing_speed(const Grid& g, const std::vector<std::vector<double>>& faces) {
  double best = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double out = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      out += std::max(faces[a][i], 0.0);
      out += std::max(-faces[a][neighbour(g, i, a, -1)], 0.0);
    }
    best = std::max(best, out);
  }
  return best;
}

std::vector<double> euler_update(const Field& u, const std::vector<std::vector<double>>& faces, double dt) {
  const Grid& g = u.grid();
  const double r = dt / g.dx();
  std::vector<std::vector<double>> flux(faces.size(), std::vector<double>(g.size()));
  for (int a = 0; a < g.dim(); ++a)
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double vf = faces[a][i];
      if (vf > 0.0)
        flux[a][i] = u[i] * vf;
      else if (vf < 0.0)
        flux[a][i] = u[neighbour(g, i, a, 1)] * vf;
      else
        flux[a][i] = 0.0;
    }
  std::vector<double> next(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double div = 0.0;
    for (int a = 0; a < g.dim(); ++a) div += flux[a][i] - flux[a][neighbour(g, i, a, -1)];
    next[i] = u[i] - r * div;
  }
  return next;
}

void check_density(std::span<const double> v, ErrorCode code, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!(v[i] >= 0.0) || !std::isfinite(v[i]))
      fail(code, std::string(what) + " at cell " + std::to_string(i) + " (value " + std::to_string(v[i]) + ")");
}

double entropy_of(const Field& u) {
  double acc = 0.0;
  for (double x : u.values())
    if (x > 0.0) acc += x * std::log(x);
  return acc * u.grid().cell_volume();
}

StepRecord record_of(const Field& u, double t, double dt, double threshold) {
  return {t, dt, integrate(u), u.max(), support_radius(u, threshold)};
}

void check_boundary(const Field& u, double threshold, double margin, double t) {
  const Grid& g = u.grid();
  const double limit = g.half_width() * (1.0 - 2.0 * margin);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(u[i] > threshold)) continue;
    Vec x = g.position(i);
    for (int a = 0; a < g.dim(); ++a)
      if (std::abs(x[a]) > limit)
        fail(ErrorCode::BoundaryContact, "support reached the boundary band at t=" + std::to_string(t) +
                                             " (|x|=" + std::to_string(std::abs(x[a])) + " > " +
                                             std::to_string(limit) + ")");
  }
}

}  // namespace

void SolverConfig::validate() const {
  check_order(s);
  require(cfl > 0.0 && cfl <= 1.0, ErrorCode::InvalidArgument, "cfl must lie in (0,1]");
  require(std::isfinite(t_end) && t_end >= 0.0, ErrorCode::InvalidArgument, "t_end must be >= 0");
  require(snapshot_stride >= 1, ErrorCode::InvalidArgument, "snapshot_stride must be >= 1");
  require(boundary_margin > 0.0 && boundary_margin < 0.5, ErrorCode::InvalidArgument,
          "boundary_margin must lie in (0,0.5)");
  require(dt_max > 0.0, ErrorCode::InvalidArgument, "dt_max must be positive");
  for (double t : output_times)
    require(std::isfinite(t) && t >= 0.0, ErrorCode::InvalidArgument, "output times must be >= 0");
}

double max_outgoing_speed(const Grid& g, const std::vector<Field>& v) {
  return outgoing_speed(g, face_velocities(g, v));
}

std::pair<Field, double> step(const Field& u, const SolverConfig& cfg, double dt_cap) {
  check_density(u.values(), ErrorCode::NotNonnegative, "negative density");
  const Grid& g = u.grid();

  auto faces = face_velocities(g, pressure_velocity(u, cfg.s, cfg.dealias));
  double dt = cfg.cfl * g.dx() / std::max(outgoing_speed(g, faces), kSpeedFloor);
  dt = std::min({dt, cfg.dt_max, dt_cap});

  std::vector<double> next;
  if (!cfg.heun) {
    next = euler_update(u, faces, dt);
  } else {
    // Both stages must respect the positivity bound.
    for (;;) {
      std::vector<double> stage = euler_update(u, faces, dt);
      check_density(stage, ErrorCode::NumericalBlowup, "negative or non-finite stage value");
      Field mid(g, std::move(stage));
      auto faces_mid = face_velocities(g, pressure_velocity(mid, cfg.s, cfg.dealias));
      double dt_mid = cfg.cfl * g.dx() / std::max(outgoing_speed(g, faces_mid), kSpeedFloor);
      if (dt_mid < dt) {
        dt = dt_mid;
        continue;
      }
      std::vector<double> second = euler_update(mid, faces_mid, dt);
      next.resize(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) next[i] = 0.5 * (u[i] + second[i]);
      break;
    }
  }
  check_density(next, ErrorCode::NumericalBlowup, "negative or non-finite density after step");
  return {Field(g, std::move(next)), dt};
}

double support_radius(const Field& u, double threshold) {
  const Grid& g = u.grid();
  double r = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (u[i] > threshold) r = std::max(r, g.norm(g.position(i)));
  return r;
}

EnergyRecord energy_state(const Field& u, double s) {
  EnergyRecord e{};
  e.entropy = entropy_of(u);
  e.dissipation = spectral_energy(u, u, 1.0 - s);
  e.potential = 0.5 * spectral_energy(u, u, -s);
  auto v = pressure_velocity(u, s, false);
  double kin = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double v2 = 0.0;
    for (const Field& c : v) v2 += c[i] * c[i];
    kin += u[i] * v2;
  }
  e.kinetic = kin * u.grid().cell_volume();
  return e;
}

Trajectory run(const Field& u0, const SolverConfig& cfg) {
  cfg.validate();
  check_density(u0.values(), ErrorCode::NotNonnegative, "negative initial density");
  const Grid& g = u0.grid();
  const double threshold = kSupportThreshold * u0.max();

  Trajectory traj{g, cfg, {}, {}, {}, {}};
  std::vector<double> targets;
  for (double t : cfg.output_times)
    if (t > 0.0 && t < cfg.t_end) targets.push_back(t);
  targets.push_back(cfg.t_end);
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

  check_boundary(u0, threshold, cfg.boundary_margin, 0.0);
  Field u = u0;
  double t = 0.0;
  traj.times.push_back(t);
  traj.fields.push_back(u);
  traj.series.push_back(record_of(u, t, 0.0, threshold));

  double first_integral = 0.0;
  double second_integral = 0.0;
  auto push_energy = [&](const Field& f, double time) {
    EnergyRecord e = energy_state(f, cfg.s);
    e.t = time;
    e.first = e.entropy + first_integral;
    e.second = e.potential + second_integral;
    traj.energies.push_back(e);
  };
  if (cfg.track_energy) push_energy(u, t);

  std::size_t target = 0;
  long steps = 0;
  while (target < targets.size() && cfg.t_end > 0.0) {
    const double goal = targets[target];
    auto [next, dt] = step(u, cfg, goal - t);
    // Accumulated roundoff would otherwise leave an ulp-sized final step.
    const bool landed = t + dt >= goal - 1e-12 * goal;
    if (cfg.track_energy) {
      // Left rectangle: rates frozen at the start of the step.
      first_integral += traj.energies.back().dissipation * dt;
      second_integral += traj.energies.back().kinetic * dt;
    }
    t = landed ? goal : t + dt;
    u = std::move(next);
    ++steps;

    traj.series.push_back(record_of(u, t, dt, threshold));
    if (cfg.track_energy) push_energy(u, t);
    check_boundary(u, threshold, cfg.boundary_margin, t);
    if (landed || steps % cfg.snapshot_stride == 0) {
      traj.times.push_back(t);
      traj.fields.push_back(u);
    }
    if (landed) ++target;
  }
  return traj;
}

EnergyAudit audit_energy(const Trajectory& traj, double tolerance) {
  EnergyAudit out{0.0, 0.0, 0.0, tolerance, true};
  if (traj.energies.size() < 2) return out;
  const double mass = traj.series.empty() ? 0.0 : traj.series.front().mass;
  auto scale_of = [mass](double e0) {
    double a = std::abs(e0);
    return a > 1e-3 * mass ? a : std::max(mass, 1e-300);
  };
  const double s1 = scale_of(traj.energies.front().first);
  const double s2 = scale_of(traj.energies.front().second);
  out.scale = s1;
  out.max_rate_first = -std::numeric_limits<double>::infinity();
  out.max_rate_second = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n + 1 < traj.energies.size(); ++n) {
    const auto& a = traj.energies[n];
    const auto& b = traj.energies[n + 1];
    const double dt = b.t - a.t;
    if (!(dt > 0.0)) continue;
    out.max_rate_first = std::max(out.max_rate_first, (b.first - a.first) / (dt * s1));
    out.max_rate_second = std::max(out.max_rate_second, (b.second - a.second) / (dt * s2));
  }
  out.pass = out.max_rate_first <= tolerance && out.max_rate_second <= tolerance;
  return out;
}

ScalingReport scaling_check(const Field& u0, double A, double B, const SolverConfig& cfg, int samples) {
  require(A > 0.0 && B > 0.0, ErrorCode::InvalidScale, "scaling factors must be positive");
  require(samples >= 1, ErrorCode::InvalidArgument, "need at least one sample time");
  require(cfg.t_end > 0.0, ErrorCode::InvalidArgument, "scaling check needs t_end > 0");
  const double C = A * std::pow(B, 2.0 - 2.0 * cfg.s);

  SolverConfig base = cfg;
  SolverConfig hat = cfg;
  base.track_energy = false;
  hat.track_energy = false;
  hat.t_end = cfg.t_end / C;
  std::vector<double> t_base;
  std::vector<double> t_hat;
  for (int j = 1; j <= samples; ++j) {
    t_base.push_back(cfg.t_end * j / samples);
    t_hat.push_back(hat.t_end * j / samples);
  }
  base.output_times = t_base;
  hat.output_times = t_hat;

  // Interpolation round-off can leave values like -1e-17 where u0 vanishes.
  std::vector<double> raw = (dilate(u0, Vec{0.0, 0.0, 0.0}, 1.0 / B) * A).release();
  for (double& x : raw) x = std::max(x, 0.0);
  Field uhat0(u0.grid(), std::move(raw));
  Trajectory tr = run(u0, base);
  Trajectory th = run(uhat0, hat);

  auto find = [](const Trajectory& tj, double t) -> const Field& {
    for (std::size_t i = 0; i < tj.times.size(); ++i)
      if (tj.times[i] == t) return tj.fields[i];
    fail(ErrorCode::InsufficientData, "matched snapshot missing");
  };

  ScalingReport rep{A, B, C, {}, {}, 0.0};
  for (int j = 0; j < samples; ++j) {
    const Field& uh = find(th, t_hat[static_cast<std::size_t>(j)]);
    Field ref = dilate(find(tr, t_base[static_cast<std::size_t>(j)]), Vec{0.0, 0.0, 0.0}, 1.0 / B) * A;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < uh.size(); ++i) {
      num = std::max(num, std::abs(uh[i] - ref[i]));
      den = std::max(den, std::abs(uh[i]));
    }
    double d = den > 0.0 ? num / den : num;
    rep.times.push_back(t_hat[static_cast<std::size_t>(j)]);
    rep.discrepancy.push_back(d);
    rep.max_discrepancy = std::max(rep.max_discrepancy, d);
  }
  return rep;
}

double smoothing_alpha(int dim, double s) { return dim / (dim + 2.0 - 2.0 * s); }
double smoothing_gamma(int dim, double s) { return (2.0 - 2.0 * s) / (dim + 2.0 - 2.0 * s); }

SmoothingFit smoothing_exponent_fit(const Trajectory& traj, double t1, double t2) {
  require(t1 > 0.0 && t2 > t1, ErrorCode::InvalidArgument, "fit window must satisfy 0 < t1 < t2");
  std::vector<double> lx;
  std::vector<double> ly;
  auto take = [&](double t, double sup) {
    if (t >= t1 && t <= t2 && sup > 0.0) {
      lx.push_back(std::log(t));
      ly.push_back(std::log(sup));
    }
  };
  if (!traj.series.empty())
    for (const auto& r : traj.series) take(r.t, r.sup);
  else
    for (std::size_t i = 0; i < traj.times.size(); ++i) take(traj.times[i], traj.fields[i].max());
  if (lx.size() < 10) fail(ErrorCode::InsufficientData, "fewer than 10 samples in the fit window");

  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (syy <= 1e-24 * n) fail(ErrorCode::InsufficientData, "sup norm is flat over the fit window");
  const double slope = sxy / sxx;
  const int dim = traj.grid.dim();
  return {-slope, smoothing_alpha(dim, traj.config.s), smoothing_gamma(dim, traj.config.s), sxy * sxy / (sxx * syy),
          lx.size()};
}

}  // namespace fpme
