#include "fpme/degiorgi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fpme/error.hpp"
#include "fpme/fractional.hpp"

namespace fpme {

namespace {

constexpr double kTimeSlack = 1e-12;

struct Sample {
  std::size_t index;
  double weight;  // physical time
};

// Snapshots inside [t_lo, t_hi] with midpoint weights whose outer cells are
// stretched to the window ends, so the weights sum to t_hi - t_lo.
std::vector<Sample> window_samples(const Trajectory& traj, double t_lo, double t_hi) {
  require(!traj.times.empty(), ErrorCode::InsufficientData, "trajectory has no snapshots");
  const double slack = kTimeSlack * std::max(1.0, std::abs(traj.times.back()));
  if (t_lo < traj.times.front() - slack || t_hi > traj.times.back() + slack)
    fail(ErrorCode::OutOfDomain, "time window [" + std::to_string(t_lo) + ", " + std::to_string(t_hi) +
                                     "] leaves the trajectory");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < traj.times.size(); ++i)
    if (traj.times[i] >= t_lo - slack && traj.times[i] <= t_hi + slack) idx.push_back(i);
  std::vector<Sample> out;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const double t = traj.times[idx[j]];
    const double lo = j == 0 ? t_lo : 0.5 * (traj.times[idx[j - 1]] + t);
    const double hi = j + 1 == idx.size() ? t_hi : 0.5 * (t + traj.times[idx[j + 1]]);
    out.push_back({idx[j], std::max(hi - lo, 0.0)});
  }
  return out;
}

Vec axis_point(const Frame& frame, const DriftPath* path, double t) {
  Vec c = frame.x0;
  if (path != nullptr && !path->empty()) {
    Vec g = path->at(t);
    for (int a = 0; a < kMaxDim; ++a) c[a] += g[a];
  }
  return c;
}

// Normalized distance |xi| of every cell from the (possibly moving) axis.
std::vector<double> normalized_radii(const Grid& g, const Frame& frame, const Vec& axis) {
  std::vector<double> r(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) r[i] = frame.space * g.norm(g.displacement(g.position(i), axis));
  return r;
}

void check_ball(const Grid& g, const Frame& frame, double radius) {
  if (radius / frame.space >= g.half_width())
    fail(ErrorCode::OutOfDomain, "cylinder ball does not fit in the periodic box");
}

bool satisfies(double v, double level, LevelSense sense) {
  switch (sense) {
    case LevelSense::Above: return v > level;
    case LevelSense::AtLeast: return v >= level;
    case LevelSense::Below: return v < level;
  }
  return false;
}

struct MeasurePair {
  double hit;
  double total;
};

MeasurePair measure_pair(const Trajectory& traj, const Frame& frame, const Cylinder& cyl, double level,
                         LevelSense sense, const DriftPath* path) {
  require(cyl.radius > 0.0 && cyl.tau_high > cyl.tau_low, ErrorCode::InvalidArgument, "degenerate cylinder");
  const Grid& g = traj.grid;
  check_ball(g, frame, cyl.radius);
  const double C = frame.time_scale();
  const double cell = g.cell_volume() * std::pow(frame.space, g.dim());
  MeasurePair m{0.0, 0.0};
  for (const Sample& smp : window_samples(traj, frame.physical_time(cyl.tau_low), frame.physical_time(cyl.tau_high))) {
    const double t = traj.times[smp.index];
    const Field& u = traj.fields[smp.index];
    auto r = normalized_radii(g, frame, axis_point(frame, path, t));
    const double w = smp.weight * C * cell;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (r[i] > cyl.radius) continue;
      m.total += w;
      if (satisfies(frame.amplitude * u[i], level, sense)) m.hit += w;
    }
  }
  if (m.total == 0.0) fail(ErrorCode::OutOfDomain, "cylinder contains no cells");
  return m;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y, double* r_squared) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (r_squared != nullptr) *r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return sxy / sxx;
}

}  // namespace

// ---------------------------------------------------------------------------
// Paths and frames

Vec DriftPath::at(double t) const {
  require(!times.empty(), ErrorCode::OutOfDomain, "empty drift path");
  const double slack = kTimeSlack * std::max(1.0, std::abs(times.back()));
  if (t < times.front() - slack || t > times.back() + slack) fail(ErrorCode::OutOfDomain, "time outside drift path");
  if (t <= times.front()) return gamma.front();
  if (t >= times.back()) return gamma.back();
  auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - times.begin());
  const double h = times[j] - times[j - 1];
  const double w = h > 0.0 ? (t - times[j - 1]) / h : 1.0;
  Vec out{};
  for (int a = 0; a < kMaxDim; ++a) out[a] = (1.0 - w) * gamma[j - 1][a] + w * gamma[j][a];
  return out;
}

DriftPath integrate_path(const std::vector<double>& times, const std::vector<Vec>& speeds, double anchor_time) {
  require(!times.empty() && times.size() == speeds.size(), ErrorCode::InvalidArgument,
          "path needs matching times and speeds");
  for (std::size_t i = 1; i < times.size(); ++i)
    require(times[i] > times[i - 1], ErrorCode::InvalidArgument, "path times must increase");
  DriftPath p{times, std::vector<Vec>(times.size(), Vec{}), speeds};
  for (std::size_t i = 1; i < times.size(); ++i)
    for (int a = 0; a < kMaxDim; ++a) p.gamma[i][a] = p.gamma[i - 1][a] + speeds[i - 1][a] * (times[i] - times[i - 1]);
  Vec anchor = p.at(anchor_time);
  for (Vec& g : p.gamma)
    for (int a = 0; a < kMaxDim; ++a) g[a] -= anchor[a];
  return p;
}

double Frame::time_scale() const { return std::pow(space, 2.0 - 2.0 * s) / amplitude; }

Frame edge_frame(const Trajectory& traj, std::size_t snapshot, double space, double edge_fraction) {
  require(snapshot < traj.times.size(), ErrorCode::OutOfDomain, "snapshot index out of range");
  require(space > 0.0, ErrorCode::InvalidScale, "space scale must be positive");
  const Grid& g = traj.grid;
  const Field& u = traj.fields[snapshot];
  const double sup = u.max();
  require(sup > 0.0, ErrorCode::InsufficientData, "edge frame of a zero field");
  std::size_t best = 0;
  bool found = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (u[i] < edge_fraction * sup) continue;
    if (!found) {
      best = i;
      found = true;
      continue;
    }
    Vec x = g.position(i);
    Vec b = g.position(best);
    if (x[0] > b[0] || (x[0] == b[0] && std::abs(x[1]) < std::abs(b[1]))) best = i;
  }
  Frame f;
  f.x0 = g.position(best);
  f.t0 = traj.times[snapshot];
  f.space = space;
  f.s = traj.config.s;
  // The window length depends on the amplitude; iterate to the fixed point
  // (the sup over a growing window only grows, so this terminates).
  f.amplitude = 1.0 / sup;
  for (int it = 0; it < 200; ++it) {
    const double lo = f.physical_time(-4.0);
    if (lo < traj.times.front()) fail(ErrorCode::OutOfDomain, "normalized window starts before the trajectory");
    double peak = 0.0;
    for (std::size_t i = 0; i <= snapshot; ++i)
      if (traj.times[i] >= lo - kTimeSlack) peak = std::max(peak, traj.fields[i].max());
    // The snapshot just before the window bounds the sup on its left edge.
    for (std::size_t i = 1; i <= snapshot; ++i)
      if (traj.times[i - 1] < lo && traj.times[i] >= lo) peak = std::max(peak, traj.fields[i - 1].max());
    if (1.0 / peak == f.amplitude) break;
    f.amplitude = 1.0 / peak;
  }
  return f;
}

// ---------------------------------------------------------------------------
// Truncations and measures

Truncation truncate(const Field& u, const Field& phi) {
  if (!(u.grid() == phi.grid())) fail(ErrorCode::GridError, "fields live on different grids");
  std::vector<double> plus(u.size());
  std::vector<double> minus(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - phi[i];
    plus[i] = std::max(d, 0.0);
    minus[i] = std::min(d, 0.0);
  }
  return {Field(u.grid(), std::move(plus)), Field(u.grid(), std::move(minus))};
}

double level_set_fraction(const Trajectory& traj, const Frame& frame, const Cylinder& cyl, double level,
                          LevelSense sense, const DriftPath* path) {
  MeasurePair m = measure_pair(traj, frame, cyl, level, sense, path);
  return m.hit / m.total;
}

double level_set_measure(const Trajectory& traj, const Frame& frame, const Cylinder& cyl, double level,
                         LevelSense sense, const DriftPath* path) {
  return measure_pair(traj, frame, cyl, level, sense, path).hit;
}

Extremes cylinder_extremes(const Trajectory& traj, const Frame& frame, const Cylinder& cyl, const DriftPath* path) {
  require(cyl.radius > 0.0 && cyl.tau_high > cyl.tau_low, ErrorCode::InvalidArgument, "degenerate cylinder");
  const Grid& g = traj.grid;
  check_ball(g, frame, cyl.radius);
  Extremes e{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0};
  for (const Sample& smp : window_samples(traj, frame.physical_time(cyl.tau_low), frame.physical_time(cyl.tau_high))) {
    const double t = traj.times[smp.index];
    const Field& u = traj.fields[smp.index];
    auto r = normalized_radii(g, frame, axis_point(frame, path, t));
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (r[i] > cyl.radius) continue;
      const double v = frame.amplitude * u[i];
      e.sup = std::max(e.sup, v);
      e.inf = std::min(e.inf, v);
      ++e.samples;
    }
  }
  if (e.samples == 0) fail(ErrorCode::OutOfDomain, "cylinder contains no cells");
  return e;
}

// ---------------------------------------------------------------------------
// Truncation energies

double truncation_energy(const Trajectory& traj, const Frame& frame, const CutoffFamily& family, int k) {
  family.validate();
  require(k >= 0, ErrorCode::InvalidArgument, "ladder index must be >= 0");
  const Grid& g = traj.grid;
  const double Tk = CutoffFamily::ladder_time(k);
  auto samples = window_samples(traj, frame.physical_time(Tk), frame.t0);
  if (samples.size() < 8) fail(ErrorCode::InsufficientData, "fewer than 8 snapshots in [T_k, 0]");

  const double C = frame.time_scale();
  const double B = frame.space;
  const double volume_factor = std::pow(B, g.dim());
  const double form_factor = std::pow(B, g.dim() - 1);
  auto r = normalized_radii(g, frame, frame.x0);

  double sup_l2 = 0.0;
  double integral = 0.0;
  std::vector<double> w(g.size());
  for (const Sample& smp : samples) {
    const Field& u = traj.fields[smp.index];
    bool any = false;
    for (std::size_t i = 0; i < g.size(); ++i) {
      w[i] = std::max(frame.amplitude * u[i] - family.phi(k, r[i]), 0.0);
      any = any || w[i] > 0.0;
    }
    if (!any) continue;
    Field plus(g, w);
    double l2 = 0.0;
    for (double x : w) l2 += x * x;
    sup_l2 = std::max(sup_l2, l2 * g.cell_volume() * volume_factor);
    integral += smp.weight * C * form_factor * bilinear_form_spectral(plus, plus);
  }
  return sup_l2 + integral;
}

CascadeReport degiorgi_cascade_report(const Trajectory& traj, const Frame& frame, const CutoffFamily& family,
                                      int k_max, double threshold) {
  require(k_max >= 0, ErrorCode::InvalidArgument, "k_max must be >= 0");
  CascadeReport rep{};
  rep.threshold = threshold;
  rep.monotone = true;
  for (int k = 0; k <= k_max; ++k) {
    rep.energies.push_back(truncation_energy(traj, frame, family, k));
    rep.ladder_times.push_back(CutoffFamily::ladder_time(k));
    if (k > 0 && rep.energies[k] > rep.energies[k - 1] * (1.0 + 1e-12)) rep.monotone = false;
  }
  rep.reduced = rep.energies.back() < threshold;
  rep.sup_gamma1 = cylinder_extremes(traj, frame, Cylinder{1.0, -1.0, 0.0}).sup;
  rep.sup_below_7_8 = rep.sup_gamma1 <= 7.0 / 8.0;
  std::vector<double> kx;
  std::vector<double> ly;
  for (std::size_t k = 0; k < rep.energies.size(); ++k)
    if (rep.energies[k] > 0.0) {
      kx.push_back(static_cast<double>(k));
      ly.push_back(std::log(rep.energies[k]));
    }
  rep.decay_rate = kx.size() >= 2 ? least_squares_slope(kx, ly, nullptr) : std::nan("");
  return rep;
}

// ---------------------------------------------------------------------------
// Sobolev ratio and Hoelder estimates

SobolevCheck sobolev_embedding_check(const Field& u) {
  const int dim = u.grid().dim();
  if (dim < 2) fail(ErrorCode::NotApplicable, "the embedding exponent 2N/(N-1) needs N >= 2");
  const double p = 2.0 * dim / (dim - 1.0);
  double lp = 0.0;
  double l2 = 0.0;
  for (double x : u.values()) {
    lp += std::pow(std::abs(x), p);
    l2 += x * x;
  }
  lp *= u.grid().cell_volume();
  l2 *= u.grid().cell_volume();
  SobolevCheck c{};
  c.lhs = std::pow(lp, 2.0 / p);
  c.rhs = bilinear_form_spectral(u, u) + l2;
  c.ratio = c.rhs > 0.0 ? c.lhs / c.rhs : 0.0;
  return c;
}

HolderEstimate holder_estimate(const Trajectory& traj, const Vec& center, double t0, const std::vector<double>& radii,
                               double aspect, const DriftPath* path) {
  if (radii.size() < 3) fail(ErrorCode::InsufficientData, "need at least 3 radii");
  for (std::size_t i = 1; i < radii.size(); ++i)
    require(radii[i] < radii[i - 1] && radii[i] > 0.0, ErrorCode::InvalidArgument, "radii must decrease");
  require(aspect > 0.0, ErrorCode::InvalidArgument, "aspect must be positive");

  double sup_all = 0.0;
  for (const Field& f : traj.fields) sup_all = std::max(sup_all, std::abs(f.max()));
  const double floor = 10.0 * 1e-12 * sup_all;

  Frame frame;
  frame.x0 = center;
  frame.t0 = t0;
  frame.s = traj.config.s;
  HolderEstimate h{radii, {}, std::nan(""), 0.0, false};
  std::vector<double> lx;
  std::vector<double> ly;
  for (double R : radii) {
    const double height = aspect * std::pow(R, 2.0 - 2.0 * frame.s);
    Extremes e = cylinder_extremes(traj, frame, Cylinder{R, -height, 0.0}, path);
    const double osc = e.sup - e.inf;
    h.oscillation.push_back(osc);
    if (osc > floor) {
      lx.push_back(std::log(R));
      ly.push_back(std::log(osc));
    }
  }
  h.degenerate = h.oscillation.back() <= floor;
  if (lx.size() >= 3) h.alpha_hat = least_squares_slope(lx, ly, &h.r_squared);
  return h;
}

// ---------------------------------------------------------------------------
// Lemma audits

bool LemmaAudit::any_falsified() const noexcept {
  return std::any_of(checks.begin(), checks.end(), [](const LemmaCheck& c) { return c.falsified(); });
}

LemmaAudit lemma_hypothesis_audit(const Trajectory& traj, const Frame& frame, const LemmaParams& params,
                                  const CutoffFamily& family) {
  family.validate();
  const Grid& g = traj.grid;
  auto samples = window_samples(traj, frame.physical_time(-4.0), frame.t0);
  auto r = normalized_radii(g, frame, frame.x0);

  // Envelope bounds on the strip.
  bool below_envelope = true;
  bool below_barrier = true;
  for (const Sample& smp : samples) {
    const Field& u = traj.fields[smp.index];
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = frame.amplitude * u[i];
      if (v < 0.0 || v > family.envelope(r[i])) below_envelope = false;
      if (v < 0.0 || v > 1.0 + CutoffFamily::barrier(r[i], family.epsilon, params.lambda, frame.s))
        below_barrier = false;
    }
  }

  const Cylinder gamma4{4.0, -4.0, 0.0};
  const Cylinder gamma1{1.0, -1.0, 0.0};
  Extremes e1 = cylinder_extremes(traj, frame, gamma1);
  LemmaAudit audit;

  const double above = level_set_fraction(traj, frame, gamma4, 0.5, LevelSense::Above);
  audit.checks.push_back({"reg.1", below_envelope && above <= params.delta, e1.sup <= 1.0 - params.mu, above, e1.sup});

  const double atleast = level_set_fraction(traj, frame, gamma4, 0.5, LevelSense::AtLeast);
  audit.checks.push_back(
      {"reg.1b", below_envelope && atleast >= 1.0 - params.delta, e1.inf >= params.mu0, atleast, e1.inf});

  const double below = level_set_fraction(traj, frame, gamma4, 0.5, LevelSense::Below);
  audit.checks.push_back(
      {"reg.2", below_envelope && below >= params.delta0, e1.sup <= 1.0 - params.mu1, below, e1.sup});

  // |{u < phi_0} in B_1 x (-4,-2)| as an absolute normalized measure.
  double hit = 0.0;
  const double C = frame.time_scale();
  const double cell = g.cell_volume() * std::pow(frame.space, g.dim());
  for (const Sample& smp : window_samples(traj, frame.physical_time(-4.0), frame.physical_time(-2.0))) {
    const Field& u = traj.fields[smp.index];
    for (std::size_t i = 0; i < g.size(); ++i)
      if (r[i] <= 1.0 && frame.amplitude * u[i] < family.phi(0, r[i])) hit += smp.weight * C * cell;
  }
  audit.checks.push_back({"lem10.1", below_barrier && hit > params.rho, e1.sup <= 1.0 - params.mu1, hit, e1.sup});
  return audit;
}

// ---------------------------------------------------------------------------
// Wing growth

bool wing_growth_holds(double K, double eps, double lambda, double s, double mu1, int samples, double decades) {
  const double r0 = std::pow(lambda, -4.0 / s);
  const double factor = 1.0 / (1.0 - 0.5 * mu1);
  for (int i = 0; i < samples; ++i) {
    const double r = r0 + std::pow(10.0, -2.0 + (decades + 2.0) * i / (samples - 1.0));
    const double lhs = factor * CutoffFamily::barrier(K * r, eps, lambda, s);
    const double rhs = CutoffFamily::barrier(r, eps, lambda, s);
    if (lhs > rhs * (1.0 + 1e-14)) return false;
  }
  return true;
}

double wing_growth_constant(double eps, double lambda, double s, double mu1, int samples, double decades) {
  require(eps > 0.0 && lambda > 0.0 && lambda < 1.0 && mu1 > 0.0 && mu1 < 1.0, ErrorCode::InvalidArgument,
          "wing growth parameters out of range");
  check_order(s);
  double lo = 0.0;
  double hi = 0.25;
  if (wing_growth_holds(hi * (1.0 - 1e-12), eps, lambda, s, mu1, samples, decades)) return hi * (1.0 - 1e-12);
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (wing_growth_holds(mid, eps, lambda, s, mu1, samples, decades))
      lo = mid;
    else
      hi = mid;
  }
  return lo > 1e-12 ? lo : 0.0;
}

}  // namespace fpme
