#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fpme/degiorgi.hpp"
#include "fpme/error.hpp"
#include "fpme/fractional.hpp"

using namespace fpme;
using boost::math::quadrature::gauss_kronrod;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an fpme::Error");
  return ErrorCode::InvalidArgument;
}

// Time-constant trajectory on [0, t_end] with `n` equal steps.
Trajectory frozen(const Field& u, double t_end, int n, double s = 0.5) {
  SolverConfig cfg;
  cfg.s = s;
  cfg.t_end = t_end;
  Trajectory tr{u.grid(), cfg, {}, {}, {}, {}};
  for (int i = 0; i <= n; ++i) {
    tr.times.push_back(t_end * i / n);
    tr.fields.push_back(u);
  }
  return tr;
}

Frame unit_frame(double t0) {
  Frame f;
  f.t0 = t0;
  return f;
}

}  // namespace

TEST_CASE("truncation identities") {
  Grid g(1, 64, 2.0);
  Field phi = Field::from_function(g, [](const Vec& x) { return 0.5 + x[0] * x[0] / 16.0; });
  Truncation t0 = truncate(phi, phi);
  CHECK(t0.plus.max() == 0.0);
  CHECK(t0.minus.min() == 0.0);
  Truncation t1 = truncate(phi + Field::constant(g, 1.0), phi);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(t1.plus[i] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(t1.minus[i] == 0.0);
  }
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  std::vector<double> v(g.size());
  for (double& x : v) x = U(rng);
  Field u(g, v);
  Truncation t = truncate(u, phi);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(t.plus[i] * t.minus[i] == 0.0);
    const double rebuilt = phi[i] + t.plus[i] + t.minus[i];
    CHECK(std::abs(rebuilt - u[i]) <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(u[i]), phi[i]));
  }
  CHECK(code_of([&] { truncate(u, Field::constant(Grid(1, 32, 2.0), 0.0)); }) == ErrorCode::GridError);
}

TEST_CASE("drift paths integrate speeds and anchor at t0") {
  std::vector<double> t{0.0, 0.5, 1.0, 2.0};
  std::vector<Vec> v(4, Vec{2.0, -1.0, 0.0});
  DriftPath p = integrate_path(t, v, 2.0);
  CHECK(p.at(2.0)[0] == doctest::Approx(0.0));
  CHECK(p.at(0.0)[0] == doctest::Approx(-4.0));
  CHECK(p.at(0.75)[1] == doctest::Approx(1.25));
  CHECK(code_of([&] { p.at(2.5); }) == ErrorCode::OutOfDomain);
  CHECK(code_of([&] { integrate_path({0.0, 0.0}, {Vec{}, Vec{}}, 0.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { integrate_path({0.0}, {}, 0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("frame time scale keeps the equation invariant") {
  Frame f;
  f.amplitude = 2.0;
  f.space = 4.0;
  f.s = 0.5;
  CHECK(f.time_scale() == doctest::Approx(2.0));
  f.s = 0.25;
  CHECK(f.time_scale() == doctest::Approx(std::pow(4.0, 1.5) / 2.0));
  f.t0 = 3.0;
  CHECK(f.physical_time(-4.0) == doctest::Approx(3.0 - 4.0 / f.time_scale()));
}

TEST_CASE("level-set fractions and measures on a frozen field") {
  Grid g(1, 256, 4.0);
  Field u = Field::from_function(g, [](const Vec& x) { return std::abs(x[0]); });
  Trajectory tr = frozen(u, 4.0, 40);
  Frame f = unit_frame(4.0);
  Cylinder q{1.0, -2.0, 0.0};
  const double above = level_set_fraction(tr, f, q, 0.5, LevelSense::Above);
  const double below = level_set_fraction(tr, f, q, 0.5, LevelSense::Below);
  const double atleast = level_set_fraction(tr, f, q, 0.5, LevelSense::AtLeast);
  CHECK(above == doctest::Approx(0.5).epsilon(0.05));
  CHECK(atleast + below == doctest::Approx(1.0));
  CHECK(atleast >= above);
  const double total = level_set_measure(tr, f, q, -1.0, LevelSense::Above);
  // Cells within |x| <= 1 (65 of them) times dx times the window length 2.
  CHECK(total == doctest::Approx(65 * g.dx() * 2.0));
  Extremes e = cylinder_extremes(tr, f, q);
  CHECK(e.sup == doctest::Approx(1.0));
  CHECK(e.inf == 0.0);
  CHECK(code_of([&] { level_set_fraction(tr, f, Cylinder{1.0, -5.0, 0.0}, 0.5, LevelSense::Above); }) ==
        ErrorCode::OutOfDomain);
  CHECK(code_of([&] { cylinder_extremes(tr, f, Cylinder{5.0, -1.0, 0.0}); }) == ErrorCode::OutOfDomain);
  CHECK(code_of([&] { cylinder_extremes(tr, f, Cylinder{1.0, 0.0, 0.0}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("moving axis shifts the cylinder") {
  Grid g(1, 256, 8.0);
  Field u = Field::from_function(g, [](const Vec& x) { return x[0] > 2.0 ? 1.0 : 0.0; });
  Trajectory tr = frozen(u, 1.0, 10);
  Frame f = unit_frame(1.0);
  Cylinder q{0.5, -1.0, 0.0};
  CHECK(cylinder_extremes(tr, f, q).sup == 0.0);
  DriftPath p{tr.times, std::vector<Vec>(tr.times.size(), Vec{3.0, 0.0, 0.0}), std::vector<Vec>(tr.times.size(), Vec{})};
  CHECK(cylinder_extremes(tr, f, q, &p).inf == 1.0);
}

TEST_CASE("truncation energy: trivial, closed-form and monotone cases") {
  // Box wide enough that the periodic form is close to the whole-line one.
  Grid g(1, 8192, 32.0);
  CutoffFamily fam;
  // u <= phi_k everywhere.
  Trajectory low = frozen(Field::constant(g, 0.3), 4.0, 80);
  CHECK(truncation_energy(low, unit_frame(4.0), fam, 0) == 0.0);

  // u = 1: (1 - phi_bar_k)_+ = (h^2 - x^2) / 16 on |x| < h, h^2 = 2 + 8 4^{-k}.
  Trajectory one = frozen(Field::constant(g, 1.0), 4.0, 80);
  for (int k : {0, 1, 3}) {
    const double h = std::sqrt(2.0 + 8.0 * std::pow(4.0, -k));
    const double l2 = 2.0 * gauss_kronrod<double, 31>::integrate(
                                [h](double x) { return std::pow((h * h - x * x) / 16.0, 2); }, 0.0, h);
    // B = (1/pi) int_0^inf xi fhat^2, fhat = (sin(h xi) - h xi cos(h xi)) / (4 xi^3).
    auto integrand = [h](double xi) {
      if (xi < 1e-3) {
        const double f0 = h * h * h / 12.0;
        return xi * f0 * f0;
      }
      const double fh = (std::sin(h * xi) - h * xi * std::cos(h * xi)) / (4.0 * xi * xi * xi);
      return xi * fh * fh;
    };
    const double X = 4000.0;
    double form = gauss_kronrod<double, 61>::integrate(integrand, 0.0, X, 15, 1e-12);
    // Tail: xi fhat^2 ~ h^2 cos^2(h xi) / (16 xi^3), mean h^2 / (32 xi^3).
    form += h * h / (64.0 * X * X);
    form /= std::numbers::pi;
    const double window = -CutoffFamily::ladder_time(k);
    const double oracle = l2 + window * form;
    const double a = truncation_energy(one, unit_frame(4.0), fam, k);
    CHECK(a == doctest::Approx(oracle).epsilon(0.01));
  }

  CascadeReport rep = degiorgi_cascade_report(one, unit_frame(4.0), fam, 6);
  CHECK(rep.monotone);
  CHECK_FALSE(rep.reduced);
  for (double a : rep.energies) CHECK(a > 0.0);
  CHECK(rep.sup_gamma1 == 1.0);
  CHECK_FALSE(rep.sup_below_7_8);

  // Random data in [0, 1]: A_k never increases.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Grid gs(1, 256, 8.0);
  SolverConfig cfg;
  Trajectory rnd{gs, cfg, {}, {}, {}, {}};
  for (int i = 0; i <= 40; ++i) {
    std::vector<double> v(gs.size());
    for (double& x : v) x = U(rng);
    rnd.times.push_back(0.1 * i);
    rnd.fields.emplace_back(gs, v);
  }
  CascadeReport r2 = degiorgi_cascade_report(rnd, unit_frame(4.0), fam, 8);
  CHECK(r2.monotone);

  Trajectory short_run = frozen(Field::constant(g, 1.0), 4.0, 4);
  CHECK(code_of([&] { truncation_energy(short_run, unit_frame(4.0), fam, 0); }) == ErrorCode::InsufficientData);
}

TEST_CASE("Sobolev ratio follows the dilation exponents") {
  CHECK(code_of([] { sobolev_embedding_check(Field::constant(Grid(1, 16, 1.0), 1.0)); }) == ErrorCode::NotApplicable);
  Grid g(2, 256, 16.0);
  auto dilated = [&](double lambda) {
    return Field::from_function(g, [lambda](const Vec& x) {
      return lambda * std::exp(-lambda * lambda * (x[0] * x[0] + x[1] * x[1]));
    });
  };
  const Field u1 = dilated(1.0);
  const Field u2 = dilated(2.0);
  SobolevCheck a = sobolev_embedding_check(u1);
  SobolevCheck b = sobolev_embedding_check(u2);
  // ||u_l||_4^2 and B(u_l) both scale like l; the L2 part is invariant.
  CHECK(b.lhs / a.lhs == doctest::Approx(2.0).epsilon(1e-3));
  const double l2 = integrate(multiply(u1, u1));
  CHECK((b.rhs - l2) / (a.rhs - l2) == doctest::Approx(2.0).epsilon(1e-2));
  CHECK(a.ratio > 0.0);
}

TEST_CASE("Hoelder estimator recovers |x|^beta") {
  Grid g(1, 1024, 4.0);
  for (double beta : {0.25, 0.5, 1.0}) {
    Field u = Field::from_function(g, [beta](const Vec& x) { return std::pow(std::abs(x[0]), beta); });
    Trajectory tr = frozen(u, 2.0, 20);
    std::vector<double> radii;
    for (int j = 0; j < 8; ++j) radii.push_back(g.dx() * std::round(1.0 * std::pow(0.6, j) / g.dx()));
    HolderEstimate h = holder_estimate(tr, Vec{}, 2.0, radii);
    CHECK(h.alpha_hat == doctest::Approx(beta).epsilon(0.05 / beta));
    CHECK(std::abs(h.alpha_hat - beta) <= 0.05);
    CHECK(h.r_squared > 0.99);
    CHECK_FALSE(h.degenerate);
  }
  Trajectory flat = frozen(Field::constant(g, 1.0), 2.0, 20);
  HolderEstimate h = holder_estimate(flat, Vec{}, 2.0, {1.0, 0.5, 0.25});
  CHECK(h.degenerate);
  CHECK(std::isnan(h.alpha_hat));
  CHECK(code_of([&] { holder_estimate(flat, Vec{}, 2.0, {1.0, 0.5}); }) == ErrorCode::InsufficientData);
  CHECK(code_of([&] { holder_estimate(flat, Vec{}, 2.0, {1.0, 1.0, 0.5}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("lemma audit on a small field raises no falsification") {
  Grid g(1, 512, 8.0);
  Trajectory tr = frozen(Field::constant(g, 0.2), 4.0, 40);
  LemmaAudit a = lemma_hypothesis_audit(tr, unit_frame(4.0), LemmaParams{}, CutoffFamily{});
  REQUIRE(a.checks.size() == 4);
  CHECK(a.checks[0].name == "reg.1");
  CHECK(a.checks[0].hypotheses);
  CHECK(a.checks[0].conclusion);
  CHECK_FALSE(a.checks[1].hypotheses);
  CHECK_FALSE(a.any_falsified());
  LemmaCheck c{"x", true, false, 0.0, 0.0};
  CHECK(c.falsified());
}

TEST_CASE("wing growth constant") {
  const double K = wing_growth_constant(0.1, 0.9, 0.5, 0.125);
  CHECK(K > 0.0);
  CHECK(K < 0.25);
  CHECK(wing_growth_holds(K, 0.1, 0.9, 0.5, 0.125));
  if (K < 0.24) CHECK_FALSE(wing_growth_holds(K * 1.05, 0.1, 0.9, 0.5, 0.125));
  CHECK(code_of([] { wing_growth_constant(0.1, 1.5, 0.5, 0.125); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("edge frame sits at the outer support and bounds uhat by 1") {
  Grid g(1, 512, 16.0);
  SolverConfig cfg;
  cfg.t_end = 8.0;
  cfg.track_energy = false;
  Field u0 = Field::from_function(g, [](const Vec& x) { return 4.0 * std::exp(-16.0 * x[0] * x[0]); });
  Trajectory tr = run(u0, cfg);
  Frame f = edge_frame(tr, tr.times.size() - 1, 2.0);
  const Field& last = tr.fields.back();
  CHECK(f.x0[0] > 0.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.coord(static_cast<int>(i)) > f.x0[0]) CHECK(last[i] < 1e-3 * last.max());
  Extremes e = cylinder_extremes(tr, f, Cylinder{4.0, -4.0, 0.0});
  CHECK(e.sup <= 1.0 + 1e-12);
  CHECK(code_of([&] { edge_frame(tr, 3, 2.0); }) == ErrorCode::OutOfDomain);
  CHECK(code_of([&] { edge_frame(tr, tr.times.size(), 2.0); }) == ErrorCode::OutOfDomain);
}
