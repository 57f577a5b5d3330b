#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fpme/error.hpp"
#include "fpme/fractional.hpp"
#include "fpme/transport.hpp"

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

Field bump1(const Grid& g, double c, double w2) {
  return Field::from_function(g, [=](const Vec& x) { return std::exp(-(x[0] - c) * (x[0] - c) / w2); });
}

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

// int g sign(y) |y|^{2s-2} W(|y|) u(y) dy on the line for u = exp(-(y - c)^2 / w2).
double drift_oracle(double s, double c, double w2, double lo, double hi, const std::function<double(double)>& W) {
  const double g = RieszKernel{1, s}.gradient_constant();
  auto f = [&](double y) {
    const double u = std::exp(-(y - c) * (y - c) / w2);
    return g * std::pow(y, 2.0 * s - 2.0) * W(y) * u;
  };
  auto h = [&](double y) {
    const double u = std::exp(-(-y - c) * (-y - c) / w2);
    return -g * std::pow(y, 2.0 * s - 2.0) * W(y) * u;
  };
  return gauss_kronrod<double, 61>::integrate(f, lo, hi, 12, 1e-13) +
         gauss_kronrod<double, 61>::integrate(h, lo, hi, 12, 1e-13);
}

}  // namespace

TEST_CASE("cutoff drift of a remote bump matches line quadrature") {
  Grid g(1, 4096, 32.0);
  CutoffFamily fam;
  for (double s : {0.3, 0.5, 0.7}) {
    Field u = bump1(g, 3.0, 0.25);
    DriftResult d = drift_velocity_cutoff(u, fam, s);
    const double oracle = drift_oracle(s, 3.0, 0.25, fam.eps_c, 10.0, [&](double y) { return fam.transport_cutoff(y); });
    CHECK(d.velocity[0] == doctest::Approx(oracle).epsilon(1e-5));
    CHECK(std::abs(d.velocity[0]) <= d.bound);
    // The velocity pushes mass away from the bump: negative at the origin.
    CHECK(d.velocity[0] < 0.0);
  }
}

TEST_CASE("cutoff drift vanishes on fields supported inside the inner radius") {
  Grid g(1, 256, 8.0);
  CutoffFamily fam;
  Field u = Field::from_function(g, [&](const Vec& x) { return std::abs(x[0]) < fam.eps_c ? 1.0 : 0.0; });
  CHECK(drift_velocity_cutoff(u, fam, 0.5).velocity[0] == 0.0);
  CHECK(code_of([&] { drift_velocity_cutoff(u, fam, 0.5, Vec{}, 0.0); }) == ErrorCode::InvalidScale);
}

TEST_CASE("weight split is additive") {
  Grid g(2, 64, 4.0);
  CutoffFamily fam;
  Field u = Field::from_function(g, [](const Vec& x) {
    return std::exp(-((x[0] - 1.0) * (x[0] - 1.0) + (x[1] + 0.5) * (x[1] + 0.5)));
  });
  Vec c{0.25, 0.0, 0.0};
  Vec in = drift_integral(u, 0.5, c, [&](double r) { return fam.transport_cutoff(r); }, 0);
  Vec out = drift_integral(u, 0.5, c, [&](double r) { return 1.0 - fam.transport_cutoff(r); }, 0);
  Vec all = drift_integral(u, 0.5, c, [](double) { return 1.0; }, 0);
  for (int a = 0; a < 2; ++a) CHECK(in[a] + out[a] == doctest::Approx(all[a]).epsilon(1e-12));
  CHECK(code_of([&] { drift_integral(u, 0.5, c, [](double) { return 1.0; }, 2); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("full drift on a field vanishing near the center matches the cutoff split") {
  Grid g(1, 2048, 16.0);
  CutoffFamily fam;
  Field u = bump1(g, 4.0, 0.5);
  DriftResult full = drift_velocity_full(u, 0.5);
  DriftResult cut = drift_velocity_cutoff(u, fam, 0.5);
  CHECK(cut.velocity[0] == doctest::Approx(full.velocity[0]).epsilon(0.01));
  CHECK_FALSE(full.ill_conditioned);
  CHECK(std::isinf(full.bound));
}

TEST_CASE("annular correction: parity, quadrature and locality") {
  Grid g(1, 4096, 32.0);
  CutoffFamily fam;
  const double B = 2.0;
  // u = 1 everywhere: odd kernel against an even weight.
  DriftResult flat = annular_correction_speed(Field::constant(g, 1.0), B, fam, 0.5);
  CHECK(std::abs(flat.velocity[0]) < 1e-12);

  Field u = bump1(g, 1.2, 0.1);
  DriftResult d = annular_correction_speed(u, B, fam, 0.5);
  auto W = [&](double y) { return fam.transport_cutoff(y) - fam.transport_cutoff(y / B); };
  const double oracle = drift_oracle(0.5, 1.2, 0.1, fam.eps_c, 2.0 * B * fam.eps_c, W);
  CHECK(d.velocity[0] == doctest::Approx(oracle).epsilon(0.01));
  CHECK(std::abs(d.velocity[0]) <= d.bound);

  // Mass outside the annulus changes neither the speed nor the bound.
  Field far = u + bump1(g, 10.0, 0.5) * 100.0;
  DriftResult d2 = annular_correction_speed(far, B, fam, 0.5);
  CHECK(d2.velocity[0] == doctest::Approx(d.velocity[0]).epsilon(1e-12));
  CHECK(d2.bound == d.bound);
  // ... while the cutoff bound uses the L1 norm and grows.
  CHECK(drift_velocity_cutoff(far, fam, 0.5).bound > 10.0 * drift_velocity_cutoff(u, fam, 0.5).bound);

  CHECK(code_of([&] { annular_correction_speed(u, 1.0, fam, 0.5); }) == ErrorCode::InvalidScale);
}

TEST_CASE("moving frames translate snapshots and invert") {
  Grid g(1, 256, 8.0);
  Trajectory tr = frozen(bump1(g, 0.0, 0.5), 1.0, 4);
  std::vector<Vec> speed(tr.times.size(), Vec{1.0, 0.0, 0.0});
  DriftPath p = integrate_path(tr.times, speed, 0.0);
  Trajectory m = apply_moving_frame(tr, p);
  CHECK(m.series.empty());
  // At t = 1, gamma = 1: the new field at x' is u(x' + 1), peaked at x' = -1.
  std::size_t at = static_cast<std::size_t>((8.0 - 1.0) / g.dx());
  CHECK(m.fields.back()[at] == doctest::Approx(1.0).epsilon(1e-10));
  Trajectory back = apply_moving_frame(m, negate(p));
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(back.fields.back()[i] == doctest::Approx(tr.fields.back()[i]).scale(1.0).epsilon(1e-12));
  std::vector<Vec> fast(tr.times.size(), Vec{10.0, 0.0, 0.0});
  CHECK(code_of([&] { apply_moving_frame(tr, integrate_path(tr.times, fast, 0.0)); }) == ErrorCode::ExcessiveDrift);
}

TEST_CASE("velocity rescaling identity") {
  Grid g(1, 1024, 16.0);
  Field u = bump1(g, 2.0, 0.25);
  RescalingReport full = velocity_rescaling_check(u, 0.875, 2.0, 0.75, RescalingMode::Full);
  CHECK(full.factor == doctest::Approx(0.875 * std::pow(2.0, -0.5)));
  CHECK(full.mismatch < 0.01);
  RescalingReport cut = velocity_rescaling_check(u, 0.875, 2.0, 0.5, RescalingMode::Cutoff);
  CHECK(cut.factor == doctest::Approx(0.875));
  CHECK(cut.mismatch < 0.01);
  CHECK(code_of([&] { velocity_rescaling_check(u, 0.0, 2.0, 0.5, RescalingMode::Full); }) == ErrorCode::InvalidScale);
  CHECK(code_of([&] { velocity_rescaling_check(u, 1.0, 0.5, 0.5, RescalingMode::Full); }) == ErrorCode::InvalidScale);
}

TEST_CASE("cascade parameters and termination names") {
  CascadeParams p;
  CHECK_NOTHROW(p.validate());
  p.mu = 0.6;
  CHECK(code_of([&] { p.validate(); }) == ErrorCode::InvalidArgument);
  p = {};
  p.B = 1.0;
  CHECK(code_of([&] { p.validate(); }) == ErrorCode::InvalidScale);
  p = {};
  p.k_max = 0;
  CHECK(code_of([&] { p.validate(); }) == ErrorCode::InvalidArgument);
  CHECK(std::string(to_string(CascadeTermination::Completed)) == "completed");
  CHECK(std::string(to_string(CascadeTermination::ResolutionExhausted)) == "resolution_exhausted");
  CHECK(std::string(to_string(CascadeTermination::NondegenerateBranch)) == "nondegenerate_branch");
}

TEST_CASE("cascade on synthetic trajectories") {
  Grid g(1, 1024, 16.0);
  Frame base;
  base.t0 = 8.0;
  base.space = 1.0;

  SUBCASE("empty neighbourhood: trivial steps until resolution runs out") {
    Trajectory tr = frozen(Field::constant(g, 0.0), 8.0, 400);
    CascadeParams p;
    p.k_max = 10;
    CascadeResult r = iteration_cascade(tr, base, p);
    CHECK(r.termination == CascadeTermination::ResolutionExhausted);
    REQUIRE(r.records.size() >= 3);
    for (const CascadeRecord& rec : r.records) {
      CHECK(rec.flags == "trivial");
      CHECK(rec.slant == 0.0);
    }
    CHECK(r.A == doctest::Approx(0.875));
    CHECK(r.T == doctest::Approx(1.75));
    std::string csv = cascade_csv(r);
    CHECK(csv.rfind("k,A^k,B^k,T^k,sup_osc,corr_speed,C_k,flags\n0,1,1,1,0,0,0,trivial\n", 0) == 0);
    CHECK(gamma_csv(r.path, 1).rfind("t,gamma_1\n", 0) == 0);
  }

  SUBCASE("full level set routes to the nondegenerate branch") {
    Trajectory tr = frozen(Field::constant(g, 1.0), 8.0, 400);
    CascadeResult r = iteration_cascade(tr, base, CascadeParams{});
    CHECK(r.termination == CascadeTermination::NondegenerateBranch);
    CHECK(r.records.size() == 1);
    CHECK(r.records[0].flags.find("nondegenerate") != std::string::npos);
  }

  SUBCASE("a sharp spike below 1 falsifies the reduction") {
    Field spike = Field::from_function(g, [](const Vec& x) { return 0.95 * std::exp(-x[0] * x[0] / 0.01); });
    Trajectory tr = frozen(spike, 8.0, 400);
    try {
      iteration_cascade(tr, base, CascadeParams{});
      FAIL("expected a CascadeFailure");
    } catch (const CascadeFailure& e) {
      CHECK(e.code() == ErrorCode::OscillationNotReduced);
      CHECK(e.partial().records.size() == 1);
      CHECK(e.partial().records[0].sup_osc == doctest::Approx(0.95));
    }
  }

  SUBCASE("windows that cannot nest are rejected") {
    Trajectory tr = frozen(Field::constant(g, 0.0), 8.0, 40);
    CascadeParams p;
    p.B = 1.1;
    CHECK(code_of([&] { iteration_cascade(tr, base, p); }) == ErrorCode::InvalidScale);
    Frame early = base;
    early.t0 = 1.0;
    CHECK(code_of([&] { iteration_cascade(tr, early, CascadeParams{}); }) == ErrorCode::OutOfDomain);
  }
}

TEST_CASE("slant increments follow the geometric weights") {
  CascadeResult r;
  r.records.resize(3);
  r.records[0].slant = 1.0;
  r.records[1].slant = 1.5;
  r.records[2].slant = 1.7;
  auto d = r.slant_increments();
  REQUIRE(d.size() == 2);
  CHECK(d[0] == doctest::Approx(0.5));
  CHECK(d[1] == doctest::Approx(0.2));
}

TEST_CASE("weak residual: small on solutions, large on frozen data") {
  Grid g(1, 512, 16.0);
  SolverConfig cfg;
  cfg.t_end = 1.0;
  cfg.track_energy = false;
  Trajectory tr = run(bump1(g, 0.0, 1.0), cfg);
  ResidualBasket basket;
  const double r_solution = transformed_residual(tr, DriftPath{}, basket);
  CHECK(r_solution < 0.02);

  // Same solution in a uniformly moving frame, with the frame speed subtracted.
  std::vector<Vec> speed(tr.times.size(), Vec{0.3, 0.0, 0.0});
  DriftPath p = integrate_path(tr.times, speed, 0.0);
  CHECK(transformed_residual(tr, p, basket) < 0.02);

  Trajectory still = frozen(bump1(g, 0.0, 1.0), 1.0, 40);
  const double r_still = transformed_residual(still, DriftPath{}, basket);
  CHECK(r_still > 10.0 * r_solution);

  CHECK(transformed_residual(frozen(Field::constant(g, 0.0), 1.0, 4), DriftPath{}) == 0.0);
  CHECK(code_of([&] { transformed_residual(frozen(Field::constant(g, 0.0), 1.0, 1), DriftPath{}); }) ==
        ErrorCode::InsufficientData);
}

TEST_CASE("kernel difference tail decays like 1 / rho at s = 1/2") {
  CutoffFamily fam;
  const double t1 = kernel_difference_tail(0.5, 0.5, 10.0, fam);
  const double t2 = kernel_difference_tail(0.5, 0.5, 20.0, fam);
  CHECK(t2 / t1 == doctest::Approx(0.5).epsilon(0.2));
  // Leading-order closed form 2 |g| |x| / rho.
  CHECK(t1 == doctest::Approx(2.0 / std::numbers::pi * 0.5 / 10.0).epsilon(0.05));
  CHECK(code_of([&] { kernel_difference_tail(0.5, 0.5, 1.0, fam); }) == ErrorCode::InvalidArgument);
}
