// Exercises the shared library through fpme.h only.
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "fpme/fpme.h"

namespace fs = std::filesystem;

TEST_CASE("version, status strings and defaults") {
  CHECK(std::strlen(fpme_version()) > 0);
  CHECK(std::string(fpme_status_string(FPME_OK)) == "ok");
  CHECK(std::string(fpme_status_string(FPME_ERR_INVALID_ORDER)) == "InvalidOrder");
  CHECK(std::string(fpme_status_string(FPME_ERR_FORMAT)) == "FormatError");
  CHECK(std::string(fpme_status_string(FPME_ERR_NULL_POINTER)) == "NullPointer");
  CHECK(std::string(fpme_status_string(static_cast<fpme_status>(77))) == "unknown");
  fpme_solver_config cfg;
  fpme_solver_config_default(&cfg);
  CHECK(cfg.s == 0.5);
  CHECK(cfg.snapshot_stride >= 1);
  fpme_solver_config_default(nullptr);
  fpme_cascade_options_default(nullptr);
}

TEST_CASE("null pointers and invalid arguments are reported") {
  CHECK(fpme_grid_create(1, 64, 4.0, nullptr) == FPME_ERR_NULL_POINTER);
  CHECK(std::string(fpme_last_error()).find("NULL") != std::string::npos);
  fpme_grid* g = nullptr;
  CHECK(fpme_grid_create(1, 63, 4.0, &g) == FPME_ERR_GRID);
  CHECK(g == nullptr);
  CHECK(std::strlen(fpme_last_error()) > 0);
  CHECK(fpme_grid_info(nullptr, nullptr, nullptr, nullptr, nullptr) == FPME_ERR_NULL_POINTER);
  double x = 0.0;
  CHECK(fpme_field_integral(nullptr, &x) == FPME_ERR_NULL_POINTER);
  CHECK(fpme_run(nullptr, nullptr, nullptr) == FPME_ERR_NULL_POINTER);
  fpme_grid_destroy(nullptr);
  fpme_field_destroy(nullptr);
  fpme_trajectory_destroy(nullptr);
  CHECK(fpme_cmd_run(nullptr, nullptr) == 2);
  CHECK(fpme_cmd_diagnose(nullptr, "all", 2.0) == 2);
  CHECK(fpme_cmd_cascade(nullptr, nullptr) == 2);
  CHECK(fpme_cmd_render(nullptr) == 2);
  CHECK(fpme_cmd_sweep("x.cfg", "s", nullptr, 2, nullptr) == 2);
}

TEST_CASE("grid, field and operators through the handles") {
  fpme_grid* g = nullptr;
  REQUIRE(fpme_grid_create(1, 128, 8.0, &g) == FPME_OK);
  CHECK(std::string(fpme_last_error()).empty());
  int dim = 0, cells = 0;
  double L = 0.0;
  size_t n = 0;
  REQUIRE(fpme_grid_info(g, &dim, &cells, &L, &n) == FPME_OK);
  CHECK(dim == 1);
  CHECK(cells == 128);
  CHECK(L == 8.0);
  CHECK(n == 128);

  std::vector<double> v(n);
  const double dx = 2.0 * L / cells;
  for (size_t i = 0; i < n; ++i) {
    const double xi = -L + dx * static_cast<double>(i);
    v[i] = std::exp(-xi * xi);
  }
  fpme_field* u = nullptr;
  CHECK(fpme_field_create(g, v.data(), n - 1, &u) == FPME_ERR_INVALID_ARGUMENT);
  REQUIRE(fpme_field_create(g, v.data(), n, &u) == FPME_OK);
  double mass = 0.0;
  REQUIRE(fpme_field_integral(u, &mass) == FPME_OK);
  CHECK(mass == doctest::Approx(std::sqrt(std::acos(-1.0))).epsilon(1e-10));

  v[3] = NAN;
  fpme_field* bad = nullptr;
  CHECK(fpme_field_create(g, v.data(), n, &bad) == FPME_ERR_INVALID_FIELD);

  fpme_field* p = nullptr;
  fpme_field* back = nullptr;
  REQUIRE(fpme_inv_frac_laplacian(u, 0.5, &p) == FPME_OK);
  REQUIRE(fpme_frac_laplacian(p, 0.5, &back) == FPME_OK);
  std::vector<double> orig(n), rec(n);
  fpme_field_values(u, orig.data(), n);
  fpme_field_values(back, rec.data(), n);
  // The zero mode is dropped by the inverse; the rest round-trips.
  for (size_t i = 0; i < n; ++i) CHECK(rec[i] == doctest::Approx(orig[i] - mass / (2.0 * L)).scale(1.0).epsilon(1e-10));
  CHECK(fpme_field_values(u, rec.data(), 3) == FPME_ERR_INVALID_ARGUMENT);

  fpme_field* vel = nullptr;
  CHECK(fpme_pressure_velocity(u, 0.5, 1, 1, &vel) == FPME_ERR_DIMENSION);
  REQUIRE(fpme_pressure_velocity(u, 0.5, 0, 1, &vel) == FPME_OK);
  CHECK(fpme_inv_frac_laplacian(u, 1.5, &bad) == FPME_ERR_INVALID_ORDER);

  double form = 0.0;
  REQUIRE(fpme_bilinear_form(u, u, &form) == FPME_OK);
  CHECK(form > 0.0);

  fpme_field_destroy(vel);
  fpme_field_destroy(back);
  fpme_field_destroy(p);
  fpme_field_destroy(u);
  fpme_grid_destroy(g);
}

TEST_CASE("runs and trajectory access") {
  fpme_grid* g = nullptr;
  REQUIRE(fpme_grid_create(1, 128, 8.0, &g) == FPME_OK);
  std::vector<double> v(128);
  for (size_t i = 0; i < v.size(); ++i) {
    const double xi = -8.0 + 0.125 * static_cast<double>(i);
    v[i] = std::exp(-xi * xi);
  }
  fpme_field* u = nullptr;
  REQUIRE(fpme_field_create(g, v.data(), v.size(), &u) == FPME_OK);
  fpme_solver_config cfg;
  fpme_solver_config_default(&cfg);
  cfg.t_end = 0.5;
  fpme_trajectory* tr = nullptr;
  REQUIRE(fpme_run(u, &cfg, &tr) == FPME_OK);
  size_t count = 0;
  REQUIRE(fpme_trajectory_snapshot_count(tr, &count) == FPME_OK);
  CHECK(count >= 2);
  double t = 0.0;
  REQUIRE(fpme_trajectory_time(tr, count - 1, &t) == FPME_OK);
  CHECK(t == 0.5);
  CHECK(fpme_trajectory_time(tr, count, &t) == FPME_ERR_OUT_OF_DOMAIN);
  fpme_field* last = nullptr;
  REQUIRE(fpme_trajectory_snapshot(tr, count - 1, &last) == FPME_OK);
  double m0 = 0.0, m1 = 0.0;
  fpme_field_integral(u, &m0);
  fpme_field_integral(last, &m1);
  CHECK(std::abs(m1 - m0) <= 1e-12 * m0);

  cfg.cfl = 2.0;
  fpme_trajectory* none = nullptr;
  CHECK(fpme_run(u, &cfg, &none) == FPME_ERR_INVALID_ARGUMENT);
  CHECK(none == nullptr);

  fpme_field_destroy(last);
  fpme_trajectory_destroy(tr);
  fpme_field_destroy(u);
  fpme_grid_destroy(g);
}

TEST_CASE("command entry points") {
  fs::path dir = fs::temp_directory_path() / "fpme_test_capi";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cfg = (dir / "r.cfg").string();
  {
    FILE* f = std::fopen(cfg.c_str(), "w");
    REQUIRE(f != nullptr);
    std::fputs("cells = 128\nL = 8\nt_end = 0.5\ninit.kind = gaussian\ninit.params = 1, 1, 0\n", f);
    std::fclose(f);
  }
  const std::string out = (dir / "out").string();
  CHECK(fpme_cmd_run(cfg.c_str(), out.c_str()) == 0);
  CHECK(fpme_cmd_diagnose(out.c_str(), "conservation,max_principle", 2.0) == 0);
  CHECK(fpme_cmd_diagnose(out.c_str(), "bogus", 2.0) == 2);
  CHECK(fpme_cmd_render(out.c_str()) == 0);
  const double values[] = {0.5};
  CHECK(fpme_cmd_sweep(cfg.c_str(), "nope", values, 1, nullptr) == 2);
  fpme_cascade_options o;
  fpme_cascade_options_default(&o);
  o.B = 0.5;
  CHECK(fpme_cmd_cascade(out.c_str(), &o) == 2);
  CHECK(fpme_cmd_constants((dir / "c.tsv").string().c_str()) == 0);
  CHECK(fs::file_size(dir / "c.tsv") > 0);
  fs::remove_all(dir);
}
