#include "fpme/fpme.h"

#include <algorithm>
#include <iostream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "fpme/error.hpp"
#include "fpme/fractional.hpp"
#include "fpme/grid.hpp"
#include "fpme/lab.hpp"
#include "fpme/solver.hpp"

struct fpme_grid {
  fpme::Grid grid;
};
struct fpme_field {
  fpme::Field field;
};
struct fpme_trajectory {
  fpme::Trajectory traj;
};

namespace {

thread_local std::string g_last_error;

fpme_status set_error(fpme_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <class F>
fpme_status guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return FPME_OK;
  } catch (const fpme::Error& e) {
    return set_error(static_cast<fpme_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(FPME_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(FPME_ERR_INTERNAL, e.what());
  }
}

#define FPME_REQUIRE_PTR(p)                                                     \
  do {                                                                          \
    if ((p) == nullptr) return set_error(FPME_ERR_NULL_POINTER, #p " is NULL"); \
  } while (0)

fpme::SolverConfig to_cpp(const fpme_solver_config& c) {
  fpme::SolverConfig s;
  s.s = c.s;
  s.cfl = c.cfl;
  s.t_end = c.t_end;
  s.snapshot_stride = c.snapshot_stride;
  s.dealias = c.dealias != 0;
  s.boundary_margin = c.boundary_margin;
  s.dt_max = c.dt_max;
  s.heun = c.heun != 0;
  s.track_energy = c.track_energy != 0;
  return s;
}

std::string str_or_empty(const char* s) { return s == nullptr ? std::string() : std::string(s); }

}  // namespace

extern "C" {

const char* fpme_version(void) { return "1.0.0"; }

const char* fpme_status_string(fpme_status status) {
  switch (status) {
    case FPME_OK: return "ok";
    case FPME_ERR_NULL_POINTER: return "NullPointer";
    case FPME_ERR_INTERNAL: return "Internal";
    default: break;
  }
  const int v = static_cast<int>(status);
  if (v >= 1 && v <= static_cast<int>(fpme::ErrorCode::FormatError))
    return fpme::to_string(static_cast<fpme::ErrorCode>(v)).data();
  return "unknown";
}

const char* fpme_last_error(void) { return g_last_error.c_str(); }

void fpme_solver_config_default(fpme_solver_config* cfg) {
  if (cfg == nullptr) return;
  fpme::SolverConfig d;
  cfg->s = d.s;
  cfg->cfl = d.cfl;
  cfg->t_end = d.t_end;
  cfg->snapshot_stride = d.snapshot_stride;
  cfg->dealias = d.dealias ? 1 : 0;
  cfg->boundary_margin = d.boundary_margin;
  cfg->dt_max = d.dt_max;
  cfg->heun = d.heun ? 1 : 0;
  cfg->track_energy = d.track_energy ? 1 : 0;
}

fpme_status fpme_grid_create(int dim, int cells, double half_width, fpme_grid** out) {
  FPME_REQUIRE_PTR(out);
  *out = nullptr;
  return guard([&] { *out = new fpme_grid{fpme::Grid(dim, cells, half_width)}; });
}

void fpme_grid_destroy(fpme_grid* grid) { delete grid; }

fpme_status fpme_grid_info(const fpme_grid* grid, int* dim, int* cells, double* half_width, size_t* size) {
  FPME_REQUIRE_PTR(grid);
  if (dim) *dim = grid->grid.dim();
  if (cells) *cells = grid->grid.cells();
  if (half_width) *half_width = grid->grid.half_width();
  if (size) *size = grid->grid.size();
  return FPME_OK;
}

fpme_status fpme_field_create(const fpme_grid* grid, const double* values, size_t n, fpme_field** out) {
  FPME_REQUIRE_PTR(grid);
  FPME_REQUIRE_PTR(values);
  FPME_REQUIRE_PTR(out);
  *out = nullptr;
  return guard([&] {
    fpme::require(n == grid->grid.size(), fpme::ErrorCode::InvalidArgument, "value count does not match the grid");
    *out = new fpme_field{fpme::Field(grid->grid, std::vector<double>(values, values + n))};
  });
}

void fpme_field_destroy(fpme_field* field) { delete field; }

fpme_status fpme_field_values(const fpme_field* field, double* out, size_t n) {
  FPME_REQUIRE_PTR(field);
  FPME_REQUIRE_PTR(out);
  if (n != field->field.size()) return set_error(FPME_ERR_INVALID_ARGUMENT, "buffer size does not match the field");
  auto v = field->field.values();
  std::copy(v.begin(), v.end(), out);
  return FPME_OK;
}

fpme_status fpme_field_integral(const fpme_field* field, double* out) {
  FPME_REQUIRE_PTR(field);
  FPME_REQUIRE_PTR(out);
  return guard([&] { *out = fpme::integrate(field->field); });
}

fpme_status fpme_inv_frac_laplacian(const fpme_field* u, double s, fpme_field** out) {
  FPME_REQUIRE_PTR(u);
  FPME_REQUIRE_PTR(out);
  *out = nullptr;
  return guard([&] { *out = new fpme_field{fpme::inv_frac_laplacian(u->field, s)}; });
}

fpme_status fpme_frac_laplacian(const fpme_field* u, double s, fpme_field** out) {
  FPME_REQUIRE_PTR(u);
  FPME_REQUIRE_PTR(out);
  *out = nullptr;
  return guard([&] { *out = new fpme_field{fpme::frac_laplacian(u->field, s)}; });
}

fpme_status fpme_pressure_velocity(const fpme_field* u, double s, int axis, int dealias, fpme_field** out) {
  FPME_REQUIRE_PTR(u);
  FPME_REQUIRE_PTR(out);
  *out = nullptr;
  return guard([&] {
    fpme::require(axis >= 0 && axis < u->field.grid().dim(), fpme::ErrorCode::DimensionError, "axis out of range");
    auto v = fpme::pressure_velocity(u->field, s, dealias != 0);
    *out = new fpme_field{std::move(v[static_cast<std::size_t>(axis)])};
  });
}

fpme_status fpme_bilinear_form(const fpme_field* v, const fpme_field* w, double* out) {
  FPME_REQUIRE_PTR(v);
  FPME_REQUIRE_PTR(w);
  FPME_REQUIRE_PTR(out);
  return guard([&] { *out = fpme::bilinear_form_spectral(v->field, w->field); });
}

fpme_status fpme_run(const fpme_field* u0, const fpme_solver_config* cfg, fpme_trajectory** out) {
  FPME_REQUIRE_PTR(u0);
  FPME_REQUIRE_PTR(cfg);
  FPME_REQUIRE_PTR(out);
  *out = nullptr;
  return guard([&] { *out = new fpme_trajectory{fpme::run(u0->field, to_cpp(*cfg))}; });
}

void fpme_trajectory_destroy(fpme_trajectory* traj) { delete traj; }

fpme_status fpme_trajectory_snapshot_count(const fpme_trajectory* traj, size_t* out) {
  FPME_REQUIRE_PTR(traj);
  FPME_REQUIRE_PTR(out);
  *out = traj->traj.times.size();
  return FPME_OK;
}

fpme_status fpme_trajectory_time(const fpme_trajectory* traj, size_t index, double* out) {
  FPME_REQUIRE_PTR(traj);
  FPME_REQUIRE_PTR(out);
  if (index >= traj->traj.times.size()) return set_error(FPME_ERR_OUT_OF_DOMAIN, "snapshot index out of range");
  *out = traj->traj.times[index];
  return FPME_OK;
}

fpme_status fpme_trajectory_snapshot(const fpme_trajectory* traj, size_t index, fpme_field** out) {
  FPME_REQUIRE_PTR(traj);
  FPME_REQUIRE_PTR(out);
  *out = nullptr;
  if (index >= traj->traj.fields.size()) return set_error(FPME_ERR_OUT_OF_DOMAIN, "snapshot index out of range");
  return guard([&] { *out = new fpme_field{traj->traj.fields[index]}; });
}

int fpme_cmd_run(const char* config_path, const char* output_dir) {
  if (config_path == nullptr) return fpme::kExitUsage;
  return fpme::cmd_run(config_path, str_or_empty(output_dir), std::cerr);
}

int fpme_cmd_diagnose(const char* run_dir, const char* checks, double space) {
  if (run_dir == nullptr) return fpme::kExitUsage;
  fpme::DiagnoseOptions opts;
  opts.space = space;
  if (checks != nullptr && *checks != '\0') {
    opts.checks.clear();
    std::istringstream in(checks);
    std::string item;
    while (std::getline(in, item, ','))
      if (!item.empty()) opts.checks.push_back(item);
  }
  return fpme::cmd_diagnose(run_dir, opts, std::cerr);
}

int fpme_cmd_sweep(const char* config_path, const char* axis, const double* values, size_t n, const char* output_dir) {
  if (config_path == nullptr || axis == nullptr || (values == nullptr && n > 0)) return fpme::kExitUsage;
  std::vector<double> v(values, values + n);
  return fpme::cmd_sweep(config_path, axis, std::move(v), str_or_empty(output_dir), std::cerr);
}

void fpme_cascade_options_default(fpme_cascade_options* opts) {
  if (opts == nullptr) return;
  fpme::CascadeOptions d;
  opts->mu = d.params.mu;
  opts->B = d.params.B;
  opts->eps_c = d.params.family.eps_c;
  opts->k_max = d.params.k_max;
  opts->delta = d.params.delta;
  opts->space = d.space;
  opts->snapshot = d.snapshot;
}

int fpme_cmd_cascade(const char* run_dir, const fpme_cascade_options* opts) {
  if (run_dir == nullptr) return fpme::kExitUsage;
  fpme::CascadeOptions o;
  if (opts != nullptr) {
    o.params.mu = opts->mu;
    o.params.B = opts->B;
    o.params.family.eps_c = opts->eps_c;
    o.params.k_max = opts->k_max;
    o.params.delta = opts->delta;
    o.space = opts->space;
    o.snapshot = opts->snapshot;
  }
  return fpme::cmd_cascade(run_dir, o, std::cerr);
}

int fpme_cmd_render(const char* run_dir) {
  if (run_dir == nullptr) return fpme::kExitUsage;
  return fpme::cmd_render(run_dir, std::cerr);
}

int fpme_cmd_constants(const char* out_path) {
  return fpme::cmd_constants(str_or_empty(out_path), out_path == nullptr || *out_path == '\0' ? std::cout : std::cerr);
}

}  // extern "C"
