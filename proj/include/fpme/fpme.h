#ifndef FPME_FPME_H
#define FPME_FPME_H

/* C interface of the fractional porous medium lab.
 *
 * Objects are opaque handles owned by the caller and released with the
 * matching *_destroy function (NULL is accepted). Every function returns an
 * fpme_status; on failure fpme_last_error() describes the most recent error
 * raised on the calling thread. Handles are immutable after creation and may
 * be shared between threads. */

#include <stddef.h>

#if defined(_WIN32)
#  if defined(FPME_BUILDING_LIBRARY)
#    define FPME_API __declspec(dllexport)
#  else
#    define FPME_API __declspec(dllimport)
#  endif
#else
#  define FPME_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fpme_status {
  FPME_OK = 0,
  FPME_ERR_INVALID_ARGUMENT = 1,
  FPME_ERR_INVALID_FIELD = 2,
  FPME_ERR_INVALID_ORDER = 3,
  FPME_ERR_GRID = 4,
  FPME_ERR_DIMENSION = 5,
  FPME_ERR_TOO_LARGE_FOR_ORACLE = 6,
  FPME_ERR_SINGULAR_POINT = 7,
  FPME_ERR_NOT_NONNEGATIVE = 8,
  FPME_ERR_NUMERICAL_BLOWUP = 9,
  FPME_ERR_BOUNDARY_CONTACT = 10,
  FPME_ERR_INSUFFICIENT_DATA = 11,
  FPME_ERR_OUT_OF_DOMAIN = 12,
  FPME_ERR_NOT_APPLICABLE = 13,
  FPME_ERR_INVALID_SCALE = 14,
  FPME_ERR_EXCESSIVE_DRIFT = 15,
  FPME_ERR_OSCILLATION_NOT_REDUCED = 16,
  FPME_ERR_RESOLUTION_EXHAUSTED = 17,
  FPME_ERR_CONFIG = 18,
  FPME_ERR_IO = 19,
  FPME_ERR_FORMAT = 20,
  FPME_ERR_NULL_POINTER = 100,
  FPME_ERR_INTERNAL = 101
} fpme_status;

typedef struct fpme_grid fpme_grid;
typedef struct fpme_field fpme_field;
typedef struct fpme_trajectory fpme_trajectory;

typedef struct fpme_solver_config {
  double s;
  double cfl;
  double t_end;
  int snapshot_stride;
  int dealias;
  double boundary_margin;
  double dt_max;
  int heun;
  int track_energy;
} fpme_solver_config;

FPME_API const char* fpme_version(void);
FPME_API const char* fpme_status_string(fpme_status status);
/* Message of the last failure on this thread ("" if none). */
FPME_API const char* fpme_last_error(void);

/* Library defaults (s = 1/2, cfl = 0.4, t_end = 1, ...). */
FPME_API void fpme_solver_config_default(fpme_solver_config* cfg);

FPME_API fpme_status fpme_grid_create(int dim, int cells, double half_width, fpme_grid** out);
FPME_API void fpme_grid_destroy(fpme_grid* grid);
FPME_API fpme_status fpme_grid_info(const fpme_grid* grid, int* dim, int* cells, double* half_width, size_t* size);

/* Copies `n` values (n must equal the grid size). */
FPME_API fpme_status fpme_field_create(const fpme_grid* grid, const double* values, size_t n, fpme_field** out);
FPME_API void fpme_field_destroy(fpme_field* field);
FPME_API fpme_status fpme_field_values(const fpme_field* field, double* out, size_t n);
FPME_API fpme_status fpme_field_integral(const fpme_field* field, double* out);

FPME_API fpme_status fpme_inv_frac_laplacian(const fpme_field* u, double s, fpme_field** out);
FPME_API fpme_status fpme_frac_laplacian(const fpme_field* u, double s, fpme_field** out);
/* Component `axis` of v = -grad (-Delta)^{-s} u. */
FPME_API fpme_status fpme_pressure_velocity(const fpme_field* u, double s, int axis, int dealias, fpme_field** out);
FPME_API fpme_status fpme_bilinear_form(const fpme_field* v, const fpme_field* w, double* out);

FPME_API fpme_status fpme_run(const fpme_field* u0, const fpme_solver_config* cfg, fpme_trajectory** out);
FPME_API void fpme_trajectory_destroy(fpme_trajectory* traj);
FPME_API fpme_status fpme_trajectory_snapshot_count(const fpme_trajectory* traj, size_t* out);
FPME_API fpme_status fpme_trajectory_time(const fpme_trajectory* traj, size_t index, double* out);
FPME_API fpme_status fpme_trajectory_snapshot(const fpme_trajectory* traj, size_t index, fpme_field** out);

/* Command entry points. Each returns the process exit code of the command
 * (0 ok, 1 check failed, 2 usage/config/corrupt input, 3 boundary contact,
 * 4 numerical blow-up) and writes progress and errors to stderr. */
FPME_API int fpme_cmd_run(const char* config_path, const char* output_dir);
/* `checks` is a comma-separated list or "all". */
FPME_API int fpme_cmd_diagnose(const char* run_dir, const char* checks, double space);
FPME_API int fpme_cmd_sweep(const char* config_path, const char* axis, const double* values, size_t n,
                            const char* output_dir);

typedef struct fpme_cascade_options {
  double mu;
  double B;
  double eps_c;
  int k_max;
  double delta;
  double space;
  long snapshot;
} fpme_cascade_options;

FPME_API void fpme_cascade_options_default(fpme_cascade_options* opts);
FPME_API int fpme_cmd_cascade(const char* run_dir, const fpme_cascade_options* opts);
FPME_API int fpme_cmd_render(const char* run_dir);
/* NULL or "" prints to stdout. */
FPME_API int fpme_cmd_constants(const char* out_path);

#ifdef __cplusplus
}
#endif

#endif
