#pragma once

/// @file lab.hpp
/// @brief Experiment orchestration behind the command line: runs, audits,
///        sweeps, cascades and rendering, all returning process exit codes.
///
/// Run directory layout:
///
///   config.cfg                 canonical copy of the run configuration
///   snapshots/snap_NNNNNN.fpme FPME1 snapshots in time order
///   series.csv                 t,dt,mass,sup,support_radius (one row per step)
///   energy.csv                 t,entropy,dissipation,potential,kinetic,first,second
///   run.txt                    key = value summary
///   diagnostics/, cascade/, render/   outputs of the other commands

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "fpme/config.hpp"
#include "fpme/solver.hpp"
#include "fpme/transport.hpp"

namespace fpme {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitBoundaryContact = 3;
inline constexpr int kExitBlowup = 4;

/// Exit code for an error escaping a command: 3 BoundaryContact,
/// 4 NumericalBlowup / NotNonnegative, 2 configuration, IO and format
/// errors and invalid arguments, 1 otherwise.
int exit_code_for(ErrorCode code) noexcept;

/// FPME_THREADS if set to a positive integer, else the hardware concurrency.
int thread_count();

/// Reads a run directory. IoError / FormatError / ConfigError on missing or
/// corrupt pieces, including snapshots that disagree with config.cfg.
Trajectory load_run(const std::filesystem::path& run_dir);

/// Writes every artifact of a finished trajectory into `dir`.
void save_run(const std::filesystem::path& dir, const RunConfig& config, const Trajectory& traj);

/// `output_dir` overrides the configured directory when non-empty.
int cmd_run(const std::filesystem::path& config_path, const std::filesystem::path& output_dir, std::ostream& log);

/// Known checks: conservation, max_principle, energies, smoothing, scaling,
/// holder, degiorgi, lemmas, cascade ("all" selects every one).
struct DiagnoseOptions {
  std::vector<std::string> checks{"all"};
  /// Space scale B of the support-edge frame used by holder, degiorgi,
  /// lemmas and cascade.
  double space = 2.0;
};
const std::vector<std::string>& known_checks();
int cmd_diagnose(const std::filesystem::path& run_dir, const DiagnoseOptions& options, std::ostream& log);

/// axis is s, cells or cfl. Writes <output_dir>/sweep_<axis>.csv and one
/// subdirectory per value. Exit 2 on an empty list or unknown axis, 1 when a
/// run fails or a fitted exponent misses N/(N+2-2s) by more than 0.1.
int cmd_sweep(const std::filesystem::path& config_path, const std::string& axis, std::vector<double> values,
              const std::filesystem::path& output_dir, std::ostream& log);

struct CascadeOptions {
  CascadeParams params;
  double space = 2.0;
  /// Snapshot index of t0; negative counts from the end.
  long snapshot = -1;
};
int cmd_cascade(const std::filesystem::path& run_dir, const CascadeOptions& options, std::ostream& log);

/// Profile and time-series plots into run_dir/render.
int cmd_render(const std::filesystem::path& run_dir, std::ostream& log);

/// Writes the constants table to `out` (stdout through `log` when empty).
int cmd_constants(const std::filesystem::path& out, std::ostream& log);

}  // namespace fpme
