#pragma once

/// @file config.hpp
/// @brief Flat `key = value` run configuration.
///
/// Recognized keys (each at most once; anything else is a ConfigError):
///
///   dim, cells, L, s, cfl, t_end, snapshot_stride, dealias, boundary_margin,
///   dt_max, heun, output_times, track_energy,
///   init.kind, init.params, init.noise, seed, output_dir
///
/// `#` starts a comment. Booleans are true/false. output_times and numeric
/// init.params are comma-separated. init.kind is one of
///   gaussian   params a, w, c_1[, c_2]            u = a exp(-|x - c|^2 / w^2)
///   box        params a, h, c_1[, c_2]            u = a on max_i |x_i - c_i| <= h
///   two_bumps  params a, w, c_1[, c_2], a', w', c'_1[, c'_2]
///   file       params = path of an FPME1 snapshot (relative to the config file)
/// init.noise > 0 multiplies the profile by 1 + noise * U(-1, 1), drawn from
/// a mt19937_64 seeded with `seed`.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fpme/grid.hpp"
#include "fpme/solver.hpp"

namespace fpme {

struct InitSpec {
  std::string kind = "gaussian";
  std::string params = "1, 0.5, 0";
  double noise = 0.0;
};

struct RunConfig {
  int dim = 1;
  int cells = 256;
  double L = 8.0;
  SolverConfig solver;
  InitSpec init;
  std::uint64_t seed = 0;
  std::string output_dir = "run";

  Grid grid() const { return Grid(dim, cells, L); }
  /// Grid and solver validation plus init.kind / params shape.
  void validate() const;
};

/// ConfigError with the offending line number on malformed input.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
/// Canonical text; parse_config(emit_config(c)) reproduces c exactly.
std::string emit_config(const RunConfig& config);

/// Initial profile. File-based profiles resolve relative paths against
/// `base_dir` and must match the configured grid (ConfigError otherwise).
Field initial_field(const RunConfig& config, const std::filesystem::path& base_dir = {});

}  // namespace fpme
