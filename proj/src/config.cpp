#include "fpme/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "fpme/error.hpp"
#include "fpme/snapshot_io.hpp"

namespace fpme {

namespace {

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

[[noreturn]] void config_fail(int line, const std::string& what) {
  fail(ErrorCode::ConfigError, "line " + std::to_string(line) + ": " + what);
}

double to_double(std::string_view v, int line, const std::string& key) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out))
    config_fail(line, key + " expects a finite number, got '" + std::string(v) + "'");
  return out;
}

long long to_int(std::string_view v, int line, const std::string& key) {
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    config_fail(line, key + " expects an integer, got '" + std::string(v) + "'");
  return out;
}

bool to_bool(std::string_view v, int line, const std::string& key) {
  if (v == "true") return true;
  if (v == "false") return false;
  config_fail(line, key + " expects true or false, got '" + std::string(v) + "'");
}

std::vector<double> to_list(std::string_view v, int line, const std::string& key) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    std::size_t comma = v.find(',', pos);
    if (comma == std::string_view::npos) comma = v.size();
    out.push_back(to_double(trim(v.substr(pos, comma - pos)), line, key));
    pos = comma + 1;
  }
  return out;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t expected_params(const std::string& kind, int dim) {
  if (kind == "gaussian" || kind == "box") return static_cast<std::size_t>(2 + dim);
  if (kind == "two_bumps") return static_cast<std::size_t>(2 * (2 + dim));
  return 0;
}

}  // namespace

void RunConfig::validate() const {
  require(dim == 1 || dim == 2, ErrorCode::ConfigError, "dim must be 1 or 2");
  try {
    (void)grid();
    solver.validate();
  } catch (const Error& e) {
    fail(ErrorCode::ConfigError, e.what());
  }
  require(init.noise >= 0.0 && init.noise < 1.0, ErrorCode::ConfigError, "init.noise must lie in [0,1)");
  require(!output_dir.empty(), ErrorCode::ConfigError, "output_dir must not be empty");
  if (init.kind == "file") {
    require(!init.params.empty(), ErrorCode::ConfigError, "init.kind = file needs a snapshot path in init.params");
    return;
  }
  const std::size_t n = expected_params(init.kind, dim);
  require(n > 0, ErrorCode::ConfigError, "unknown init.kind '" + init.kind + "'");
  std::vector<double> p = to_list(init.params, 0, "init.params");
  require(p.size() == n, ErrorCode::ConfigError,
          "init.params for " + init.kind + " needs " + std::to_string(n) + " numbers");
  for (std::size_t b = 0; b < n; b += static_cast<std::size_t>(2 + dim))
    require(p[b] >= 0.0 && p[b + 1] > 0.0, ErrorCode::ConfigError, "amplitudes must be >= 0 and widths > 0");
}

RunConfig parse_config(std::string_view text) {
  RunConfig c;
  std::map<std::string, int> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) config_fail(line_no, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view val = trim(line.substr(eq + 1));
    if (seen.count(key)) config_fail(line_no, "duplicate key '" + key + "' (first on line " +
                                                  std::to_string(seen[key]) + ")");
    seen[key] = line_no;
    if (key == "dim") c.dim = static_cast<int>(to_int(val, line_no, key));
    else if (key == "cells") c.cells = static_cast<int>(to_int(val, line_no, key));
    else if (key == "L") c.L = to_double(val, line_no, key);
    else if (key == "s") c.solver.s = to_double(val, line_no, key);
    else if (key == "cfl") c.solver.cfl = to_double(val, line_no, key);
    else if (key == "t_end") c.solver.t_end = to_double(val, line_no, key);
    else if (key == "snapshot_stride") c.solver.snapshot_stride = static_cast<int>(to_int(val, line_no, key));
    else if (key == "dealias") c.solver.dealias = to_bool(val, line_no, key);
    else if (key == "boundary_margin") c.solver.boundary_margin = to_double(val, line_no, key);
    else if (key == "dt_max") c.solver.dt_max = to_double(val, line_no, key);
    else if (key == "heun") c.solver.heun = to_bool(val, line_no, key);
    else if (key == "output_times") c.solver.output_times = to_list(val, line_no, key);
    else if (key == "track_energy") c.solver.track_energy = to_bool(val, line_no, key);
    else if (key == "init.kind") c.init.kind = std::string(val);
    else if (key == "init.params") c.init.params = std::string(val);
    else if (key == "init.noise") c.init.noise = to_double(val, line_no, key);
    else if (key == "seed") {
      long long v = to_int(val, line_no, key);
      if (v < 0) config_fail(line_no, "seed must be >= 0");
      c.seed = static_cast<std::uint64_t>(v);
    } else if (key == "output_dir") c.output_dir = std::string(val);
    else config_fail(line_no, "unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ConfigError, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const RunConfig& c) {
  std::ostringstream os;
  os << "dim = " << c.dim << '\n';
  os << "cells = " << c.cells << '\n';
  os << "L = " << num(c.L) << '\n';
  os << "s = " << num(c.solver.s) << '\n';
  os << "cfl = " << num(c.solver.cfl) << '\n';
  os << "t_end = " << num(c.solver.t_end) << '\n';
  os << "snapshot_stride = " << c.solver.snapshot_stride << '\n';
  os << "dealias = " << (c.solver.dealias ? "true" : "false") << '\n';
  os << "boundary_margin = " << num(c.solver.boundary_margin) << '\n';
  os << "dt_max = " << num(c.solver.dt_max) << '\n';
  os << "heun = " << (c.solver.heun ? "true" : "false") << '\n';
  os << "output_times = ";
  for (std::size_t i = 0; i < c.solver.output_times.size(); ++i) os << (i ? ", " : "") << num(c.solver.output_times[i]);
  os << '\n';
  os << "track_energy = " << (c.solver.track_energy ? "true" : "false") << '\n';
  os << "init.kind = " << c.init.kind << '\n';
  os << "init.params = " << c.init.params << '\n';
  os << "init.noise = " << num(c.init.noise) << '\n';
  os << "seed = " << c.seed << '\n';
  os << "output_dir = " << c.output_dir << '\n';
  return os.str();
}

Field initial_field(const RunConfig& c, const std::filesystem::path& base_dir) {
  c.validate();
  const Grid g = c.grid();
  Field base = Field::constant(g, 0.0);
  if (c.init.kind == "file") {
    std::filesystem::path p(c.init.params);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    Snapshot snap = read_snapshot(p);
    require(snap.field.grid() == g, ErrorCode::ConfigError, "snapshot grid does not match the configured grid");
    base = snap.field;
  } else {
    const std::vector<double> p = to_list(c.init.params, 0, "init.params");
    const std::size_t stride = static_cast<std::size_t>(2 + c.dim);
    const bool box = c.init.kind == "box";
    const int dim = c.dim;
    base = Field::from_function(g, [&](const Vec& x) {
      double v = 0.0;
      for (std::size_t b = 0; b < p.size(); b += stride) {
        const double a = p[b], w = p[b + 1];
        if (box) {
          bool in = true;
          for (int d = 0; d < dim; ++d) in = in && std::abs(x[d] - p[b + 2 + d]) <= w;
          v += in ? a : 0.0;
        } else {
          double r2 = 0.0;
          for (int d = 0; d < dim; ++d) r2 += (x[d] - p[b + 2 + d]) * (x[d] - p[b + 2 + d]);
          v += a * std::exp(-r2 / (w * w));
        }
      }
      return v;
    });
  }
  if (c.init.noise > 0.0) {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<double> v(base.values().begin(), base.values().end());
    for (double& x : v) x *= 1.0 + c.init.noise * unit(rng);
    base = Field(g, std::move(v));
  }
  return base;
}

}  // namespace fpme
