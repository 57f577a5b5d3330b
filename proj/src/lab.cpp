#include "fpme/lab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "fpme/degiorgi.hpp"
#include "fpme/error.hpp"
#include "fpme/fractional.hpp"
#include "fpme/plot.hpp"
#include "fpme/report.hpp"
#include "fpme/snapshot_io.hpp"

namespace fs = std::filesystem;

namespace fpme {

namespace {

std::string snapshot_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%06zu.fpme", i);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Numeric CSV with one header line.
std::vector<std::vector<double>> read_csv(const fs::path& p, std::size_t columns) {
  std::istringstream in(read_text(p));
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) fail(ErrorCode::FormatError, p.filename().string() + ": bad number '" + cell + "'");
      row.push_back(v);
    }
    if (row.size() != columns) fail(ErrorCode::FormatError, p.filename().string() + ": wrong column count");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string series_csv(const Trajectory& traj) {
  std::vector<std::vector<double>> rows;
  for (const StepRecord& r : traj.series) rows.push_back({r.t, r.dt, r.mass, r.sup, r.support_radius});
  return csv_table({"t", "dt", "mass", "sup", "support_radius"}, rows);
}

std::string energy_csv(const Trajectory& traj) {
  std::vector<std::vector<double>> rows;
  for (const EnergyRecord& e : traj.energies)
    rows.push_back({e.t, e.entropy, e.dissipation, e.potential, e.kinetic, e.first, e.second});
  return csv_table({"t", "entropy", "dissipation", "potential", "kinetic", "first", "second"}, rows);
}

int report_error(const Error& e, std::ostream& log) {
  log << "error: " << e.what() << '\n';
  return exit_code_for(e.code());
}

// Runs `body`, mapping escaping errors to exit codes.
template <class F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    return report_error(e, log);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}

std::size_t resolve_snapshot(const Trajectory& traj, long index) {
  const long n = static_cast<long>(traj.times.size());
  const long i = index < 0 ? n + index : index;
  if (i < 0 || i >= n) fail(ErrorCode::InvalidArgument, "snapshot index out of range");
  return static_cast<std::size_t>(i);
}

bool is_zero_run(const Trajectory& traj) {
  for (const Field& f : traj.fields)
    if (f.max() != 0.0 || f.min() != 0.0) return false;
  return true;
}

void write_plot(const fs::path& p, const PlotSpec& spec) { write_text_atomic(p, render_svg(spec)); }

// ---------------------------------------------------------------------------
// Diagnose sections

void check_conservation(const Trajectory& traj, ReportSection& sec) {
  const double m0 = integrate(traj.fields.front());
  double drift = 0.0, neg = 0.0;
  for (const Field& f : traj.fields) {
    drift = std::max(drift, std::abs(integrate(f) - m0));
    neg = std::min(neg, f.min());
  }
  const double rel = m0 != 0.0 ? drift / std::abs(m0) : drift;
  const double tol = 1e-12;
  sec.set("mass_initial", m0);
  sec.set("relative_mass_drift", rel);
  sec.set("tolerance", tol);
  sec.set("min_value", neg);
  sec.pass_if(rel <= tol && neg >= 0.0,
              rel > tol ? "mass drift " + format_double(rel) + " exceeds tolerance" : "negative density");
}

void check_max_principle(const Trajectory& traj, ReportSection& sec) {
  double worst = 0.0;
  for (std::size_t i = 1; i < traj.fields.size(); ++i) {
    const double prev = traj.fields[i - 1].max();
    const double cur = traj.fields[i].max();
    if (prev > 0.0) worst = std::max(worst, (cur - prev) / prev);
  }
  const double tol = 1e-12;
  sec.set("sup_initial", traj.fields.front().max());
  sec.set("sup_final", traj.fields.back().max());
  sec.set("max_relative_increase", worst);
  sec.set("tolerance", tol);
  sec.pass_if(worst <= tol, "sup increased by " + format_double(worst));
}

void check_energies(const Trajectory& traj, ReportSection& sec) {
  if (traj.energies.size() < 2) return sec.skip("run has no energy records (track_energy = false or t_end = 0)");
  EnergyAudit a = audit_energy(traj);
  sec.set("scale", a.scale);
  sec.set("max_rate_first", a.max_rate_first);
  sec.set("max_rate_second", a.max_rate_second);
  sec.set("tolerance", a.tolerance);
  sec.pass_if(a.pass, "an energy functional grew faster than the tolerance");
}

void check_smoothing(const Trajectory& traj, ReportSection& sec) {
  const double t1 = 1.0;
  const double t2 = 10.0;
  if (traj.times.back() < t2) return sec.skip("run ends before t = 10; smoothing window [1, 10] unavailable");
  SmoothingFit fit;
  try {
    fit = smoothing_exponent_fit(traj, t1, t2);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientData) throw;
    return sec.skip(e.what());
  }
  const double tol = 0.1;
  sec.set("t1", t1);
  sec.set("t2", t2);
  sec.set("alpha_hat", fit.alpha_hat);
  sec.set("alpha_target", fit.alpha_target);
  sec.set("r_squared", fit.r_squared);
  sec.set("samples", static_cast<double>(fit.samples));
  sec.set("tolerance", tol);
  sec.pass_if(std::abs(fit.alpha_hat - fit.alpha_target) <= tol, "fitted exponent off target");
}

void check_scaling(const Trajectory& traj, ReportSection& sec) {
  SolverConfig cfg = traj.config;
  cfg.t_end = std::min(cfg.t_end, 2.0);
  cfg.output_times.clear();
  cfg.track_energy = false;
  if (cfg.t_end <= 0.0) return sec.skip("run has zero duration");
  const double A = 2.0, B = 1.0, tol = 0.02;
  ScalingReport r;
  try {
    r = scaling_check(traj.fields.front(), A, B, cfg);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::BoundaryContact) throw;
    sec.set("A", A);
    sec.set("B", B);
    return sec.pass_if(false, e.what());
  }
  sec.set("A", A);
  sec.set("B", B);
  sec.set("C", r.C);
  sec.set("t_end", cfg.t_end);
  sec.set("max_discrepancy", r.max_discrepancy);
  sec.set("tolerance", tol);
  sec.pass_if(r.max_discrepancy <= tol, "twin runs disagree");
}

struct EdgeContext {
  bool ok = false;
  std::string reason;
  Frame frame;
};

EdgeContext edge_context(const Trajectory& traj, double space) {
  EdgeContext c;
  if (is_zero_run(traj)) {
    c.reason = "zero solution: no support edge";
    return c;
  }
  try {
    c.frame = edge_frame(traj, traj.times.size() - 1, space);
    c.ok = true;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::OutOfDomain && e.code() != ErrorCode::InsufficientData) throw;
    c.reason = e.what();
  }
  return c;
}

void check_holder(const Trajectory& traj, const EdgeContext& ctx, const fs::path& out, ReportSection& sec) {
  if (!ctx.ok) return sec.skip(ctx.reason);
  const Grid& g = traj.grid;
  const double s = traj.config.s;
  const double t_span = ctx.frame.t0 - traj.times.front();
  double r_max = std::min({1.0, 0.25 * g.half_width(), std::pow(t_span, 1.0 / (2.0 - 2.0 * s))});
  std::vector<double> radii;
  for (double r = r_max; r >= 2.0 * g.dx() && radii.size() < 8; r *= 0.6) radii.push_back(r);
  if (radii.size() < 3) return sec.skip("fewer than 3 resolvable radii");
  HolderEstimate h = holder_estimate(traj, ctx.frame.x0, ctx.frame.t0, radii);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < h.radii.size(); ++i) rows.push_back({h.radii[i], h.oscillation[i]});
  write_text_atomic(out / "osc.csv", csv_table({"R", "osc"}, rows));
  write_plot(out / "osc.svg", {"Oscillation at the support edge", "R", "osc", true, true,
                               {{"osc(R)", h.radii, h.oscillation, true}}});
  sec.set("x0", ctx.frame.x0[0]);
  sec.set("t0", ctx.frame.t0);
  sec.set("alpha_hat", h.alpha_hat);
  sec.set("r_squared", h.r_squared);
  sec.set("degenerate", h.degenerate ? "true" : "false");
  if (h.degenerate) return sec.skip("oscillation at the smallest radius is at the noise floor");
  sec.pass_if(h.alpha_hat > 0.0 && h.r_squared >= 0.9, "no positive Hoelder exponent with R^2 >= 0.9");
}

void check_degiorgi(const Trajectory& traj, const EdgeContext& ctx, const fs::path& out, ReportSection& sec) {
  if (!ctx.ok) return sec.skip(ctx.reason);
  const int k_max = 12;
  CascadeReport rep;
  try {
    rep = degiorgi_cascade_report(traj, ctx.frame, CutoffFamily{}, k_max);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientData && e.code() != ErrorCode::OutOfDomain) throw;
    return sec.skip(e.what());
  }
  std::vector<std::vector<double>> rows;
  std::vector<double> ks;
  for (std::size_t k = 0; k < rep.energies.size(); ++k) {
    rows.push_back({static_cast<double>(k), rep.ladder_times[k], rep.energies[k]});
    ks.push_back(static_cast<double>(k));
  }
  write_text_atomic(out / "A_k.csv", csv_table({"k", "T_k", "A_k"}, rows));
  write_plot(out / "A_k.svg", {"Truncation energies", "k", "A_k", false, true, {{"A_k", ks, rep.energies, true}}});
  sec.set("amplitude", ctx.frame.amplitude);
  sec.set("space", ctx.frame.space);
  sec.set("A_0", rep.energies.front());
  sec.set("A_kmax", rep.energies.back());
  sec.set("k_max", static_cast<double>(k_max));
  sec.set("monotone", rep.monotone ? "true" : "false");
  sec.set("reduced", rep.reduced ? "true" : "false");
  sec.set("sup_gamma1", rep.sup_gamma1);
  sec.set("decay_rate", rep.decay_rate);
  // A_k -> 0 must imply the 7/8 bound on Gamma_1.
  sec.pass_if(rep.monotone && (!rep.reduced || rep.sup_below_7_8),
              !rep.monotone ? "A_k not monotone" : "A_k reduced but sup over Gamma_1 above 7/8");
}

void check_lemmas(const Trajectory& traj, const EdgeContext& ctx, ReportSection& sec) {
  if (!ctx.ok) return sec.skip(ctx.reason);
  bool falsified = false;
  // Default candidate grid: delta = delta0 in {1e-1, 1e-2, 1e-3}.
  for (int j = 1; j <= 3; ++j) {
    LemmaParams params;
    params.delta = params.delta0 = std::pow(10.0, -j);
    LemmaAudit audit;
    try {
      audit = lemma_hypothesis_audit(traj, ctx.frame, params, CutoffFamily{});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::OutOfDomain) throw;
      return sec.skip(e.what());
    }
    const std::string tag = "delta_1e-" + std::to_string(j) + ".";
    for (const LemmaCheck& c : audit.checks) {
      sec.set(tag + c.name + ".hypotheses", c.hypotheses ? "true" : "false");
      sec.set(tag + c.name + ".conclusion", c.conclusion ? "true" : "false");
      sec.set(tag + c.name + ".measured", c.measured);
      sec.set(tag + c.name + ".extreme", c.extreme);
    }
    falsified = falsified || audit.any_falsified();
  }
  sec.pass_if(!falsified, "a lemma conclusion failed while its hypotheses held");
}

bool ratio_test(const CascadeResult& r, double slack, double* worst) {
  auto d = r.slant_increments();
  *worst = 0.0;
  bool ok = true;
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (d[i - 1] <= 0.0) {
      ok = ok && d[i] <= 0.0;
      continue;
    }
    *worst = std::max(*worst, d[i] / d[i - 1]);
  }
  return ok && *worst <= r.A + slack;
}

void write_cascade_outputs(const fs::path& dir, const CascadeResult& r, int dim) {
  write_text_atomic(dir / "cascade.csv", cascade_csv(r));
  write_text_atomic(dir / "gamma.csv", gamma_csv(r.path, dim));
  std::vector<double> ks, cs, speeds;
  for (const CascadeRecord& rec : r.records) {
    ks.push_back(rec.k);
    cs.push_back(rec.slant);
    speeds.push_back(rec.corr_speed);
  }
  write_plot(dir / "cascade_Ck.svg",
             {"Cascade slant bound", "k", "value", false, false, {{"C_k", ks, cs, true}, {"corr_speed", ks, speeds, true}}});
}

void fill_cascade_section(const CascadeResult& r, ReportSection& sec) {
  double worst = 0.0;
  const bool ratio_ok = ratio_test(r, 0.1, &worst);
  sec.set("steps", static_cast<double>(r.records.size()));
  sec.set("termination", to_string(r.termination));
  sec.set("note", r.note);
  sec.set("A", r.A);
  sec.set("T", r.T);
  if (!r.records.empty()) sec.set("C_final", r.records.back().slant);
  sec.set("max_increment_ratio", worst);
  sec.set("ratio_bound", r.A + 0.1);
  sec.pass_if(ratio_ok, "slant increments fail the ratio test");
}

void check_cascade(const Trajectory& traj, const EdgeContext& ctx, const fs::path& out, ReportSection& sec) {
  if (!ctx.ok) return sec.skip(ctx.reason);
  try {
    CascadeResult r = iteration_cascade(traj, ctx.frame, CascadeParams{});
    write_cascade_outputs(out, r, traj.grid.dim());
    fill_cascade_section(r, sec);
  } catch (const CascadeFailure& f) {
    write_cascade_outputs(out, f.partial(), traj.grid.dim());
    sec.set("falsification", f.what());
    sec.pass_if(false, "oscillation not reduced");
  } catch (const Error& e) {
    if (e.code() != ErrorCode::OutOfDomain) throw;
    sec.skip(e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::BoundaryContact: return kExitBoundaryContact;
    case ErrorCode::NumericalBlowup:
    case ErrorCode::NotNonnegative: return kExitBlowup;
    case ErrorCode::ConfigError:
    case ErrorCode::IoError:
    case ErrorCode::FormatError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidOrder:
    case ErrorCode::InvalidScale:
    case ErrorCode::GridError:
    case ErrorCode::DimensionError: return kExitUsage;
    default: return kExitCheckFailed;
  }
}

int thread_count() {
  if (const char* env = std::getenv("FPME_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 1024L));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

Trajectory load_run(const fs::path& run_dir) {
  const fs::path cfg_path = run_dir / "config.cfg";
  if (!fs::exists(cfg_path)) fail(ErrorCode::IoError, "missing " + cfg_path.string());
  RunConfig cfg = load_config(cfg_path);
  const fs::path snap_dir = run_dir / "snapshots";
  if (!fs::is_directory(snap_dir)) fail(ErrorCode::IoError, "missing " + snap_dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(snap_dir))
    if (e.is_regular_file() && e.path().extension() == ".fpme") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) fail(ErrorCode::IoError, "no snapshots in " + snap_dir.string());
  Trajectory traj{cfg.grid(), cfg.solver, {}, {}, {}, {}};
  for (const fs::path& p : files) {
    Snapshot snap = read_snapshot(p);
    if (!(snap.field.grid() == traj.grid) || snap.s != cfg.solver.s)
      fail(ErrorCode::FormatError, p.filename().string() + " does not match config.cfg");
    if (!traj.times.empty() && !(snap.time > traj.times.back()))
      fail(ErrorCode::FormatError, p.filename().string() + " breaks the time order");
    for (double v : snap.field.values())
      if (!std::isfinite(v)) fail(ErrorCode::FormatError, p.filename().string() + " holds non-finite values");
    traj.times.push_back(snap.time);
    traj.fields.push_back(std::move(snap.field));
  }
  if (fs::exists(run_dir / "series.csv"))
    for (const auto& r : read_csv(run_dir / "series.csv", 5)) traj.series.push_back({r[0], r[1], r[2], r[3], r[4]});
  if (fs::exists(run_dir / "energy.csv"))
    for (const auto& r : read_csv(run_dir / "energy.csv", 7))
      traj.energies.push_back({r[0], r[1], r[2], r[3], r[4], r[5], r[6]});
  return traj;
}

void save_run(const fs::path& dir, const RunConfig& config, const Trajectory& traj) {
  fs::create_directories(dir / "snapshots");
  for (const auto& e : fs::directory_iterator(dir / "snapshots"))
    if (e.is_regular_file() && e.path().extension() == ".fpme" && e.path().filename().string().rfind("snap_", 0) == 0)
      fs::remove(e.path());
  write_text_atomic(dir / "config.cfg", emit_config(config));
  for (std::size_t i = 0; i < traj.fields.size(); ++i)
    write_snapshot(dir / "snapshots" / snapshot_name(i), traj.fields[i], config.solver.s, traj.times[i]);
  write_text_atomic(dir / "series.csv", series_csv(traj));
  write_text_atomic(dir / "energy.csv", energy_csv(traj));
  DiagnosticsReport rep;
  ReportSection& sec = rep.add("run");
  sec.status = SectionStatus::Pass;
  sec.set("steps", static_cast<double>(traj.series.size()));
  sec.set("snapshots", static_cast<double>(traj.fields.size()));
  sec.set("final_time", traj.times.back());
  sec.set("mass_initial", integrate(traj.fields.front()));
  sec.set("mass_final", integrate(traj.fields.back()));
  sec.set("sup_initial", traj.fields.front().max());
  sec.set("sup_final", traj.fields.back().max());
  write_text_atomic(dir / "run.txt", rep.to_text());
}

int cmd_run(const fs::path& config_path, const fs::path& output_dir, std::ostream& log) {
  return guarded(log, [&] {
    RunConfig cfg = load_config(config_path);
    const fs::path dir = output_dir.empty() ? fs::path(cfg.output_dir) : output_dir;
    Field u0 = initial_field(cfg, config_path.parent_path());
    try {
      Trajectory traj = run(u0, cfg.solver);
      save_run(dir, cfg, traj);
      log << "run: " << traj.series.size() << " steps, " << traj.fields.size() << " snapshots, t = "
          << traj.times.back() << " -> " << dir.string() << '\n';
    } catch (const Error& e) {
      fs::create_directories(dir);
      DiagnosticsReport rep;
      ReportSection& sec = rep.add("run");
      sec.pass_if(false, e.what());
      write_text_atomic(dir / "run.txt", rep.to_text());
      throw;
    }
    return kExitOk;
  });
}

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> k{"conservation", "max_principle", "energies", "smoothing", "scaling",
                                          "holder",       "degiorgi",      "lemmas",   "cascade"};
  return k;
}

int cmd_diagnose(const fs::path& run_dir, const DiagnoseOptions& options, std::ostream& log) {
  return guarded(log, [&] {
    std::vector<std::string> checks;
    for (const std::string& c : options.checks) {
      if (c == "all") {
        checks = known_checks();
        break;
      }
      if (std::find(known_checks().begin(), known_checks().end(), c) == known_checks().end())
        fail(ErrorCode::InvalidArgument, "unknown check '" + c + "'");
      if (std::find(checks.begin(), checks.end(), c) == checks.end()) checks.push_back(c);
    }
    require(!checks.empty(), ErrorCode::InvalidArgument, "no checks selected");
    require(options.space > 0.0, ErrorCode::InvalidScale, "space scale must be positive");
    Trajectory traj = load_run(run_dir);
    const fs::path out = run_dir / "diagnostics";
    fs::create_directories(out);

    std::vector<double> t, sup;
    for (std::size_t i = 0; i < traj.fields.size(); ++i) {
      t.push_back(traj.times[i]);
      sup.push_back(traj.fields[i].max());
    }
    write_plot(out / "sup_decay.svg", {"Sup-norm decay", "t", "sup u", true, true, {{"sup u", t, sup, false}}});

    auto wants = [&](const std::string& c) { return std::find(checks.begin(), checks.end(), c) != checks.end(); };
    const bool needs_edge = wants("holder") || wants("degiorgi") || wants("lemmas") || wants("cascade");
    EdgeContext edge = needs_edge ? edge_context(traj, options.space) : EdgeContext{};

    DiagnosticsReport rep;
    for (const std::string& c : checks) {
      ReportSection& sec = rep.add(c);
      if (c == "conservation") check_conservation(traj, sec);
      else if (c == "max_principle") check_max_principle(traj, sec);
      else if (c == "energies") check_energies(traj, sec);
      else if (c == "smoothing") check_smoothing(traj, sec);
      else if (c == "scaling") check_scaling(traj, sec);
      else if (c == "holder") check_holder(traj, edge, out, sec);
      else if (c == "degiorgi") check_degiorgi(traj, edge, out, sec);
      else if (c == "lemmas") check_lemmas(traj, edge, sec);
      else if (c == "cascade") check_cascade(traj, edge, out, sec);
      log << c << ": " << to_string(sec.status);
      if (sec.status != SectionStatus::Pass) log << " (" << sec.reason << ')';
      log << '\n';
      if (sec.status == SectionStatus::Skipped) log << "warning: " << c << " skipped\n";
    }
    write_text_atomic(out / "report.txt", rep.to_text());
    return rep.ok() ? kExitOk : kExitCheckFailed;
  });
}

int cmd_sweep(const fs::path& config_path, const std::string& axis, std::vector<double> values,
              const fs::path& output_dir, std::ostream& log) {
  return guarded(log, [&] {
    if (axis != "s" && axis != "cells" && axis != "cfl") fail(ErrorCode::InvalidArgument, "unknown sweep axis '" + axis + "'");
    if (values.empty()) fail(ErrorCode::InvalidArgument, "empty value list");
    std::vector<double> unique;
    for (double v : values)
      if (std::find(unique.begin(), unique.end(), v) == unique.end()) unique.push_back(v);
    if (unique.size() != values.size())
      log << "warning: " << values.size() - unique.size() << " duplicate value(s) dropped\n";
    RunConfig base = load_config(config_path);
    const fs::path root = (output_dir.empty() ? fs::path(base.output_dir) : output_dir) / ("sweep_" + axis);
    fs::create_directories(root);

    struct Outcome {
      bool ok = false;
      std::string error;
      SmoothingFit fit{};
      double target = 0.0;
    };
    std::vector<Outcome> out(unique.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < unique.size(); i = next++) {
        Outcome& o = out[i];
        try {
          RunConfig cfg = base;
          if (axis == "s") cfg.solver.s = unique[i];
          else if (axis == "cfl") cfg.solver.cfl = unique[i];
          else cfg.cells = static_cast<int>(unique[i]);
          if (axis == "cells" && static_cast<double>(cfg.cells) != unique[i])
            fail(ErrorCode::ConfigError, "cells must be an integer");
          const fs::path dir = root / (axis + "_" + short_num(unique[i]));
          cfg.output_dir = dir.string();
          cfg.validate();
          cfg.solver.track_energy = false;
          Trajectory traj = run(initial_field(cfg, config_path.parent_path()), cfg.solver);
          fs::create_directories(dir);
          write_text_atomic(dir / "config.cfg", emit_config(cfg));
          write_text_atomic(dir / "series.csv", series_csv(traj));
          o.target = smoothing_alpha(cfg.dim, cfg.solver.s);
          o.fit = smoothing_exponent_fit(traj, 1.0, std::min(10.0, cfg.solver.t_end));
          o.ok = true;
        } catch (const std::exception& e) {
          o.error = e.what();
        }
      }
    };
    const int threads = std::max(1, std::min(thread_count(), static_cast<int>(unique.size())));
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    std::ostringstream csv;
    csv << axis << ",status,alpha_hat,alpha_target,r_squared,abs_error\n";
    bool all_ok = true;
    std::vector<double> xs, fitted, targets;
    for (std::size_t i = 0; i < unique.size(); ++i) {
      const Outcome& o = out[i];
      if (!o.ok) {
        all_ok = false;
        csv << format_double(unique[i]) << ",error,nan,nan,nan,nan\n";
        log << axis << " = " << short_num(unique[i]) << ": failed: " << o.error << '\n';
        continue;
      }
      const double err = std::abs(o.fit.alpha_hat - o.target);
      all_ok = all_ok && err <= 0.1;
      csv << format_double(unique[i]) << ',' << (err <= 0.1 ? "ok" : "off_target") << ','
          << format_double(o.fit.alpha_hat) << ',' << format_double(o.target) << ',' << format_double(o.fit.r_squared)
          << ',' << format_double(err) << '\n';
      log << axis << " = " << short_num(unique[i]) << ": alpha_hat = " << o.fit.alpha_hat << " (target "
          << o.target << ")\n";
      xs.push_back(unique[i]);
      fitted.push_back(o.fit.alpha_hat);
      targets.push_back(o.target);
    }
    write_text_atomic(root.parent_path() / ("sweep_" + axis + ".csv"), csv.str());
    write_plot(root / "alpha.svg", {"Smoothing exponent", axis, "alpha", false, false,
                                    {{"fitted", xs, fitted, true}, {"N/(N+2-2s)", xs, targets, true}}});
    return all_ok ? kExitOk : kExitCheckFailed;
  });
}

int cmd_cascade(const fs::path& run_dir, const CascadeOptions& options, std::ostream& log) {
  return guarded(log, [&] {
    options.params.validate();
    require(options.space > 0.0, ErrorCode::InvalidScale, "space scale must be positive");
    Trajectory traj = load_run(run_dir);
    const fs::path out = run_dir / "cascade";
    fs::create_directories(out);
    const std::size_t snap = resolve_snapshot(traj, options.snapshot);
    DiagnosticsReport rep;
    ReportSection& sec = rep.add("cascade");
    Frame frame;
    if (is_zero_run(traj)) {
      // Any frame works; pick the amplitude that makes the window span the data.
      frame.x0 = Vec{};
      frame.t0 = traj.times[snap];
      frame.space = options.space;
      frame.s = traj.config.s;
      const double span = frame.t0 - traj.times.front();
      frame.amplitude = span > 0.0 ? std::pow(options.space, 2.0 - 2.0 * frame.s) * span / 4.0 : 1.0;
      if (span <= 0.0) {
        CascadeResult empty;
        empty.A = 1.0 - options.params.mu;
        empty.T = empty.A * std::pow(options.params.B, 2.0 - 2.0 * frame.s);
        empty.termination = CascadeTermination::ResolutionExhausted;
        empty.note = "single snapshot: zero solution, nothing to reduce";
        write_cascade_outputs(out, empty, traj.grid.dim());
        fill_cascade_section(empty, sec);
        write_text_atomic(out / "cascade.txt", rep.to_text());
        log << "cascade: trivial (" << empty.note << ")\n";
        return kExitOk;
      }
    } else {
      frame = edge_frame(traj, snap, options.space);
    }
    try {
      CascadeResult r = iteration_cascade(traj, frame, options.params);
      write_cascade_outputs(out, r, traj.grid.dim());
      fill_cascade_section(r, sec);
      sec.set("x0", frame.x0[0]);
      sec.set("t0", frame.t0);
      sec.set("amplitude", frame.amplitude);
      write_text_atomic(out / "cascade.txt", rep.to_text());
      log << "cascade: " << r.records.size() << " steps, " << to_string(r.termination);
      if (!r.note.empty()) log << " (" << r.note << ')';
      log << '\n';
      return sec.status == SectionStatus::Pass ? kExitOk : kExitCheckFailed;
    } catch (const CascadeFailure& f) {
      write_cascade_outputs(out, f.partial(), traj.grid.dim());
      sec.set("falsification", f.what());
      sec.pass_if(false, "oscillation not reduced");
      write_text_atomic(out / "cascade.txt", rep.to_text());
      log << "cascade: FALSIFICATION " << f.what() << '\n';
      return kExitCheckFailed;
    }
  });
}

int cmd_render(const fs::path& run_dir, std::ostream& log) {
  return guarded(log, [&] {
    Trajectory traj = load_run(run_dir);
    const fs::path out = run_dir / "render";
    fs::create_directories(out);
    const Grid& g = traj.grid;
    const std::size_t n = traj.fields.size();
    if (g.dim() == 1) {
      PlotSpec spec{"Profiles", "x", "u", false, false, {}};
      std::vector<double> xs;
      for (int i = 0; i < g.cells(); ++i) xs.push_back(g.coord(i));
      std::set<std::size_t> picks;
      for (int k = 0; k < 6; ++k) picks.insert(n == 1 ? 0 : k * (n - 1) / 5);
      for (std::size_t i : picks) {
        const auto v = traj.fields[i].values();
        spec.series.push_back({"t = " + short_num(traj.times[i]), xs, std::vector<double>(v.begin(), v.end()), false});
      }
      write_plot(out / "profile.svg", spec);
    } else {
      write_text_atomic(out / "initial.svg", render_heatmap_svg(traj.fields.front(), "t = " + short_num(traj.times.front())));
      write_text_atomic(out / "final.svg", render_heatmap_svg(traj.fields.back(), "t = " + short_num(traj.times.back())));
    }
    std::vector<double> t, sup, mass, radius;
    for (const StepRecord& r : traj.series) {
      t.push_back(r.t);
      sup.push_back(r.sup);
      mass.push_back(r.mass);
      radius.push_back(r.support_radius);
    }
    write_plot(out / "sup.svg", {"Sup norm", "t", "sup u", true, true, {{"sup u", t, sup, false}}});
    write_plot(out / "mass.svg", {"Mass", "t", "mass", false, false, {{"mass", t, mass, false}}});
    write_plot(out / "support.svg", {"Support radius", "t", "radius", false, false, {{"radius", t, radius, false}}});
    log << "render: wrote " << out.string() << '\n';
    return kExitOk;
  });
}

int cmd_constants(const fs::path& out, std::ostream& log) {
  return guarded(log, [&] {
    const std::string table = constants_table();
    if (out.empty()) log << table;
    else write_text_atomic(out, table);
    return kExitOk;
  });
}

}  // namespace fpme
