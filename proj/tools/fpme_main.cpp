// Command-line front end. Talks to the library only through fpme.h.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fpme/fpme.h"

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const std::string& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional porous medium lab: solver runs, audits, sweeps and transport cascades"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fpme_version()));

  std::string config, output, run_dir, axis, out_path;
  std::vector<std::string> checks;
  std::vector<double> values;
  double space = 2.0;

  auto* run = app.add_subcommand("run", "Integrate a configuration and write snapshots and series");
  run->add_option("config", config, "Configuration file")->required();
  run->add_option("-o,--output", output, "Output directory (overrides output_dir)");

  auto* diagnose = app.add_subcommand("diagnose", "Audit a run directory");
  diagnose->add_option("run_dir", run_dir, "Run directory")->required();
  diagnose->add_option("-c,--checks", checks,
                       "Checks: conservation max_principle energies smoothing scaling holder degiorgi lemmas cascade, "
                       "or all")
      ->delimiter(',');
  diagnose->add_option("--space", space, "Space scale of the support-edge frame")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep and fit smoothing exponents");
  sweep->add_option("config", config, "Base configuration")->required();
  sweep->add_option("--axis", axis, "Swept parameter: s, cells or cfl")->required();
  sweep->add_option("--values", values, "Comma-separated values")->delimiter(',');
  sweep->add_option("-o,--output", output, "Output root (overrides output_dir)");

  fpme_cascade_options copts;
  fpme_cascade_options_default(&copts);
  auto* cascade = app.add_subcommand("cascade", "Transport-corrected rescaling cascade at a support-edge point");
  cascade->add_option("run_dir", run_dir, "Run directory")->required();
  cascade->add_option("--mu", copts.mu, "Oscillation reduction mu")->capture_default_str();
  cascade->add_option("--B", copts.B, "Space factor per step")->capture_default_str();
  cascade->add_option("--eps-c", copts.eps_c, "Inner radius of the transport cutoff")->capture_default_str();
  cascade->add_option("--k-max", copts.k_max, "Maximum number of steps")->capture_default_str();
  cascade->add_option("--delta", copts.delta, "Level-set fraction threshold")->capture_default_str();
  cascade->add_option("--space", copts.space, "Space scale of the first frame")->capture_default_str();
  cascade->add_option("--snapshot", copts.snapshot, "Snapshot index of t0 (negative counts from the end)")
      ->capture_default_str();

  auto* render = app.add_subcommand("render", "Write SVG plots of a run directory");
  render->add_option("run_dir", run_dir, "Run directory")->required();

  auto* constants = app.add_subcommand("constants", "Print or write the kernel constants table");
  constants->add_option("-o,--output", out_path, "Output file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed()) return fpme_cmd_run(config.c_str(), output.c_str());
  if (diagnose->parsed()) return fpme_cmd_diagnose(run_dir.c_str(), checks.empty() ? "all" : join(checks).c_str(), space);
  if (sweep->parsed()) return fpme_cmd_sweep(config.c_str(), axis.c_str(), values.data(), values.size(), output.c_str());
  if (cascade->parsed()) return fpme_cmd_cascade(run_dir.c_str(), &copts);
  if (render->parsed()) return fpme_cmd_render(run_dir.c_str());
  if (constants->parsed()) return fpme_cmd_constants(out_path.c_str());
  return 2;
}
