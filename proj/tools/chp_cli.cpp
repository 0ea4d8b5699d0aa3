// Command line front end: run scenarios, sweep resolutions, re-verify dumps.
// Exit codes: 0 verdict as expected, 1 verdict unexpected, 2 input error.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "chp/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for the convex hull property"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  double tolerance = -1.0;
  bool include_zero = false;

  CLI::App* cmd_run = app.add_subcommand("run", "solve a scenario and check the hull property");
  cmd_run->add_option("--config", config, "scenario config file")->required();
  cmd_run->add_option("--out", out_dir, "output directory (overrides the config)");
  cmd_run->add_option("--tolerance", tolerance, "verdict tolerance (overrides the config)");
  cmd_run->add_flag("--include-zero", include_zero, "add the origin to the hull");

  CLI::App* cmd_conv =
      app.add_subcommand("convergence", "resolution sweep against the closed-form solution");
  cmd_conv->add_option("--config", config, "scenario config file")->required();
  cmd_conv->add_option("--out", out_dir, "output directory (overrides the config)");

  std::string field_csv;
  std::string traj_csv;
  std::string hull_csv;
  std::string expect = "pass";
  CLI::App* cmd_verify = app.add_subcommand("verify", "re-check a dumped solution");
  cmd_verify->add_option("--field", field_csv, "solution CSV to check");
  cmd_verify->add_option("--trajectory", traj_csv, "trajectory index (times.csv) to check");
  cmd_verify->add_option("--hull", hull_csv, "hull CSV (default: recompute from the data)");
  cmd_verify->add_option("--tolerance", tolerance, "verdict tolerance");
  cmd_verify->add_flag("--include-zero", include_zero, "add the origin to the hull");
  cmd_verify->add_option("--expect", expect, "expected verdict, pass or fail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // --help is a success, anything else bad input
  }

  try {
    if (cmd_run->parsed()) {
      const chp::ScenarioConfig cfg = chp::load_config(config);
      return chp::run_scenario(cfg, {out_dir, tolerance, include_zero});
    }
    if (cmd_conv->parsed()) {
      const chp::ScenarioConfig cfg = chp::load_config(config);
      return chp::run_convergence(cfg, {out_dir, tolerance, include_zero});
    }
    chp::VerifyOptions vo;
    vo.field_csv = field_csv;
    vo.trajectory_csv = traj_csv;
    vo.hull_csv = hull_csv;
    vo.expect = expect;
    vo.tolerance = tolerance;
    vo.include_zero = include_zero;
    return chp::run_verify(vo);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
