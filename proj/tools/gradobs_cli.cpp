// Command-line front end: strategic analysis, observer simulation, position
// sweeps and canned study presets. Artifacts are written to --outdir (or
// $GRADOBS_OUTDIR, or the working directory).

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gradobs/errors.hpp"
#include "gradobs/scenario.hpp"

namespace fs = std::filesystem;
using namespace gradobs;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitNotStrategic = 3;

struct CommonArgs {
  std::string scenario_file;
  std::string canned_name;
  std::string outdir;
  int quadrature_order = 0;  // 0 = keep the scenario's order
};

ScenarioConfig load_config(const CommonArgs& args) {
  if (args.scenario_file.empty() == args.canned_name.empty())
    throw ConfigError("give exactly one of a scenario file or --canned NAME");
  ScenarioConfig config = args.canned_name.empty()
                              ? parse_scenario_file(args.scenario_file)
                              : canned_scenario(args.canned_name);
  if (args.quadrature_order > 0) config.quadrature_order = args.quadrature_order;
  return config;
}

fs::path resolve_outdir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("GRADOBS_OUTDIR"); env && *env) return env;
  return ".";
}

void print_report(const StrategicReport& report) {
  std::cout << "sensors: " << report.q
            << ", largest unstable multiplicity: " << report.r << "\n";
  for (const auto& cluster : report.clusters) {
    std::cout << "  cluster lambda = " << format_double(cluster.lambda)
              << "  multiplicity " << cluster.multiplicity << "  rank " << cluster.rank
              << "/" << cluster.required_rank
              << (cluster.full_rank() ? "" : "  [deficient]") << "\n";
  }
  if (std::isinf(report.margin))
    std::cout << "margin: none (no unstable clusters)\n";
  else
    std::cout << "margin: " << format_double(report.margin) << "\n";
  std::cout << "strategic: " << (report.verdict ? "yes" : "no") << "\n";
}

int cmd_analyze(const CommonArgs& args, bool require_strategic) {
  const ScenarioConfig config = load_config(args);
  const AnalysisRun run = run_analysis(config);
  const fs::path outdir = resolve_outdir(args.outdir);
  fs::create_directories(outdir);
  write_report_json(run.report, outdir / "report.json");
  print_report(run.report);
  std::cout << "wrote " << (outdir / "report.json").string() << "\n";
  if (require_strategic && !run.report.verdict) return kExitNotStrategic;
  return kExitOk;
}

int cmd_simulate(const CommonArgs& args, bool force) {
  const ScenarioConfig config = load_config(args);
  const SimulationRun run = run_simulation(config, force);
  const fs::path outdir = resolve_outdir(args.outdir);
  fs::create_directories(outdir);
  write_report_json(run.report, outdir / "report.json");
  write_trajectory_csv(run.result, outdir / "trajectory.csv");
  write_decay_json(run.decay, outdir / "decay.json");

  print_report(run.report);
  const Eigen::Index last = run.result.err_h1_omega.size() - 1;
  std::cout << "final H1 gradient error on omega: "
            << format_double(run.result.err_h1_omega[last]) << "\n";
  if (run.decay.degenerate)
    std::cout << "decay rate: degenerate (error underflowed inside the fit window)\n";
  else
    std::cout << "decay rate: " << format_double(run.decay.rate)
              << "  (R^2 = " << format_double(run.decay.goodness_of_fit) << ")\n";
  std::cout << "wrote " << (outdir / "report.json").string() << ", "
            << (outdir / "trajectory.csv").string() << ", "
            << (outdir / "decay.json").string() << "\n";
  return kExitOk;
}

int cmd_sweep(const CommonArgs& args, int sensor_index, double from, double to,
              int steps, bool with_simulation) {
  const ScenarioConfig config = load_config(args);
  const auto points = run_sweep(config, sensor_index, from, to, steps, with_simulation);
  const fs::path outdir = resolve_outdir(args.outdir);
  fs::create_directories(outdir);
  write_sweep_csv(points, with_simulation, outdir / "sweep.csv");

  int strategic = 0;
  for (const auto& p : points) strategic += p.verdict ? 1 : 0;
  std::cout << points.size() << " positions, " << strategic << " strategic\n";
  std::cout << "wrote " << (outdir / "sweep.csv").string() << "\n";
  return kExitOk;
}

int cmd_canned(const std::string& name, const std::string& out_file) {
  if (name.empty()) {
    for (const auto& n : canned_scenario_names()) std::cout << n << "\n";
    return kExitOk;
  }
  const ScenarioConfig config = canned_scenario(name);
  const std::string text = serialize_scenario(config).dump(2) + "\n";
  if (out_file.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_file, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + out_file);
    out << text;
    std::cout << "wrote " << out_file << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regional gradient observability: strategic sensor analysis and "
               "observer simulation for diffusion dynamics"};
  app.require_subcommand(1);

  CommonArgs analyze_args, simulate_args, sweep_args;
  bool require_strategic = false, force = false, sweep_simulate = false;
  int sweep_sensor = 0, sweep_steps = 0;
  double sweep_from = 0.0, sweep_to = 0.0;
  std::string canned_name, canned_out;

  const auto add_common = [](CLI::App* sub, CommonArgs& args) {
    sub->add_option("scenario", args.scenario_file, "Scenario JSON file");
    sub->add_option("--canned", args.canned_name, "Canned scenario name");
    sub->add_option("--outdir", args.outdir,
                    "Artifact directory (default $GRADOBS_OUTDIR or .)");
    sub->add_option("--quadrature-order", args.quadrature_order,
                    "Override the per-axis quadrature order")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* analyze = app.add_subcommand(
      "analyze", "Rank-test the sensor configuration and write report.json");
  add_common(analyze, analyze_args);
  analyze->add_flag("--require-strategic", require_strategic,
                    "Exit with status 3 when the verdict is negative");

  CLI::App* simulate = app.add_subcommand(
      "simulate",
      "Design the observer gain, simulate, and write report.json + trajectory.csv "
      "+ decay.json");
  add_common(simulate, simulate_args);
  simulate->add_flag("--force", force,
                     "Simulate even when the rank test fails, correcting only the "
                     "visible clusters");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Re-run the analysis across sensor positions and write sweep.csv");
  add_common(sweep, sweep_args);
  sweep->add_option("--sensor", sweep_sensor, "Index of the sensor to move")
      ->capture_default_str();
  sweep->add_option("--from", sweep_from, "First position")->required();
  sweep->add_option("--to", sweep_to, "Last position")->required();
  sweep->add_option("--steps", sweep_steps, "Number of positions")
      ->required()
      ->check(CLI::PositiveNumber);
  sweep->add_flag("--simulate", sweep_simulate,
                  "Also run a forced simulation per position (fitted_rate column)");

  CLI::App* canned = app.add_subcommand(
      "canned", "Print a canned scenario as JSON (no name: list the known names)");
  canned->add_option("name", canned_name, "Canned scenario name");
  canned->add_option("--out", canned_out, "Write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(analyze_args, require_strategic);
    if (simulate->parsed()) return cmd_simulate(simulate_args, force);
    if (sweep->parsed())
      return cmd_sweep(sweep_args, sweep_sensor, sweep_from, sweep_to, sweep_steps,
                       sweep_simulate);
    if (canned->parsed()) return cmd_canned(canned_name, canned_out);
  } catch (const NotStrategicError& e) {
    std::cerr << "not strategic: " << e.what() << "\n";
    return kExitNotStrategic;
  } catch (const IntegratorError& e) {
    std::cerr << "integrator error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
