#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gradobs/observer.hpp"

namespace gradobs {

/// Complete description of one study: geometry, dynamics, truncation,
/// observation subregion, sensors, observer settings, initial data,
/// quadrature order and seed. Parses totally from JSON or fails with a
/// path-qualified ConfigError; unknown keys are errors.
struct ScenarioConfig {
  DiffusionModel model;
  Subregion omega;
  std::vector<Sensor> sensors;
  double unstable_margin = 0.0;

  struct Observer {
    double target_mu = -2.0;
    double horizon = 10.0;
    double dt = 1e-3;
    int output_every = 10;
  } observer;

  struct Initial {
    /// Explicit coefficients, or empty = the documented default
    /// (x0 all ones, zhat0 all zeros).
    std::vector<double> x0;
    std::vector<double> zhat0;
    bool x0_default = true;
    bool zhat0_default = true;
  } initial;

  int quadrature_order = 64;
  unsigned seed = 0;
};

ScenarioConfig parse_scenario(const nlohmann::json& j);
ScenarioConfig parse_scenario_file(const std::filesystem::path& path);
nlohmann::json serialize_scenario(const ScenarioConfig& config);

/// Canned study presets; throws ConfigError on an unknown name.
/// Names: example_4_5, corollary_5_1, corollary_5_2_one_side,
/// corollary_5_2_two_side, corollary_5_3_internal, corollary_5_3_filament,
/// corollary_5_3_boundary.
ScenarioConfig canned_scenario(const std::string& name);
std::vector<std::string> canned_scenario_names();

/// Analysis artifacts for one config.
struct AnalysisRun {
  StrategicReport report;
  OutputOperator output;
};

AnalysisRun run_analysis(const ScenarioConfig& config);

/// Simulation artifacts: analysis + gain + trajectory + decay fit.
struct SimulationRun {
  StrategicReport report;
  ObserverSystem system;
  SimulationResult result;
  DecayEstimate decay;
};

/// forced = true designs a best-effort gain and simulates even when the
/// verdict is false (negative controls); otherwise a false verdict throws
/// NotStrategicError.
SimulationRun run_simulation(const ScenarioConfig& config, bool forced = false);

struct SweepPoint {
  double position = 0.0;
  bool verdict = false;
  double margin = 0.0;
  std::optional<double> fitted_rate;
};

/// Move the declared sensor's scalar position across [from, to] in `steps`
/// evenly spaced points (steps = 1 -> just `from`) and re-run the analysis,
/// optionally with a forced simulation per point for the fitted rate column.
std::vector<SweepPoint> run_sweep(const ScenarioConfig& config, int sensor_index,
                                  double from, double to, int steps,
                                  bool with_simulation);

/// The scalar position parameter a sweep moves; throws ConfigError for sensor
/// kinds without one (filament, multi-part boundary zone).
double sweep_position(const Sensor& sensor);
void set_sweep_position(Sensor& sensor, double position);

/// File artifact writers. All floating-point values are written with 17
/// significant digits; identical config + seed produce byte-identical files.
void write_report_json(const StrategicReport& report, const std::filesystem::path& path);
void write_trajectory_csv(const SimulationResult& result, const std::filesystem::path& path);
void write_decay_json(const DecayEstimate& decay, const std::filesystem::path& path);
void write_sweep_csv(const std::vector<SweepPoint>& points, bool with_rate_column,
                     const std::filesystem::path& path);

/// Formats a double with 17 significant digits ("%.17g"), round-trip exact.
std::string format_double(double v);

}  // namespace gradobs
