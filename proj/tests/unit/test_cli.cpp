#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "gradobs/scenario.hpp"

#ifdef GRADOBS_CLI_PATH

using namespace gradobs;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int status = -1;
  std::string output;
};

// Runs the tool through the shell with stderr folded into stdout.
CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  CliResult result;
  const std::string cmd = env_prefix + GRADOBS_CLI_PATH " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (size_t n = fread(buf, 1, sizeof buf, pipe)) result.output.append(buf, n);
  const int rc = pclose(pipe);
  result.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return result;
}

fs::path scratch_dir(const std::string& leaf) {
  const fs::path dir = fs::temp_directory_path() / "gradobs_cli" / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// example_4_5 with the sensor moved to the blind midpoint.
fs::path write_midpoint_scenario(const fs::path& dir) {
  auto config = canned_scenario("example_4_5");
  set_sweep_position(config.sensors[0], 0.5);
  const fs::path file = dir / "midpoint.json";
  std::ofstream(file) << serialize_scenario(config).dump(2) << "\n";
  return file;
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("canned listing and emission") {
  const auto list = run_cli("canned");
  CHECK(list.status == 0);
  CHECK(count_lines(list.output) == 7);
  CHECK(list.output.rfind("example_4_5\n", 0) == 0);

  const auto emitted = run_cli("canned example_4_5");
  CHECK(emitted.status == 0);
  const auto j = nlohmann::json::parse(emitted.output);
  CHECK(j["domain"]["type"] == "interval");

  const fs::path dir = scratch_dir("canned");
  const auto saved = run_cli("canned corollary_5_1 --out " + (dir / "c51.json").string());
  CHECK(saved.status == 0);
  CHECK_NOTHROW(parse_scenario_file(dir / "c51.json"));

  CHECK(run_cli("canned bogus").status == 1);
}

TEST_CASE("analyze writes a report and honors exit codes") {
  const fs::path dir = scratch_dir("analyze");
  const auto ok = run_cli("analyze --canned example_4_5 --outdir " + dir.string());
  CHECK(ok.status == 0);
  CHECK(ok.output.find("strategic: yes") != std::string::npos);
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report["verdict"] == true);
  CHECK(report["q"] == 1);

  CHECK(run_cli("analyze /nonexistent/scenario.json").status == 1);
  CHECK(run_cli("analyze --canned example_4_5 extra.json").status == 1);
  CHECK(run_cli("analyze").status == 1);
  CHECK(run_cli("analyze --canned example_4_5 --quadrature-order -2").status == 1);
}

TEST_CASE("require-strategic turns a negative verdict into exit 3") {
  const fs::path dir = scratch_dir("strict");
  const fs::path midpoint = write_midpoint_scenario(dir);

  const auto lax = run_cli("analyze " + midpoint.string() + " --outdir " + dir.string());
  CHECK(lax.status == 0);
  CHECK(lax.output.find("strategic: no") != std::string::npos);

  const auto strict = run_cli("analyze " + midpoint.string() +
                              " --require-strategic --outdir " + dir.string());
  CHECK(strict.status == 3);
}

TEST_CASE("simulate writes the trajectory artifacts") {
  const fs::path dir = scratch_dir("simulate");
  const auto run = run_cli("simulate --canned example_4_5 --outdir " + dir.string());
  CHECK(run.status == 0);
  CHECK(run.output.find("decay rate:") != std::string::npos);

  const std::string traj = slurp(dir / "trajectory.csv");
  CHECK(count_lines(traj) == 1002);  // header + 1001 stored instants
  CHECK(traj.rfind("t,err_h1_omega,err_l2_omega,", 0) == 0);

  const auto decay = nlohmann::json::parse(slurp(dir / "decay.json"));
  CHECK(decay["degenerate"] == false);
  CHECK(decay["rate"].get<double>() > 0.3);
  CHECK(nlohmann::json::parse(slurp(dir / "report.json"))["verdict"] == true);
}

TEST_CASE("simulate on a blind layout needs force") {
  const fs::path dir = scratch_dir("force");
  const fs::path midpoint = write_midpoint_scenario(dir);

  CHECK(run_cli("simulate " + midpoint.string() + " --outdir " + dir.string()).status == 3);

  const auto forced = run_cli("simulate " + midpoint.string() + " --force --outdir " +
                              dir.string());
  CHECK(forced.status == 0);
  const auto decay = nlohmann::json::parse(slurp(dir / "decay.json"));
  CHECK(decay["rate"].get<double>() < 0.0);
}

TEST_CASE("an unstable step size exits with the numerical code") {
  const fs::path dir = scratch_dir("dt");
  auto config = canned_scenario("example_4_5");
  config.observer.dt = 0.5;
  config.observer.horizon = 2.0;
  const fs::path file = dir / "huge_dt.json";
  std::ofstream(file) << serialize_scenario(config).dump(2) << "\n";

  const auto run = run_cli("simulate " + file.string() + " --outdir " + dir.string());
  CHECK(run.status == 2);
  CHECK(run.output.find("integrator error") != std::string::npos);
}

TEST_CASE("sweep writes one row per position") {
  const fs::path dir = scratch_dir("sweep");
  const auto run = run_cli(
      "sweep --canned example_4_5 --from 0.3 --to 0.7 --steps 5 --outdir " +
      dir.string());
  CHECK(run.status == 0);
  CHECK(run.output.find("5 positions, 4 strategic") != std::string::npos);

  const std::string csv = slurp(dir / "sweep.csv");
  CHECK(count_lines(csv) == 6);
  CHECK(csv.rfind("position,verdict,margin\n", 0) == 0);
  CHECK(csv.find("\n0.5,0,") != std::string::npos);  // the blind midpoint row

  CHECK(run_cli("sweep --canned example_4_5 --from 0.3 --to 0.7").status == 1);
}

TEST_CASE("outdir falls back to the environment") {
  const fs::path dir = scratch_dir("envdir");
  const auto run = run_cli("analyze --canned example_4_5",
                           "GRADOBS_OUTDIR=" + dir.string() + " ");
  CHECK(run.status == 0);
  CHECK(fs::exists(dir / "report.json"));
}

TEST_CASE("repeated runs produce byte-identical artifacts") {
  const fs::path a = scratch_dir("det_a");
  const fs::path b = scratch_dir("det_b");
  CHECK(run_cli("simulate --canned example_4_5 --outdir " + a.string()).status == 0);
  CHECK(run_cli("simulate --canned example_4_5 --outdir " + b.string()).status == 0);
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
  CHECK(slurp(a / "decay.json") == slurp(b / "decay.json"));
}

TEST_SUITE_END();

#endif  // GRADOBS_CLI_PATH
