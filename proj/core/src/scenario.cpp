#include "gradobs/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gradobs/errors.hpp"

namespace gradobs {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

void require_object(const json& j, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* key : allowed)
      if (it.key() == key) {
        known = true;
        break;
      }
    if (!known) fail(path, "unknown key \"" + it.key() + "\"");
  }
}

const json& member(const json& j, const std::string& path, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(path, std::string("missing key \"") + key + "\"");
  return *it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> as_number_array(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (size_t k = 0; k < j.size(); ++k)
    out.push_back(as_number(j[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

Point parse_point(const json& j, const std::string& path, int dim) {
  if (dim == 1) {
    if (!j.is_number()) fail(path, "expected a number (interval domain)");
    return {j.get<double>(), 0.0};
  }
  if (!j.is_array() || j.size() != 2) fail(path, "expected [x1, x2]");
  return {as_number(j[0], path + "[0]"), as_number(j[1], path + "[1]")};
}

Subregion parse_box(const json& j, const std::string& path, int dim) {
  if (dim == 1) {
    require_object(j, path, {"alpha", "beta"});
    return Subregion::interval(as_number(member(j, path, "alpha"), path + ".alpha"),
                               as_number(member(j, path, "beta"), path + ".beta"));
  }
  require_object(j, path, {"alpha1", "beta1", "alpha2", "beta2"});
  return Subregion::rectangle(
      as_number(member(j, path, "alpha1"), path + ".alpha1"),
      as_number(member(j, path, "beta1"), path + ".beta1"),
      as_number(member(j, path, "alpha2"), path + ".alpha2"),
      as_number(member(j, path, "beta2"), path + ".beta2"));
}

SensorWeight parse_weight(const json& j, const std::string& path, int dim) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "constant") return SensorWeight::constant();
    if (name == "symmetric") return SensorWeight::symmetric();
    fail(path, "weight must be \"constant\", \"symmetric\" or a tabulated object");
  }
  require_object(j, path, {"type", "values", "values1", "values2"});
  if (as_string(member(j, path, "type"), path + ".type") != "tabulated")
    fail(path + ".type", "only \"tabulated\" weight objects are recognized");
  if (dim == 1 || j.contains("values")) {
    auto v = as_number_array(member(j, path, "values"), path + ".values");
    if (v.size() < 2) fail(path + ".values", "need at least 2 samples");
    return SensorWeight::tabulated(std::move(v));
  }
  auto v1 = as_number_array(member(j, path, "values1"), path + ".values1");
  auto v2 = as_number_array(member(j, path, "values2"), path + ".values2");
  if (v1.size() < 2 || v2.size() < 2) fail(path, "need at least 2 samples per axis");
  return SensorWeight::tabulated(std::move(v1), std::move(v2));
}

BoundaryEdge parse_edge(const json& j, const std::string& path) {
  const std::string name = as_string(j, path);
  if (name == "left") return BoundaryEdge::Left;
  if (name == "right") return BoundaryEdge::Right;
  if (name == "bottom") return BoundaryEdge::Bottom;
  if (name == "top") return BoundaryEdge::Top;
  fail(path, "edge must be one of \"left\", \"right\", \"bottom\", \"top\"");
}

BoundarySegment parse_segment(const json& j, const std::string& path) {
  require_object(j, path, {"edge", "interval"});
  BoundarySegment seg;
  seg.edge = parse_edge(member(j, path, "edge"), path + ".edge");
  const json& iv = member(j, path, "interval");
  if (!iv.is_array() || iv.size() != 2) fail(path + ".interval", "expected [lo, hi]");
  seg.lo = as_number(iv[0], path + ".interval[0]");
  seg.hi = as_number(iv[1], path + ".interval[1]");
  return seg;
}

Sensor parse_sensor(const json& j, const std::string& path, int dim) {
  if (!j.is_object()) fail(path, "expected a sensor object");
  const std::string type = as_string(member(j, path, "type"), path + ".type");

  if (type == "pointwise") {
    require_object(j, path, {"type", "b"});
    PointwiseSensor s;
    s.b = parse_point(member(j, path, "b"), path + ".b", dim);
    return s;
  }
  if (type == "zone") {
    require_object(j, path, {"type", "support", "weight"});
    ZoneSensor s;
    s.support = parse_box(member(j, path, "support"), path + ".support", dim);
    if (j.contains("weight")) s.weight = parse_weight(j["weight"], path + ".weight", dim);
    return s;
  }
  if (type == "boundary_zone") {
    require_object(j, path, {"type", "edge", "interval", "parts", "weight"});
    BoundaryZoneSensor s;
    if (j.contains("parts")) {
      if (j.contains("edge") || j.contains("interval"))
        fail(path, "give either parts or edge+interval, not both");
      const json& parts = j["parts"];
      if (!parts.is_array() || parts.empty())
        fail(path + ".parts", "expected a non-empty array of segments");
      for (size_t k = 0; k < parts.size(); ++k)
        s.parts.push_back(
            parse_segment(parts[k], path + ".parts[" + std::to_string(k) + "]"));
    } else {
      s.parts.push_back(parse_segment(j, path));
    }
    if (j.contains("weight")) s.weight = parse_weight(j["weight"], path + ".weight", 1);
    return s;
  }
  if (type == "boundary_pointwise") {
    require_object(j, path, {"type", "b"});
    BoundaryPointwiseSensor s;
    s.b = parse_point(member(j, path, "b"), path + ".b", dim);
    return s;
  }
  if (type == "filament") {
    require_object(j, path, {"type", "points", "weights", "nodes_per_segment"});
    FilamentSensor s;
    const json& pts = member(j, path, "points");
    if (!pts.is_array() || pts.size() < 2)
      fail(path + ".points", "expected an array of at least 2 points");
    for (size_t k = 0; k < pts.size(); ++k)
      s.points.push_back(
          parse_point(pts[k], path + ".points[" + std::to_string(k) + "]", dim));
    if (j.contains("weights"))
      s.segment_weights = as_number_array(j["weights"], path + ".weights");
    if (j.contains("nodes_per_segment")) {
      s.nodes_per_segment = as_int(j["nodes_per_segment"], path + ".nodes_per_segment");
      if (s.nodes_per_segment < 1) fail(path + ".nodes_per_segment", "must be >= 1");
    }
    return s;
  }
  fail(path + ".type",
       "sensor type must be one of \"pointwise\", \"zone\", \"boundary_zone\", "
       "\"boundary_pointwise\", \"filament\"");
}

json box_to_json(const Subregion& box) {
  if (box.dim == 1) return {{"alpha", box.lo[0]}, {"beta", box.hi[0]}};
  return {{"alpha1", box.lo[0]},
          {"beta1", box.hi[0]},
          {"alpha2", box.lo[1]},
          {"beta2", box.hi[1]}};
}

json point_to_json(const Point& p, int dim) {
  if (dim == 1) return p[0];
  return json::array({p[0], p[1]});
}

json weight_to_json(const SensorWeight& w) {
  switch (w.kind) {
    case SensorWeight::Kind::Constant:
      return "constant";
    case SensorWeight::Kind::Symmetric:
      return "symmetric";
    case SensorWeight::Kind::Tabulated:
      break;
  }
  json out{{"type", "tabulated"}};
  if (w.table[1].empty()) {
    out["values"] = w.table[0];
  } else {
    out["values1"] = w.table[0];
    out["values2"] = w.table[1];
  }
  return out;
}

const char* edge_name(BoundaryEdge e) {
  switch (e) {
    case BoundaryEdge::Left: return "left";
    case BoundaryEdge::Right: return "right";
    case BoundaryEdge::Bottom: return "bottom";
    case BoundaryEdge::Top: return "top";
  }
  return "left";
}

json sensor_to_json(const Sensor& sensor, int dim) {
  struct Visitor {
    int dim;
    json operator()(const PointwiseSensor& s) const {
      return {{"type", "pointwise"}, {"b", point_to_json(s.b, dim)}};
    }
    json operator()(const ZoneSensor& s) const {
      return {{"type", "zone"},
              {"support", box_to_json(s.support)},
              {"weight", weight_to_json(s.weight)}};
    }
    json operator()(const BoundaryZoneSensor& s) const {
      json parts = json::array();
      for (const auto& seg : s.parts)
        parts.push_back({{"edge", edge_name(seg.edge)},
                         {"interval", json::array({seg.lo, seg.hi})}});
      return {{"type", "boundary_zone"},
              {"parts", parts},
              {"weight", weight_to_json(s.weight)}};
    }
    json operator()(const BoundaryPointwiseSensor& s) const {
      return {{"type", "boundary_pointwise"}, {"b", point_to_json(s.b, dim)}};
    }
    json operator()(const FilamentSensor& s) const {
      json pts = json::array();
      for (const auto& p : s.points) pts.push_back(point_to_json(p, dim));
      json out{{"type", "filament"}, {"points", pts}};
      if (!s.segment_weights.empty()) out["weights"] = s.segment_weights;
      out["nodes_per_segment"] = s.nodes_per_segment;
      return out;
    }
  };
  return std::visit(Visitor{dim}, sensor);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

ScenarioConfig parse_scenario(const json& j) {
  ScenarioConfig config;
  require_object(j, "$",
                 {"domain", "coefficients", "truncation", "subregion", "sensors",
                  "unstable_margin", "observer", "initial", "quadrature", "seed"});

  const json& dom = member(j, "$", "domain");
  require_object(dom, "$.domain", {"type", "a", "a1", "a2"});
  const std::string type = as_string(member(dom, "$.domain", "type"), "$.domain.type");
  if (type == "interval") {
    if (dom.contains("a1") || dom.contains("a2"))
      fail("$.domain", "interval domains take \"a\", not \"a1\"/\"a2\"");
    config.model.geometry =
        DomainGeometry::interval(as_number(member(dom, "$.domain", "a"), "$.domain.a"));
  } else if (type == "rectangle") {
    if (dom.contains("a"))
      fail("$.domain", "rectangle domains take \"a1\"/\"a2\", not \"a\"");
    config.model.geometry = DomainGeometry::rectangle(
        as_number(member(dom, "$.domain", "a1"), "$.domain.a1"),
        as_number(member(dom, "$.domain", "a2"), "$.domain.a2"));
  } else {
    fail("$.domain.type", "must be \"interval\" or \"rectangle\"");
  }
  const int dim = config.model.geometry.dim;

  const json& coeff = member(j, "$", "coefficients");
  require_object(coeff, "$.coefficients", {"gamma1", "gamma2"});
  config.model.gamma1 =
      as_number(member(coeff, "$.coefficients", "gamma1"), "$.coefficients.gamma1");
  config.model.gamma2 =
      as_number(member(coeff, "$.coefficients", "gamma2"), "$.coefficients.gamma2");

  const json& trunc = member(j, "$", "truncation");
  require_object(trunc, "$.truncation", {"n", "n1", "n2"});
  if (dim == 1) {
    if (trunc.contains("n1") || trunc.contains("n2"))
      fail("$.truncation", "interval domains take \"n\", not \"n1\"/\"n2\"");
    config.model.n1 = as_int(member(trunc, "$.truncation", "n"), "$.truncation.n");
    config.model.n2 = 0;
  } else {
    if (trunc.contains("n"))
      fail("$.truncation", "rectangle domains take \"n1\"/\"n2\", not \"n\"");
    config.model.n1 = as_int(member(trunc, "$.truncation", "n1"), "$.truncation.n1");
    config.model.n2 = as_int(member(trunc, "$.truncation", "n2"), "$.truncation.n2");
  }

  config.omega = parse_box(member(j, "$", "subregion"), "$.subregion", dim);

  const json& sensors = member(j, "$", "sensors");
  if (!sensors.is_array() || sensors.empty())
    fail("$.sensors", "expected a non-empty array of sensors");
  for (size_t k = 0; k < sensors.size(); ++k)
    config.sensors.push_back(
        parse_sensor(sensors[k], "$.sensors[" + std::to_string(k) + "]", dim));

  if (j.contains("unstable_margin")) {
    config.unstable_margin = as_number(j["unstable_margin"], "$.unstable_margin");
    if (config.unstable_margin < 0.0) fail("$.unstable_margin", "must be >= 0");
  }

  if (j.contains("observer")) {
    const json& obs = j["observer"];
    require_object(obs, "$.observer", {"target_mu", "horizon", "dt", "output_every"});
    if (obs.contains("target_mu")) {
      config.observer.target_mu = as_number(obs["target_mu"], "$.observer.target_mu");
      if (!(config.observer.target_mu < 0.0))
        fail("$.observer.target_mu", "must be negative");
    }
    if (obs.contains("horizon")) {
      config.observer.horizon = as_number(obs["horizon"], "$.observer.horizon");
      if (!(config.observer.horizon > 0.0)) fail("$.observer.horizon", "must be > 0");
    }
    if (obs.contains("dt")) {
      config.observer.dt = as_number(obs["dt"], "$.observer.dt");
      if (!(config.observer.dt > 0.0)) fail("$.observer.dt", "must be > 0");
    }
    if (obs.contains("output_every")) {
      config.observer.output_every = as_int(obs["output_every"], "$.observer.output_every");
      if (config.observer.output_every < 1) fail("$.observer.output_every", "must be >= 1");
    }
  }

  if (j.contains("initial")) {
    const json& init = j["initial"];
    require_object(init, "$.initial", {"x0", "zhat0"});
    const auto parse_state = [&](const char* key, const char* default_name,
                                 std::vector<double>& target, bool& is_default) {
      if (!init.contains(key)) return;
      const std::string path = std::string("$.initial.") + key;
      const json& v = init[key];
      if (v.is_string()) {
        const std::string name = v.get<std::string>();
        const int count = config.model.mode_count();
        if (name == "ones")
          target.assign(static_cast<size_t>(count), 1.0);
        else if (name == "zeros")
          target.assign(static_cast<size_t>(count), 0.0);
        else
          fail(path, "must be \"ones\", \"zeros\" or an array of coefficients");
        // Naming the key's own default keeps the shorthand through a
        // load/store cycle, so serialized configs reload verbatim.
        is_default = (name == default_name);
        return;
      }
      target = as_number_array(v, path);
      if (static_cast<int>(target.size()) != config.model.mode_count())
        fail(path, "coefficient count " + std::to_string(target.size()) +
                       " != retained mode count " +
                       std::to_string(config.model.mode_count()));
      is_default = false;
    };
    parse_state("x0", "ones", config.initial.x0, config.initial.x0_default);
    parse_state("zhat0", "zeros", config.initial.zhat0, config.initial.zhat0_default);
  }

  if (j.contains("quadrature")) {
    const json& quad = j["quadrature"];
    require_object(quad, "$.quadrature", {"order"});
    if (quad.contains("order")) {
      config.quadrature_order = as_int(quad["order"], "$.quadrature.order");
      if (config.quadrature_order < 1) fail("$.quadrature.order", "must be >= 1");
    }
  }

  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0)
      fail("$.seed", "expected a non-negative integer");
    config.seed = static_cast<unsigned>(j["seed"].get<long long>());
  }

  validate_model(config.model);
  if (config.omega.dim != dim) fail("$.subregion", "dimension mismatch");
  if (!contained_in_domain(config.omega, config.model.geometry))
    fail("$.subregion", "subregion is not contained in the domain");
  if (!(config.omega.measure() > 0.0)) fail("$.subregion", "subregion has zero measure");
  for (size_t k = 0; k < config.sensors.size(); ++k) {
    try {
      validate_sensor(config.sensors[k], config.model.geometry);
    } catch (const ConfigError& e) {
      fail("$.sensors[" + std::to_string(k) + "]", e.what());
    }
  }
  return config;
}

ScenarioConfig parse_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read scenario file: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
  return parse_scenario(j);
}

json serialize_scenario(const ScenarioConfig& config) {
  const int dim = config.model.geometry.dim;
  json j;
  if (dim == 1) {
    j["domain"] = {{"type", "interval"}, {"a", config.model.geometry.length[0]}};
    j["truncation"] = {{"n", config.model.n1}};
  } else {
    j["domain"] = {{"type", "rectangle"},
                   {"a1", config.model.geometry.length[0]},
                   {"a2", config.model.geometry.length[1]}};
    j["truncation"] = {{"n1", config.model.n1}, {"n2", config.model.n2}};
  }
  j["coefficients"] = {{"gamma1", config.model.gamma1}, {"gamma2", config.model.gamma2}};
  j["subregion"] = box_to_json(config.omega);
  j["sensors"] = json::array();
  for (const auto& s : config.sensors) j["sensors"].push_back(sensor_to_json(s, dim));
  j["unstable_margin"] = config.unstable_margin;
  j["observer"] = {{"target_mu", config.observer.target_mu},
                   {"horizon", config.observer.horizon},
                   {"dt", config.observer.dt},
                   {"output_every", config.observer.output_every}};
  json init;
  init["x0"] = config.initial.x0_default ? json("ones") : json(config.initial.x0);
  init["zhat0"] = config.initial.zhat0_default ? json("zeros") : json(config.initial.zhat0);
  j["initial"] = init;
  j["quadrature"] = {{"order", config.quadrature_order}};
  j["seed"] = config.seed;
  return j;
}

namespace {

ScenarioConfig rectangle_base() {
  ScenarioConfig config;
  config.model.geometry = DomainGeometry::rectangle(1.0, 2.0);
  config.model.gamma1 = 0.01;
  config.model.gamma2 = 0.45;
  config.model.n1 = 16;
  config.model.n2 = 16;
  config.omega = Subregion::rectangle(0.25, 0.75, 0.5, 1.5);
  // Four simple unstable clusters behind one sensor: a gentle decay target
  // keeps the single-output placement well conditioned.
  config.observer.target_mu = -0.5;
  return config;
}

}  // namespace

ScenarioConfig canned_scenario(const std::string& name) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  if (name == "example_4_5") {
    ScenarioConfig config;
    config.model.geometry = DomainGeometry::interval(1.0);
    config.model.gamma1 = 0.01;
    config.model.gamma2 = 1.0;
    config.model.n1 = 16;
    config.omega = Subregion::interval(0.2, 0.8);
    config.sensors.push_back(PointwiseSensor{{inv_sqrt2, 0.0}});
    return config;
  }
  if (name == "corollary_5_1") {
    ScenarioConfig config = rectangle_base();
    config.sensors.push_back(PointwiseSensor{{inv_sqrt2, std::exp(1.0) / 2.0}});
    return config;
  }
  if (name == "corollary_5_2_one_side") {
    ScenarioConfig config = rectangle_base();
    BoundaryZoneSensor s;
    s.parts.push_back({BoundaryEdge::Right, 0.0, 0.7});
    config.sensors.push_back(std::move(s));
    return config;
  }
  if (name == "corollary_5_2_two_side") {
    // Unequal segment lengths: on this aspect ratio, equal corner-anchored
    // segments on the right and top edges cancel exactly against the (1,2)
    // mode for every length, which would defeat the sensor.
    ScenarioConfig config = rectangle_base();
    BoundaryZoneSensor s;
    s.parts.push_back({BoundaryEdge::Right, 0.0, 0.7});
    s.parts.push_back({BoundaryEdge::Top, 0.0, 0.5});
    config.sensors.push_back(std::move(s));
    return config;
  }
  if (name == "corollary_5_3_internal") {
    ScenarioConfig config = rectangle_base();
    ZoneSensor s;
    s.support = Subregion::rectangle(0.2, 0.5, 0.3, 0.8);
    config.sensors.push_back(std::move(s));
    return config;
  }
  if (name == "corollary_5_3_filament") {
    ScenarioConfig config = rectangle_base();
    FilamentSensor s;
    s.points = {{0.2, 0.3}, {0.7, 1.1}, {0.5, 1.7}};
    config.sensors.push_back(std::move(s));
    return config;
  }
  if (name == "corollary_5_3_boundary") {
    ScenarioConfig config = rectangle_base();
    config.sensors.push_back(BoundaryPointwiseSensor{{1.0, std::sqrt(2.0)}});
    return config;
  }
  throw ConfigError("unknown canned scenario \"" + name + "\"; known names: " +
                    [] {
                      std::string all;
                      for (const auto& n : canned_scenario_names()) {
                        if (!all.empty()) all += ", ";
                        all += n;
                      }
                      return all;
                    }());
}

std::vector<std::string> canned_scenario_names() {
  return {"example_4_5",
          "corollary_5_1",
          "corollary_5_2_one_side",
          "corollary_5_2_two_side",
          "corollary_5_3_internal",
          "corollary_5_3_filament",
          "corollary_5_3_boundary"};
}

AnalysisRun run_analysis(const ScenarioConfig& config) {
  AnalysisRun run;
  run.output = build_output_matrix(config.sensors, config.model, config.quadrature_order);
  run.report = check_strategic(run.output, config.omega, config.unstable_margin);
  return run;
}

SimulationRun run_simulation(const ScenarioConfig& config, bool forced) {
  AnalysisRun analysis = run_analysis(config);
  if (!analysis.report.verdict && !forced)
    throw NotStrategicError(
        "sensor configuration fails the rank test; pass force to simulate anyway "
        "with the visible-part gain");

  GainOptions gopt;
  gopt.target_mu = config.observer.target_mu;
  gopt.unstable_margin = config.unstable_margin;
  gopt.best_effort = forced;
  ObserverGain gain = synthesize_gain(analysis.output, gopt);

  SimulationRun run;
  run.report = std::move(analysis.report);
  run.system.model = config.model;
  run.system.output = std::move(analysis.output);
  run.system.gain = std::move(gain);
  run.system.omega = config.omega;
  run.system.quadrature_order = config.quadrature_order;
  const int M = config.model.mode_count();
  run.system.x0 = config.initial.x0_default
                      ? Eigen::VectorXd::Ones(M).eval()
                      : Eigen::Map<const Eigen::VectorXd>(config.initial.x0.data(),
                                                          static_cast<Eigen::Index>(
                                                              config.initial.x0.size()))
                            .eval();
  run.system.zhat0 = config.initial.zhat0_default
                         ? Eigen::VectorXd::Zero(M).eval()
                         : Eigen::Map<const Eigen::VectorXd>(
                               config.initial.zhat0.data(),
                               static_cast<Eigen::Index>(config.initial.zhat0.size()))
                               .eval();
  if (run.system.x0.size() != M || run.system.zhat0.size() != M)
    throw ConfigError("initial coefficient count != retained mode count");

  SimulateOptions sopt;
  sopt.horizon = config.observer.horizon;
  sopt.dt = config.observer.dt;
  sopt.output_every = config.observer.output_every;
  run.result = simulate(run.system, sopt);
  run.decay = estimate_decay_rate(run.result);
  return run;
}

double sweep_position(const Sensor& sensor) {
  struct Visitor {
    double operator()(const PointwiseSensor& s) const { return s.b[0]; }
    double operator()(const ZoneSensor& s) const {
      return 0.5 * (s.support.lo[0] + s.support.hi[0]);
    }
    double operator()(const BoundaryZoneSensor& s) const {
      if (s.parts.size() != 1)
        throw ConfigError("sweep needs a single-segment boundary zone sensor");
      return 0.5 * (s.parts[0].lo + s.parts[0].hi);
    }
    double operator()(const BoundaryPointwiseSensor& s) const {
      // The in-edge coordinate: whichever axis is not pinned to the boundary.
      return s.b[1] == 0.0 && s.b[0] != 0.0 ? s.b[0] : s.b[1];
    }
    double operator()(const FilamentSensor&) const {
      throw ConfigError("filament sensors have no scalar sweep position");
    }
  };
  return std::visit(Visitor{}, sensor);
}

void set_sweep_position(Sensor& sensor, double position) {
  struct Visitor {
    double position;
    void operator()(PointwiseSensor& s) const { s.b[0] = position; }
    void operator()(ZoneSensor& s) const {
      const double half = 0.5 * (s.support.hi[0] - s.support.lo[0]);
      s.support.lo[0] = position - half;
      s.support.hi[0] = position + half;
    }
    void operator()(BoundaryZoneSensor& s) const {
      if (s.parts.size() != 1)
        throw ConfigError("sweep needs a single-segment boundary zone sensor");
      const double half = 0.5 * (s.parts[0].hi - s.parts[0].lo);
      s.parts[0].lo = position - half;
      s.parts[0].hi = position + half;
    }
    void operator()(BoundaryPointwiseSensor& s) const {
      if (s.b[1] == 0.0 && s.b[0] != 0.0)
        s.b[0] = position;
      else
        s.b[1] = position;
    }
    void operator()(FilamentSensor&) const {
      throw ConfigError("filament sensors have no scalar sweep position");
    }
  };
  std::visit(Visitor{position}, sensor);
}

std::vector<SweepPoint> run_sweep(const ScenarioConfig& config, int sensor_index,
                                  double from, double to, int steps,
                                  bool with_simulation) {
  if (sensor_index < 0 || sensor_index >= static_cast<int>(config.sensors.size()))
    throw ConfigError("sweep sensor index out of range");
  if (steps < 1) throw ConfigError("sweep needs at least 1 step");

  std::vector<SweepPoint> points;
  points.reserve(static_cast<size_t>(steps));
  for (int k = 0; k < steps; ++k) {
    const double pos =
        steps == 1 ? from : from + (to - from) * static_cast<double>(k) / (steps - 1);
    ScenarioConfig local = config;
    set_sweep_position(local.sensors[static_cast<size_t>(sensor_index)], pos);
    validate_sensor(local.sensors[static_cast<size_t>(sensor_index)],
                    local.model.geometry);

    SweepPoint point;
    point.position = pos;
    if (with_simulation) {
      SimulationRun run = run_simulation(local, /*forced=*/true);
      point.verdict = run.report.verdict;
      point.margin = run.report.margin;
      point.fitted_rate = run.decay.degenerate ? 0.0 : run.decay.rate;
    } else {
      AnalysisRun run = run_analysis(local);
      point.verdict = run.report.verdict;
      point.margin = run.report.margin;
    }
    points.push_back(point);
  }
  return points;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_report_json(const StrategicReport& report, const std::filesystem::path& path) {
  write_text_file(path, to_json(report).dump(2) + "\n");
}

void write_trajectory_csv(const SimulationResult& result,
                          const std::filesystem::path& path) {
  std::ostringstream out;
  out << "t,err_h1_omega,err_l2_omega";
  for (const auto& label : result.mode_labels) out << ",err_mode_" << label.label();
  out << "\n";
  for (size_t k = 0; k < result.times.size(); ++k) {
    const Eigen::Index col = static_cast<Eigen::Index>(k);
    out << format_double(result.times[k]) << ',' << format_double(result.err_h1_omega[col])
        << ',' << format_double(result.err_l2_omega[col]);
    for (Eigen::Index m = 0; m < result.err_modal.rows(); ++m)
      out << ',' << format_double(result.err_modal(m, col));
    out << "\n";
  }
  write_text_file(path, out.str());
}

void write_decay_json(const DecayEstimate& decay, const std::filesystem::path& path) {
  json j;
  j["degenerate"] = decay.degenerate;
  j["fit_window"] = json::array({decay.window_start, decay.window_end});
  j["goodness_of_fit"] = decay.goodness_of_fit;
  j["rate"] = decay.rate;
  write_text_file(path, j.dump(2) + "\n");
}

void write_sweep_csv(const std::vector<SweepPoint>& points, bool with_rate_column,
                     const std::filesystem::path& path) {
  std::ostringstream out;
  out << "position,verdict,margin";
  if (with_rate_column) out << ",fitted_rate";
  out << "\n";
  for (const auto& p : points) {
    out << format_double(p.position) << ',' << (p.verdict ? 1 : 0) << ','
        << format_double(p.margin);
    if (with_rate_column) out << ',' << format_double(p.fitted_rate.value_or(0.0));
    out << "\n";
  }
  write_text_file(path, out.str());
}

}  // namespace gradobs
