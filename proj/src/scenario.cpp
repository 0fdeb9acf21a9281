#include "ecoplatoon/scenario.hpp"

#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include "json_util.hpp"

#ifndef ECOPLATOON_DEFAULT_PRESET_DIR
#define ECOPLATOON_DEFAULT_PRESET_DIR "presets"
#endif

namespace ecoplatoon {

namespace fs = std::filesystem;
using nlohmann::json;

Vector Scenario::InitialState() const {
  const double speed = initial_speed.value_or(platoon.target_speed);
  Vector x = EquilibriumStep(platoon, speed, 0.0);
  for (std::size_t j = 0; j < initial_gap_errors.size(); ++j) {
    x[TimeIndex(static_cast<int>(j) + 1)] -= initial_gap_errors[j];
  }
  return x;
}

void Scenario::Validate() const {
  platoon.Validate();
  weights.Validate();
  solver.Validate();
  baseline.Validate();
  fuel_model.Validate();
  if (initial_gap_errors.size() + 1 != static_cast<std::size_t>(platoon.num_vehicles()) &&
      !initial_gap_errors.empty()) {
    throw ConfigError("initial gap errors need one entry per follower");
  }
  if (initial_speed && !(*initial_speed > 0.0 && *initial_speed <= platoon.speed_limit)) {
    throw ConfigError("initial speed must be in (0, speed_limit]");
  }
  if (perturbation) perturbation->Validate(profile.total_length());
  if (horizon.mode == HorizonMode::kReceding &&
      !(horizon.window_length >= horizon.replan_interval && horizon.replan_interval > 0.0)) {
    throw ConfigError("receding horizon needs window_m >= replan_m > 0");
  }
  for (double d : bench.step_sizes) {
    if (!(d > 0.0)) throw ConfigError("bench step sizes must be positive");
  }
  for (double w : bench.windows) {
    if (!(w > 0.0)) throw ConfigError("bench windows must be positive");
  }
}

std::vector<fs::path> PresetSearchPath() {
  std::vector<fs::path> dirs;
  if (const char* env = std::getenv("ECOPLATOON_PRESET_DIR"); env != nullptr && *env != '\0') {
    dirs.emplace_back(env);
  }
  dirs.emplace_back(ECOPLATOON_DEFAULT_PRESET_DIR);
  return dirs;
}

fs::path ResolveScenarioPath(const std::string& argument) {
  const fs::path direct(argument);
  if (fs::is_regular_file(direct)) return direct;
  if (!direct.has_parent_path()) {
    for (const auto& dir : PresetSearchPath()) {
      for (const fs::path& candidate : {dir / argument, dir / (argument + ".json")}) {
        if (fs::is_regular_file(candidate)) return candidate;
      }
    }
  }
  throw ConfigError("scenario file not found: " + argument);
}

namespace {

// Key lookup with line-numbered diagnostics against the raw text.
class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  [[noreturn]] void Fail(std::string_view key, const std::string& what) const {
    std::ostringstream msg;
    msg << "scenario";
    const int line = detail::LineOfKey(text_, key);
    if (line > 0) msg << ": line " << line;
    msg << ": \"" << key << "\" " << what;
    throw ConfigError(msg.str());
  }

  void CheckKeys(const json& obj, std::string_view section,
                 std::initializer_list<std::string_view> allowed) const {
    if (!obj.is_object()) Fail(section, "must be an object");
    const std::set<std::string_view> ok(allowed);
    for (const auto& item : obj.items()) {
      if (ok.count(item.key()) == 0) Fail(item.key(), "is not a recognised key");
    }
  }

  double Number(const json& obj, std::string_view key, double fallback) const {
    const std::string k(key);
    if (!obj.contains(k)) return fallback;
    const auto& v = obj.at(k);
    if (!v.is_number()) Fail(key, "must be a number");
    return v.get<double>();
  }

  int Integer(const json& obj, std::string_view key, int fallback) const {
    const std::string k(key);
    if (!obj.contains(k)) return fallback;
    const auto& v = obj.at(k);
    if (!v.is_number_integer()) Fail(key, "must be an integer");
    return v.get<int>();
  }

  bool Boolean(const json& obj, std::string_view key, bool fallback) const {
    const std::string k(key);
    if (!obj.contains(k)) return fallback;
    const auto& v = obj.at(k);
    if (!v.is_boolean()) Fail(key, "must be true or false");
    return v.get<bool>();
  }

  std::string String(const json& obj, std::string_view key, const std::string& fallback) const {
    const std::string k(key);
    if (!obj.contains(k)) return fallback;
    const auto& v = obj.at(k);
    if (!v.is_string()) Fail(key, "must be a string");
    return v.get<std::string>();
  }

  std::vector<double> Numbers(const json& obj, std::string_view key,
                              std::vector<double> fallback) const {
    const std::string k(key);
    if (!obj.contains(k)) return fallback;
    const auto& v = obj.at(k);
    if (!v.is_array()) Fail(key, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) Fail(key, "must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  double Speed(const json& obj, std::string_view key, double fallback) const {
    const std::string k(key);
    if (!obj.contains(k)) return fallback;
    const auto& v = obj.at(k);
    if (v.is_number()) return v.get<double>();
    if (!v.is_object() || !v.contains("value") || !v.at("value").is_number()) {
      Fail(key, "must be a number (m/s) or {\"value\": x, \"unit\": \"mph\" | \"m/s\"}");
    }
    const double value = v.at("value").get<double>();
    const std::string unit = v.contains("unit") && v.at("unit").is_string()
                                 ? v.at("unit").get<std::string>()
                                 : "m/s";
    if (unit == "m/s") return value;
    if (unit == "mph") return value * kMphToMps;
    if (unit == "km/h") return value / 3.6;
    Fail(key, "has unknown unit \"" + unit + "\"");
  }

 private:
  std::string_view text_;
};

fs::path ResolveDataFile(const std::string& name, const fs::path& base_dir) {
  const fs::path p(name);
  if (p.is_absolute()) return p;
  if (fs::is_regular_file(base_dir / p)) return base_dir / p;
  for (const auto& dir : PresetSearchPath()) {
    if (fs::is_regular_file(dir / p)) return dir / p;
  }
  throw ConfigError("referenced file not found: " + name);
}

}  // namespace

Scenario ParseScenario(std::string_view json_text, const fs::path& base_dir) {
  const json doc = detail::ParseJson(json_text, "scenario");
  const Reader r(json_text);
  r.CheckKeys(doc, "scenario",
              {"name", "description", "road", "platoon", "initial", "weights", "solver",
               "baseline", "fuel_model", "perturbation", "horizon", "bench", "stability_sweep"});

  Scenario sc;
  sc.name = r.String(doc, "name", "scenario");

  // Road.
  if (!doc.contains("road")) r.Fail("road", "is required");
  const json& road = doc.at("road");
  r.CheckKeys(road, "road", {"preset", "profile_file", "breakpoints_m", "percent_grades"});
  if (road.contains("preset")) {
    sc.road_label = r.String(road, "preset", "");
    sc.profile = BuildPreset(ParseRoadClass(sc.road_label));
  } else if (road.contains("profile_file")) {
    sc.road_label = r.String(road, "profile_file", "");
    sc.profile = LoadSlopeProfile(ResolveDataFile(sc.road_label, base_dir));
  } else {
    sc.road_label = "inline";
    sc.profile = SlopeProfile::FromPercentGrades(r.Numbers(road, "breakpoints_m", {}),
                                                 r.Numbers(road, "percent_grades", {}));
  }

  // Platoon.
  const json platoon = doc.value("platoon", json::object());
  r.CheckKeys(platoon, "platoon",
              {"num_vehicles", "mass_kg", "a_min_mps2", "a_max_mps2", "vehicles", "headway_s",
               "target_speed", "speed_limit", "speed_floor_mps", "gravity_mps2", "rolling_coeff",
               "drag_coeff", "ds_m"});
  PlatoonConfig& pc = sc.platoon;
  const VehicleParams defaults{r.Number(platoon, "mass_kg", 1400.0),
                               r.Number(platoon, "a_min_mps2", -5.0),
                               r.Number(platoon, "a_max_mps2", 3.0)};
  if (platoon.contains("vehicles")) {
    const auto& list = platoon.at("vehicles");
    if (!list.is_array()) r.Fail("vehicles", "must be an array");
    for (const auto& v : list) {
      r.CheckKeys(v, "vehicles", {"mass_kg", "a_min_mps2", "a_max_mps2"});
      pc.vehicles.push_back({r.Number(v, "mass_kg", defaults.mass),
                             r.Number(v, "a_min_mps2", defaults.a_min),
                             r.Number(v, "a_max_mps2", defaults.a_max)});
    }
  } else {
    const int n = r.Integer(platoon, "num_vehicles", 3);
    if (n < 0) r.Fail("num_vehicles", "must be non-negative");
    pc.vehicles.assign(static_cast<std::size_t>(n), defaults);
  }
  pc.headway = r.Number(platoon, "headway_s", pc.headway);
  pc.target_speed = r.Speed(platoon, "target_speed", pc.target_speed);
  pc.speed_limit = r.Speed(platoon, "speed_limit", pc.speed_limit);
  pc.speed_floor = r.Number(platoon, "speed_floor_mps", pc.speed_floor);
  pc.gravity = r.Number(platoon, "gravity_mps2", pc.gravity);
  pc.rolling_coeff = r.Number(platoon, "rolling_coeff", pc.rolling_coeff);
  pc.drag_coeff = r.Number(platoon, "drag_coeff", pc.drag_coeff);
  pc.ds = r.Number(platoon, "ds_m", pc.ds);
  if (!(pc.ds > 0.0)) r.Fail("ds_m", "must be positive");
  pc.horizon_steps = static_cast<int>(std::lround(sc.profile.total_length() / pc.ds));

  // Initial state.
  const json initial = doc.value("initial", json::object());
  r.CheckKeys(initial, "initial", {"speed", "gap_errors_s"});
  if (initial.contains("speed")) sc.initial_speed = r.Speed(initial, "speed", 0.0);
  sc.initial_gap_errors = r.Numbers(initial, "gap_errors_s", {});

  // Weights.
  const json weights = doc.value("weights", json::object());
  r.CheckKeys(weights, "weights", {"q1", "q2", "q3", "r1"});
  sc.weights.q1 = r.Number(weights, "q1", sc.weights.q1);
  sc.weights.q2 = r.Number(weights, "q2", sc.weights.q2);
  sc.weights.q3 = r.Number(weights, "q3", sc.weights.q3);
  sc.weights.r1 = r.Number(weights, "r1", sc.weights.r1);

  // Solver.
  const json solver = doc.value("solver", json::object());
  r.CheckKeys(solver, "solver",
              {"method", "cost_tolerance", "violation_tolerance", "max_inner_iterations",
               "max_outer_iterations", "regularization_init", "regularization_factor",
               "regularization_max", "backtrack_factor", "max_backtracks", "armijo_fraction",
               "penalty_init", "penalty_factor"});
  SolverOptions& so = sc.solver;
  const std::string method = r.String(solver, "method", "ddp");
  if (method != "ddp" && method != "ilqr") r.Fail("method", "must be \"ddp\" or \"ilqr\"");
  so.second_order_dynamics = method == "ddp";
  so.cost_tolerance = r.Number(solver, "cost_tolerance", so.cost_tolerance);
  so.violation_tolerance = r.Number(solver, "violation_tolerance", so.violation_tolerance);
  so.max_inner_iterations = r.Integer(solver, "max_inner_iterations", so.max_inner_iterations);
  so.max_outer_iterations = r.Integer(solver, "max_outer_iterations", so.max_outer_iterations);
  so.regularization_init = r.Number(solver, "regularization_init", so.regularization_init);
  so.regularization_factor = r.Number(solver, "regularization_factor", so.regularization_factor);
  so.regularization_max = r.Number(solver, "regularization_max", so.regularization_max);
  so.backtrack_factor = r.Number(solver, "backtrack_factor", so.backtrack_factor);
  so.max_backtracks = r.Integer(solver, "max_backtracks", so.max_backtracks);
  so.armijo_fraction = r.Number(solver, "armijo_fraction", so.armijo_fraction);
  so.penalty_init = r.Number(solver, "penalty_init", so.penalty_init);
  so.penalty_factor = r.Number(solver, "penalty_factor", so.penalty_factor);

  // Baseline.
  const json baseline = doc.value("baseline", json::object());
  r.CheckKeys(baseline, "baseline", {"kp_gap", "kd_gap", "kp_speed", "dt_s", "tire_radius_m"});
  BaselineOptions& bo = sc.baseline;
  bo.gains.kp_gap = r.Number(baseline, "kp_gap", bo.gains.kp_gap);
  bo.gains.kd_gap = r.Number(baseline, "kd_gap", bo.gains.kd_gap);
  bo.gains.kp_speed = r.Number(baseline, "kp_speed", bo.gains.kp_speed);
  bo.dt = r.Number(baseline, "dt_s", bo.dt);
  bo.tire_radius = r.Number(baseline, "tire_radius_m", bo.tire_radius);

  // Fuel model.
  if (doc.contains("fuel_model")) {
    const std::string file = r.String(doc, "fuel_model", "");
    const fs::path path = ResolveDataFile(file, base_dir);
    sc.fuel_model = LoadFuelModel(path);
    sc.fuel_model_source = file;
  }

  // Perturbation.
  if (doc.contains("perturbation")) {
    const json& p = doc.at("perturbation");
    r.CheckKeys(p, "perturbation", {"magnitude_mps", "shape", "onset_m", "duration_m"});
    PerturbationSpec spec;
    spec.magnitude = r.Number(p, "magnitude_mps", spec.magnitude);
    spec.shape = ParsePerturbationShape(r.String(p, "shape", "step"));
    spec.onset_position = r.Number(p, "onset_m", spec.onset_position);
    spec.duration = r.Number(p, "duration_m", spec.duration);
    sc.perturbation = spec;
  }

  // Horizon.
  const json horizon = doc.value("horizon", json::object());
  r.CheckKeys(horizon, "horizon", {"mode", "window_m", "replan_m"});
  const std::string mode = r.String(horizon, "mode", "one_shot");
  if (mode == "one_shot") {
    sc.horizon.mode = HorizonMode::kOneShot;
  } else if (mode == "receding") {
    sc.horizon.mode = HorizonMode::kReceding;
  } else {
    r.Fail("mode", "must be \"one_shot\" or \"receding\"");
  }
  sc.horizon.window_length = r.Number(horizon, "window_m", sc.horizon.window_length);
  sc.horizon.replan_interval = r.Number(horizon, "replan_m", sc.horizon.replan_interval);

  // Bench sweep.
  const json bench = doc.value("bench", json::object());
  r.CheckKeys(bench, "bench", {"ds_m", "windows_m", "replan_m"});
  sc.bench.step_sizes = r.Numbers(bench, "ds_m", sc.bench.step_sizes);
  sc.bench.windows = r.Numbers(bench, "windows_m", sc.bench.windows);
  sc.bench.replan_interval = r.Number(bench, "replan_m", sc.bench.replan_interval);

  // Stability sweep.
  const json sweep = doc.value("stability_sweep", json::object());
  r.CheckKeys(sweep, "stability_sweep", {"num_vehicles", "magnitudes_mps"});
  for (double n : r.Numbers(sweep, "num_vehicles", {})) {
    if (n < 2.0 || n != std::floor(n)) r.Fail("num_vehicles", "entries must be integers >= 2");
    sc.stability.vehicle_counts.push_back(static_cast<int>(n));
  }
  sc.stability.magnitudes = r.Numbers(sweep, "magnitudes_mps", {});

  sc.Validate();
  return sc;
}

Scenario LoadScenario(const fs::path& path) {
  const std::string text = detail::ReadTextFile(path.string());
  try {
    return ParseScenario(text, path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace ecoplatoon
