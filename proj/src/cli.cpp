#include "ecoplatoon/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ecoplatoon/experiments.hpp"

namespace ecoplatoon::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

// Fixed formatting so reruns are byte-identical.
std::string Num(double value) {
  if (std::isnan(value)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : columns_(header.size()) { AddRow(header); }

  void AddRow(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw std::logic_error("csv row width mismatch");
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) out_ << ',';
      out_ << cells[c];
    }
    out_ << '\n';
  }

  void Write(const fs::path& path) const { WriteFileAtomic(path, out_.str()); }

 private:
  std::size_t columns_;
  std::ostringstream out_;
};

// Time, speed and held acceleration of a trace where it passes position s.
struct TraceSample {
  double time = 0.0;
  double speed = 0.0;
  double accel = 0.0;
};

TraceSample SampleAtPosition(const TimeTrace& trace, double s) {
  const auto& pos = trace.position;
  auto it = std::upper_bound(pos.begin(), pos.end(), s);
  if (it == pos.begin()) return {trace.time.front(), trace.speed.front(), trace.accel.front()};
  if (it == pos.end()) return {trace.time.back(), trace.speed.back(), trace.accel.back()};
  const auto j = static_cast<std::size_t>(std::distance(pos.begin(), it)) - 1;
  const double span = pos[j + 1] - pos[j];
  const double w = span > 0.0 ? (s - pos[j]) / span : 0.0;
  return {trace.time[j] + w * (trace.time[j + 1] - trace.time[j]),
          trace.speed[j] + w * (trace.speed[j + 1] - trace.speed[j]), trace.accel[j]};
}

Json CostJson(const CostBreakdown& c) {
  return Json{{"cacc", c.cacc},     {"ecology", c.ecology}, {"effort", c.effort},
              {"terminal", c.terminal}, {"total", c.total}};
}

Json TimingJson(const std::vector<double>& times, double command_seconds) {
  Json j;
  j["solves"] = times.size();
  j["solve_total"] = std::accumulate(times.begin(), times.end(), 0.0);
  j["solve_mean"] = times.empty() ? 0.0 : j["solve_total"].get<double>() / times.size();
  j["solve_max"] = times.empty() ? 0.0 : *std::max_element(times.begin(), times.end());
  j["command"] = command_seconds;
  return j;
}

Json ScenarioJson(const Scenario& sc) {
  Json j;
  j["name"] = sc.name;
  j["road"] = sc.road_label;
  j["num_vehicles"] = sc.platoon.num_vehicles();
  j["ds_m"] = sc.platoon.ds;
  j["target_speed_mps"] = sc.platoon.target_speed;
  j["horizon"] = sc.horizon.mode == HorizonMode::kOneShot ? "one_shot" : "receding";
  if (sc.horizon.mode == HorizonMode::kReceding) {
    j["window_m"] = sc.horizon.window_length;
    j["replan_m"] = sc.horizon.replan_interval;
  }
  j["method"] = sc.solver.second_order_dynamics ? "ddp" : "ilqr";
  j["fuel_model"] = sc.fuel_model_source;
  return j;
}

void WriteJson(const fs::path& path, const Json& j) { WriteFileAtomic(path, j.dump(2) + "\n"); }

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

void WriteEcoTrajectory(const fs::path& path, const EcoRun& eco, const PlatoonConfig& config) {
  const int n = config.num_vehicles();
  const int steps = eco.controls.num_steps();
  const Matrix aeq = EquivalentTractionSeries(eco.states, eco.controls, eco.grades, config);
  const Matrix errors = FollowingErrors(eco.states, config);
  std::vector<std::string> header{"step", "position_m", "grade_rad"};
  for (int i = 1; i <= n; ++i) {
    const std::string v = std::to_string(i);
    header.insert(header.end(), {"time" + v + "_s", "speed" + v + "_mps", "accel" + v + "_mps2",
                                 "eq_accel" + v + "_mps2", "gap_error" + v + "_s"});
  }
  Csv csv(header);
  for (int k = 0; k <= steps; ++k) {
    const bool has_control = k < steps;
    std::vector<std::string> row{std::to_string(k), Num(k * config.ds),
                                 has_control ? Num(eco.grades[static_cast<std::size_t>(k)]) : ""};
    for (int i = 0; i < n; ++i) {
      row.push_back(Num(eco.states.arrival_times(i, k)));
      row.push_back(Num(1.0 / eco.states.slownesses(i, k)));
      row.push_back(has_control ? Num(eco.controls.accels(i, k)) : "");
      row.push_back(has_control ? Num(aeq(i, k)) : "");
      row.push_back(Num(errors(i, k)));
    }
    csv.AddRow(row);
  }
  csv.Write(path);
}

void WriteBaselineTrajectory(const fs::path& path, const std::vector<TimeTrace>& traces,
                             const PlatoonConfig& config) {
  const int n = config.num_vehicles();
  const int steps = config.horizon_steps;
  std::vector<std::string> header{"step", "position_m"};
  for (int i = 1; i <= n; ++i) {
    const std::string v = std::to_string(i);
    header.insert(header.end(),
                  {"time" + v + "_s", "speed" + v + "_mps", "accel" + v + "_mps2"});
  }
  Csv csv(header);
  for (int k = 0; k <= steps; ++k) {
    const double s = k * config.ds;
    std::vector<std::string> row{std::to_string(k), Num(s)};
    for (int i = 0; i < n; ++i) {
      const TraceSample p = SampleAtPosition(traces[static_cast<std::size_t>(i)], s);
      row.insert(row.end(), {Num(p.time), Num(p.speed), Num(p.accel)});
    }
    csv.AddRow(row);
  }
  csv.Write(path);
}

void WriteFuelSeries(const fs::path& path, const Comparison& cmp, const PlatoonConfig& config,
                     bool with_baseline) {
  const int n = config.num_vehicles();
  std::vector<std::string> header{"step", "position_m"};
  for (int i = 1; i <= n; ++i) header.push_back("eco_fuel" + std::to_string(i) + "_l");
  header.push_back("eco_total_l");
  if (with_baseline) {
    for (int i = 1; i <= n; ++i) header.push_back("baseline_fuel" + std::to_string(i) + "_l");
    header.push_back("baseline_total_l");
  }
  Csv csv(header);
  for (int k = 0; k <= config.horizon_steps; ++k) {
    const double s = k * config.ds;
    std::vector<std::string> row{std::to_string(k), Num(s)};
    auto add = [&](const std::vector<FuelSeries>& fuel) {
      double total = 0.0;
      for (const auto& f : fuel) {
        const double c = f.CumulativeAt(s);
        total += c;
        row.push_back(Num(c));
      }
      row.push_back(Num(total));
    };
    add(cmp.eco_fuel);
    if (with_baseline) add(cmp.baseline_fuel);
    csv.AddRow(row);
  }
  csv.Write(path);
}

void WriteSegments(const fs::path& path, const Comparison& cmp) {
  Csv csv({"segment", "start_m", "end_m", "grade_rad", "baseline_fuel_l", "eco_fuel_l",
           "delta_l"});
  for (std::size_t j = 0; j < cmp.segments.size(); ++j) {
    const auto& seg = cmp.segments[j];
    csv.AddRow({std::to_string(j), Num(seg.start), Num(seg.end), Num(seg.grade),
                Num(seg.baseline_fuel), Num(seg.eco_fuel), Num(seg.delta())});
  }
  csv.Write(path);
}

Json FuelJson(const Comparison& cmp) {
  Json per_eco = Json::array();
  Json per_base = Json::array();
  for (const auto& f : cmp.eco_fuel) per_eco.push_back(f.total);
  for (const auto& f : cmp.baseline_fuel) per_base.push_back(f.total);
  return Json{{"eco_cacc", cmp.eco_total},
              {"baseline_cacc", cmp.baseline_total},
              {"eco_cacc_per_vehicle", per_eco},
              {"baseline_cacc_per_vehicle", per_base}};
}

Json EcoJson(const EcoRun& eco) {
  return Json{{"converged", eco.converged},
              {"completed", eco.completed},
              {"message", eco.message},
              {"inner_iterations", eco.inner_iterations},
              {"cost", CostJson(eco.cost)}};
}

void WriteSolveReport(const fs::path& path, const EcoRun& eco) {
  Json j = EcoJson(eco);
  j["max_constraint_violation"] = eco.max_violation;
  Json iters = Json::array();
  for (const auto& it : eco.iterations) {
    iters.push_back(Json{{"outer", it.outer},
                         {"augmented_cost", it.augmented_cost},
                         {"cost", it.cost},
                         {"max_violation", it.max_violation},
                         {"step_length", it.step_length},
                         {"regularization", it.regularization},
                         {"expected_decrease", it.expected_decrease},
                         {"actual_decrease", it.actual_decrease}});
  }
  j["iterations"] = iters;
  WriteJson(path, j);
}

constexpr const char* kPlotScript = R"PY(#!/usr/bin/env python3
"""Renders the CSV files in this directory with matplotlib."""
import csv
import glob
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))


def load(name):
    path = os.path.join(here, name)
    if not os.path.exists(path):
        return None
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    cols = {}
    for row in rows:
        for key, value in row.items():
            cols.setdefault(key, []).append(float(value) if value not in ("", None) else float("nan"))
    return cols


def vehicles(cols, prefix, suffix):
    out = []
    i = 1
    while f"{prefix}{i}{suffix}" in cols:
        out.append(cols[f"{prefix}{i}{suffix}"])
        i += 1
    return out


def save(fig, name):
    fig.tight_layout()
    fig.savefig(os.path.join(here, name), dpi=120)
    plt.close(fig)


eco = load("trajectory.csv")
base = load("baseline_trajectory.csv")
if eco:
    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(8, 8))
    for i, v in enumerate(vehicles(eco, "speed", "_mps"), 1):
        axes[0].plot(eco["position_m"], v, label=f"eco {i}")
    if base:
        for i, v in enumerate(vehicles(base, "speed", "_mps"), 1):
            axes[0].plot(base["position_m"], v, "--", label=f"baseline {i}")
    axes[0].set_ylabel("speed (m/s)")
    axes[0].legend(fontsize="small")
    for i, a in enumerate(vehicles(eco, "eq_accel", "_mps2"), 1):
        axes[1].plot(eco["position_m"], a, label=f"vehicle {i}")
    axes[1].set_ylabel("equivalent accel (m/s^2)")
    for i, e in enumerate(vehicles(eco, "gap_error", "_s"), 1):
        if i > 1:
            axes[2].plot(eco["position_m"], e, label=f"vehicle {i}")
    axes[2].set_ylabel("gap error (s)")
    axes[2].set_xlabel("position (m)")
    save(fig, "trajectory.png")

fuel = load("fuel.csv")
if fuel:
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(fuel["position_m"], fuel["eco_total_l"], label="Eco-CACC")
    if "baseline_total_l" in fuel:
        ax.plot(fuel["position_m"], fuel["baseline_total_l"], label="baseline CACC")
    ax.set_xlabel("position (m)")
    ax.set_ylabel("cumulative fuel (L)")
    ax.legend()
    save(fig, "fuel.png")

errors = load("following_errors.csv")
if errors:
    fig, ax = plt.subplots(figsize=(8, 4))
    for key, series in errors.items():
        if key.startswith("gap_error"):
            ax.plot(errors["position_m"], series, label=key)
    ax.set_xlabel("position (m)")
    ax.set_ylabel("gap error (s)")
    ax.legend()
    save(fig, "following_errors.png")

for path in sorted(glob.glob(os.path.join(here, "deviations_*.csv"))):
    dev = load(os.path.basename(path))
    fig, ax = plt.subplots(figsize=(8, 4))
    for i, d in enumerate(vehicles(dev, "deviation", "_mps2"), 1):
        ax.plot(dev["position_m"], d, label=f"vehicle {i}")
    ax.set_xlabel("position (m)")
    ax.set_ylabel("equivalent accel deviation (m/s^2)")
    ax.legend()
    save(fig, os.path.basename(path).replace(".csv", ".png"))

bench = load("bench.csv")
if bench:
    fig, ax = plt.subplots(figsize=(8, 4))
    for ds in sorted(set(bench["ds_m"])):
        idx = [j for j, d in enumerate(bench["ds_m"]) if d == ds]
        ax.plot([bench["window_m"][j] for j in idx], [bench["mean_time_s"][j] for j in idx],
                "o-", label=f"ds = {ds:g} m (mean)")
        ax.plot([bench["window_m"][j] for j in idx], [bench["max_time_s"][j] for j in idx],
                "x--", label=f"ds = {ds:g} m (max)")
    ax.set_yscale("log")
    ax.set_xlabel("window (m)")
    ax.set_ylabel("execution time (s)")
    ax.legend(fontsize="small")
    save(fig, "bench.png")

sys.exit(0)
)PY";

void WritePlotScript(const fs::path& dir) {
  WriteFileAtomic(dir / "plot_results.py", kPlotScript);
}

int ExitFor(bool converged) { return converged ? kSuccess : kNotConverged; }

// Shared by simulate and compare.
int RunPlan(const Scenario& sc, const CommandOptions& options, std::ostream& log,
            bool full_comparison) {
  const auto start = std::chrono::steady_clock::now();
  const fs::path& out = options.out_dir;
  fs::create_directories(out);

  log << "solving " << sc.name << " (" << sc.platoon.horizon_steps << " steps, "
      << (sc.horizon.mode == HorizonMode::kOneShot ? "one-shot" : "receding") << ")\n";
  EcoRun eco = RunEco(sc);
  const std::string command = full_comparison ? "compare" : "simulate";
  if (!eco.completed) {
    Json summary;
    summary["command"] = command;
    summary["scenario"] = ScenarioJson(sc);
    summary["converged"] = false;
    summary["message"] = eco.message;
    summary["fuel_l"] = nullptr;
    summary["savings_percent"] = nullptr;
    summary["max_constraint_violation"] = nullptr;
    summary["wall_time_s"] = TimingJson(eco.execution_times, Seconds(start));
    WriteJson(out / "summary.json", summary);
    log << "error: " << eco.message << "\n";
    return kNotConverged;
  }
  log << "solver: " << eco.message << "\n";

  WriteEcoTrajectory(out / "trajectory.csv", eco, sc.platoon);
  WriteSolveReport(out / "solve_report.json", eco);
  const Comparison cmp = CompleteComparison(sc, std::move(eco));
  WriteFuelSeries(out / "fuel.csv", cmp, sc.platoon, full_comparison);
  if (full_comparison) {
    WriteBaselineTrajectory(out / "baseline_trajectory.csv", cmp.baseline_traces, sc.platoon);
    WriteSegments(out / "segments.csv", cmp);
  }
  WritePlotScript(out);

  Json summary;
  summary["command"] = command;
  summary["scenario"] = ScenarioJson(sc);
  summary["converged"] = cmp.eco.converged;
  summary["message"] = cmp.eco.message;
  summary["fuel_l"] = FuelJson(cmp);
  summary["savings_percent"] = cmp.savings_percent();
  summary["max_constraint_violation"] = cmp.eco.max_violation;
  summary["wall_time_s"] = TimingJson(cmp.eco.execution_times, Seconds(start));
  summary["cost"] = CostJson(cmp.eco.cost);
  if (full_comparison) {
    summary["uphill_delta_l"] = cmp.uphill_delta();
    summary["downhill_delta_l"] = cmp.downhill_delta();
  }
  WriteJson(out / "summary.json", summary);

  log << "fuel: eco " << Num(cmp.eco_total) << " L, baseline " << Num(cmp.baseline_total)
      << " L, savings " << Num(cmp.savings_percent()) << " %\n";
  return ExitFor(cmp.eco.converged);
}

}  // namespace

void WriteFileAtomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot write " + tmp.string());
    file << content;
    file.flush();
    if (!file) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void ApplyOverrides(Scenario& scenario, const CommandOptions& options, bool bench) {
  if (options.ilqr) scenario.solver.second_order_dynamics = false;
  if (options.ds) {
    if (!(*options.ds > 0.0)) throw ConfigError("--ds must be positive");
    if (bench) {
      scenario.bench.step_sizes = {*options.ds};
    } else {
      scenario.platoon.ds = *options.ds;
      scenario.platoon.horizon_steps =
          static_cast<int>(std::lround(scenario.profile.total_length() / *options.ds));
    }
  }
  if (options.window) {
    if (!(*options.window > 0.0)) throw ConfigError("--window must be positive");
    if (bench) {
      scenario.bench.windows = {*options.window};
    } else {
      scenario.horizon.mode = HorizonMode::kReceding;
      scenario.horizon.window_length = *options.window;
      scenario.horizon.replan_interval =
          std::min(*options.window, std::max(scenario.horizon.replan_interval, scenario.platoon.ds));
    }
  }
  scenario.Validate();
}

std::string StepSizeWarning(const Scenario& scenario) {
  const CostWeights defaults;
  const bool default_weights = scenario.weights.q1 == defaults.q1 &&
                               scenario.weights.q2 == defaults.q2 &&
                               scenario.weights.q3 == defaults.q3 &&
                               scenario.weights.r1 == defaults.r1;
  if (!default_weights || std::abs(scenario.platoon.ds - 0.1) < 1e-12) return {};
  return "warning: ds = " + Num(scenario.platoon.ds) +
         " m with the default weights; the running cost is summed without a ds factor, so the "
         "effective weights differ from the ds = 0.1 m tuning";
}

int Simulate(const Scenario& scenario, const CommandOptions& options, std::ostream& log) {
  return RunPlan(scenario, options, log, false);
}

int Compare(const Scenario& scenario, const CommandOptions& options, std::ostream& log) {
  return RunPlan(scenario, options, log, true);
}

int Stability(const Scenario& scenario, const CommandOptions& options, std::ostream& log) {
  if (!scenario.perturbation) {
    throw ConfigError("stability needs a \"perturbation\" section in the scenario");
  }
  const auto start = std::chrono::steady_clock::now();
  const fs::path& out = options.out_dir;
  fs::create_directories(out);

  // Nominal run for the following-error traces and the fuel summary.
  log << "solving nominal " << scenario.name << "\n";
  EcoRun eco = RunEco(scenario);
  if (!eco.completed) throw std::runtime_error("nominal run failed: " + eco.message);
  const Comparison cmp = CompleteComparison(scenario, std::move(eco));
  const PlatoonConfig& config = scenario.platoon;
  {
    const Matrix errors = FollowingErrors(cmp.eco.states, config);
    std::vector<std::string> header{"step", "position_m"};
    for (int i = 2; i <= config.num_vehicles(); ++i) {
      header.push_back("gap_error" + std::to_string(i) + "_s");
    }
    Csv csv(header);
    for (int k = 0; k < errors.cols(); ++k) {
      std::vector<std::string> row{std::to_string(k), Num(k * config.ds)};
      for (int i = 1; i < config.num_vehicles(); ++i) row.push_back(Num(errors(i, k)));
      csv.AddRow(row);
    }
    csv.Write(out / "following_errors.csv");
  }

  const auto cases = RunStabilitySweep(scenario);
  Csv table({"num_vehicles", "magnitude_mps", "vehicle", "deviation_norm", "gamma_previous",
             "gamma_leader"});
  Json case_json = Json::array();
  bool all_converged = cmp.eco.converged;
  bool all_stable = true;
  double worst = 0.0;
  for (const auto& c : cases) {
    const auto& r = c.report;
    for (int j = 0; j < c.num_vehicles; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      table.AddRow({std::to_string(c.num_vehicles), Num(c.magnitude), std::to_string(j + 1),
                    Num(r.deviation_norms[ju]), j == 0 ? "" : Num(r.gamma[ju - 1]),
                    j == 0 ? "" : Num(r.gamma_vs_leader[ju - 1])});
    }
    const std::string tag = "n" + std::to_string(c.num_vehicles) + "_d" + Num(c.magnitude);
    std::vector<std::string> header{"step", "position_m"};
    for (int i = 1; i <= c.num_vehicles; ++i) {
      header.push_back("deviation" + std::to_string(i) + "_mps2");
    }
    Csv dev(header);
    for (int k = 0; k < r.deviations.cols(); ++k) {
      std::vector<std::string> row{std::to_string(k), Num(k * config.ds)};
      for (int i = 0; i < c.num_vehicles; ++i) row.push_back(Num(r.deviations(i, k)));
      dev.AddRow(row);
    }
    dev.Write(out / ("deviations_" + tag + ".csv"));

    all_converged = all_converged && r.nominal_converged && r.perturbed_converged;
    all_stable = all_stable && r.stable;
    worst = std::max(worst, r.max_gamma());
    Json g = Json::array();
    Json gl = Json::array();
    for (double x : r.gamma) g.push_back(std::isnan(x) ? Json(nullptr) : Json(x));
    for (double x : r.gamma_vs_leader) gl.push_back(std::isnan(x) ? Json(nullptr) : Json(x));
    case_json.push_back(Json{{"num_vehicles", c.num_vehicles},
                             {"magnitude_mps", c.magnitude},
                             {"gamma", g},
                             {"gamma_vs_leader", gl},
                             {"stable", r.stable},
                             {"converged", r.nominal_converged && r.perturbed_converged}});
    log << "N = " << c.num_vehicles << ", delta = " << Num(c.magnitude)
        << " m/s: max gamma " << Num(r.max_gamma()) << (r.stable ? " (stable)\n" : " (UNSTABLE)\n");
  }
  table.Write(out / "stability.csv");
  WritePlotScript(out);

  Json summary;
  summary["command"] = "stability";
  summary["scenario"] = ScenarioJson(scenario);
  summary["converged"] = all_converged;
  summary["stable"] = all_stable;
  summary["max_gamma"] = worst;
  summary["perturbation"] = Json{
      {"shape", std::string(PerturbationShapeName(scenario.perturbation->shape))},
      {"onset_m", scenario.perturbation->onset_position},
      {"duration_m", scenario.perturbation->duration}};
  summary["cases"] = case_json;
  summary["fuel_l"] = FuelJson(cmp);
  summary["savings_percent"] = cmp.savings_percent();
  summary["max_constraint_violation"] = cmp.eco.max_violation;
  summary["wall_time_s"] = TimingJson(cmp.eco.execution_times, Seconds(start));
  WriteJson(out / "summary.json", summary);
  return ExitFor(all_converged);
}

int Bench(const Scenario& scenario, const CommandOptions& options, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const fs::path& out = options.out_dir;
  fs::create_directories(out);

  double baseline_total = 0.0;
  {
    const auto traces = RunScenarioBaseline(scenario);
    for (std::size_t i = 0; i < traces.size(); ++i) {
      baseline_total += TrajectoryFuel(scenario.fuel_model, traces[i], scenario.profile,
                                       scenario.platoon.vehicles[i], scenario.platoon)
                            .total;
    }
  }

  const auto rows = RunBench(scenario);
  Csv csv({"ds_m", "window_m", "executions", "mean_time_s", "max_time_s", "eco_fuel_l",
           "max_violation", "completed", "converged"});
  Json runs = Json::array();
  Json eco_fuel = Json::object();
  Json savings = Json::object();
  bool all_converged = true;
  double worst_violation = 0.0;
  std::vector<double> means;
  for (const auto& r : rows) {
    csv.AddRow({Num(r.ds), Num(r.window), std::to_string(r.executions), Num(r.mean_time),
                Num(r.max_time), Num(r.eco_fuel), Num(r.max_violation), r.completed ? "1" : "0",
                r.converged ? "1" : "0"});
    const std::string key = "ds=" + Num(r.ds) + ",window=" + Num(r.window);
    eco_fuel[key] = r.eco_fuel;
    savings[key] = 100.0 * (baseline_total - r.eco_fuel) / baseline_total;
    runs.push_back(Json{{"ds_m", r.ds},
                        {"window_m", r.window},
                        {"executions", r.executions},
                        {"mean_s", r.mean_time},
                        {"max_s", r.max_time},
                        {"converged", r.converged}});
    all_converged = all_converged && r.converged;
    worst_violation = std::max(worst_violation, r.max_violation);
    log << "ds = " << Num(r.ds) << " m, window = " << Num(r.window) << " m: mean "
        << Num(r.mean_time) << " s, max " << Num(r.max_time) << " s over " << r.executions
        << " executions\n";
  }
  csv.Write(out / "bench.csv");
  WritePlotScript(out);

  Json summary;
  summary["command"] = "bench";
  summary["scenario"] = ScenarioJson(scenario);
  summary["converged"] = all_converged;
  summary["fuel_l"] = Json{{"baseline_cacc", baseline_total}, {"eco_cacc", eco_fuel}};
  summary["savings_percent"] = savings;
  summary["max_constraint_violation"] = worst_violation;
  Json timing = Json::object();
  timing["runs"] = runs;
  timing["command"] = Seconds(start);
  summary["wall_time_s"] = timing;
  WriteJson(out / "summary.json", summary);
  return ExitFor(all_converged);
}

int RunCommand(const std::string& command, const CommandOptions& options, std::ostream& log) {
  try {
    const bool bench = command == "bench";
    if (!bench && command != "simulate" && command != "compare" && command != "stability") {
      throw ConfigError("unknown command '" + command + "'");
    }
    const fs::path path = ResolveScenarioPath(options.scenario);
    Scenario scenario = LoadScenario(path);
    ApplyOverrides(scenario, options, bench);
    if (const std::string w = StepSizeWarning(scenario); !w.empty() && !bench) log << w << "\n";
    if (command == "simulate") return Simulate(scenario, options, log);
    if (command == "compare") return Compare(scenario, options, log);
    if (command == "stability") return Stability(scenario, options, log);
    return Bench(scenario, options, log);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    log << "runtime failure: " << e.what() << "\n";
    return kRuntimeFailure;
  }
}

}  // namespace ecoplatoon::cli
