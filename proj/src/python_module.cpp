#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "ecoplatoon/cli.hpp"
#include "ecoplatoon/experiments.hpp"

namespace py = pybind11;
using namespace ecoplatoon;

namespace {

py::dict RunToDict(const EcoRun& run) {
  py::dict d;
  d["converged"] = run.converged;
  d["completed"] = run.completed;
  d["message"] = run.message;
  d["cost"] = run.cost.total;
  d["max_violation"] = run.max_violation;
  d["inner_iterations"] = run.inner_iterations;
  d["arrival_times"] = run.states.arrival_times;  // N x (K+1)
  d["slownesses"] = run.states.slownesses;
  d["accels"] = run.controls.accels;  // N x K
  d["grades"] = run.grades;
  d["execution_times"] = run.execution_times;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Space-domain Eco-CACC platoon planner";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("name", &Scenario::name)
      .def_property_readonly("num_vehicles", [](const Scenario& s) { return s.platoon.num_vehicles(); })
      .def_property_readonly("ds", [](const Scenario& s) { return s.platoon.ds; })
      .def_property_readonly("horizon_steps", [](const Scenario& s) { return s.platoon.horizon_steps; })
      .def_property_readonly("target_speed", [](const Scenario& s) { return s.platoon.target_speed; })
      .def_property_readonly("route_length", [](const Scenario& s) { return s.profile.total_length(); })
      .def_property_readonly("breakpoints", [](const Scenario& s) { return s.profile.breakpoints(); })
      .def_property_readonly("grades", [](const Scenario& s) { return s.profile.grades(); })
      .def("initial_state", &Scenario::InitialState)
      .def("with_step_size", &WithStepSize, py::arg("ds"))
      .def("__repr__", [](const Scenario& s) {
        std::ostringstream out;
        out << "<Scenario " << s.name << ": " << s.platoon.num_vehicles() << " vehicles, "
            << s.profile.total_length() << " m, ds " << s.platoon.ds << ">";
        return out.str();
      });

  m.def("load_scenario", [](const std::string& arg) { return LoadScenario(ResolveScenarioPath(arg)); },
        py::arg("path_or_name"), "Load a scenario file or preset name.");
  m.def("parse_scenario", &ParseScenario, py::arg("json_text"), py::arg("base_dir") = ".");
  m.def("preset_search_path", &PresetSearchPath);

  m.def("run_eco", [](const Scenario& s) {
    py::gil_scoped_release release;
    EcoRun run = RunEco(s);
    py::gil_scoped_acquire acquire;
    return RunToDict(run);
  }, py::arg("scenario"));

  m.def("run_comparison", [](const Scenario& s) {
    Comparison c;
    {
      py::gil_scoped_release release;
      c = RunComparison(s);
    }
    py::dict d;
    d["eco"] = RunToDict(c.eco);
    d["eco_fuel_l"] = c.eco_total;
    d["baseline_fuel_l"] = c.baseline_total;
    d["savings_percent"] = c.savings_percent();
    d["uphill_delta_l"] = c.uphill_delta();
    d["downhill_delta_l"] = c.downhill_delta();
    py::list segments;
    for (const auto& seg : c.segments) {
      py::dict row;
      row["start_m"] = seg.start;
      row["end_m"] = seg.end;
      row["grade_rad"] = seg.grade;
      row["baseline_fuel_l"] = seg.baseline_fuel;
      row["eco_fuel_l"] = seg.eco_fuel;
      segments.append(row);
    }
    d["segments"] = segments;
    return d;
  }, py::arg("scenario"));

  m.def("fuel_rate", [](double speed, double accel_eq) {
    return FuelRate(FuelModel::LightDutyDefault(), speed, accel_eq);
  }, py::arg("speed"), py::arg("accel_eq"), "Built-in light-duty rate in L/s (SI inputs).");

  m.def("run_command", [](const std::string& command, const std::string& scenario,
                          const std::filesystem::path& out, std::optional<double> ds,
                          std::optional<double> window, bool ilqr) {
    cli::CommandOptions opt;
    opt.scenario = scenario;
    opt.out_dir = out;
    opt.ds = ds;
    opt.window = window;
    opt.ilqr = ilqr;
    std::ostringstream log;
    int code = 0;
    {
      py::gil_scoped_release release;
      code = cli::RunCommand(command, opt, log);
    }
    return py::make_tuple(code, log.str());
  }, py::arg("command"), py::arg("scenario"), py::arg("out"), py::arg("ds") = py::none(),
     py::arg("window") = py::none(), py::arg("ilqr") = false,
     "Same as the command-line tool; returns (exit_code, log_text).");
}
