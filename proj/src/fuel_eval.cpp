#include "ecoplatoon/fuel_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json_util.hpp"

namespace ecoplatoon {

namespace {

constexpr double kMpsToKmh = 3.6;

Eigen::Matrix4d MatrixFromRows(const double (&rows)[4][4]) {
  Eigen::Matrix4d m;
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < 4; ++i) m(j, i) = rows[j][i];
  }
  return m;
}

double LogRate(const Eigen::Matrix4d& c, double speed_kmh, double accel_kmhs) {
  double sum = 0.0;
  double ap = 1.0;
  for (int j = 0; j < 4; ++j) {
    double vp = 1.0;
    for (int i = 0; i < 4; ++i) {
      sum += c(j, i) * vp * ap;
      vp *= speed_kmh;
    }
    ap *= accel_kmhs;
  }
  return sum;
}

// Time for a body at speed v with constant acceleration a to cover d >= 0.
double TimeToCover(double v, double a, double d) {
  if (d <= 0.0) return 0.0;
  const double disc = v * v + 2.0 * a * d;
  if (disc <= 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 * d / (v + std::sqrt(disc));
}

}  // namespace

FuelModel FuelModel::LightDutyDefault() {
  static const double kPositive[4][4] = {{-7.73452, 0.02799, -0.0002228, 1.09e-06},
                                         {0.22946, 0.0068, -4.402e-05, 4.80e-08},
                                         {-0.00561, -0.00077221, 7.90e-07, 3.27e-08},
                                         {9.77e-05, 8.38e-06, 8.17e-07, -7.79e-09}};
  static const double kNegative[4][4] = {{-7.73452, 0.02804, -0.00021988, 1.08e-06},
                                         {-0.01799, 0.00772, -5.219e-05, 2.47e-07},
                                         {-0.00427, 0.00083744, -7.44e-06, 4.87e-08},
                                         {0.00018829, -3.387e-05, 2.77e-07, 3.79e-10}};
  FuelModel model;
  model.positive_accel = MatrixFromRows(kPositive);
  model.negative_accel = MatrixFromRows(kNegative);
  return model;
}

double FuelModel::idle_rate() const { return std::exp(positive_accel(0, 0)); }

void FuelModel::Validate() const {
  if (!positive_accel.allFinite() || !negative_accel.allFinite()) {
    throw ConfigError("fuel model: coefficients must be finite");
  }
}

FuelModel ParseFuelModel(std::string_view json_text) {
  const auto doc = detail::ParseJson(json_text, "fuel model");
  FuelModel model;
  auto read = [&](const char* key, Eigen::Matrix4d& out) {
    const int line = detail::LineOfKey(json_text, key);
    auto where = [&] {
      std::ostringstream s;
      s << "fuel model: line " << line << ": ";
      return s.str();
    };
    if (!doc.contains(key)) throw ConfigError("fuel model: missing key \"" + std::string(key) + "\"");
    const auto& rows = doc.at(key);
    if (!rows.is_array() || rows.size() != 4) {
      throw ConfigError(where() + "\"" + key + "\" must be a 4x4 array");
    }
    for (int j = 0; j < 4; ++j) {
      const auto& row = rows[static_cast<std::size_t>(j)];
      if (!row.is_array() || row.size() != 4) {
        throw ConfigError(where() + "\"" + key + "\" must be a 4x4 array");
      }
      for (int i = 0; i < 4; ++i) {
        const auto& v = row[static_cast<std::size_t>(i)];
        if (!v.is_number()) throw ConfigError(where() + "non-numeric coefficient");
        out(j, i) = v.get<double>();
      }
    }
  };
  read("positive_accel", model.positive_accel);
  read("negative_accel", model.negative_accel);
  model.Validate();
  return model;
}

FuelModel LoadFuelModel(const std::filesystem::path& path) {
  try {
    return ParseFuelModel(detail::ReadTextFile(path.string()));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

double EquivalentTractionAccel(double accel, double speed, double theta,
                               const VehicleParams& params, const PlatoonConfig& config) {
  return accel + config.gravity * std::sin(theta) +
         config.rolling_coeff * config.gravity * std::cos(theta) +
         config.drag_coeff * speed * speed / params.mass;
}

double FuelRate(const FuelModel& model, double speed, double accel_eq) {
  if (speed < 0.0) throw DomainError("fuel rate needs a non-negative speed");
  const double v = speed * kMpsToKmh;
  const double a = accel_eq * kMpsToKmh;
  const auto& c = accel_eq >= 0.0 ? model.positive_accel : model.negative_accel;
  return std::max(model.idle_rate(), std::exp(LogRate(c, v, a)));
}

double FuelSeries::CumulativeAt(double s) const {
  if (position.empty()) return 0.0;
  if (s <= position.front()) return cumulative.front();
  if (s >= position.back()) return cumulative.back();
  const auto it = std::upper_bound(position.begin(), position.end(), s);
  const auto j = static_cast<std::size_t>(it - position.begin());
  const double s0 = position[j - 1];
  const double s1 = position[j];
  if (s1 <= s0) return cumulative[j];
  const double w = (s - s0) / (s1 - s0);
  return cumulative[j - 1] + w * (cumulative[j] - cumulative[j - 1]);
}

FuelSeries TrajectoryFuel(const FuelModel& model, const TimeTrace& trace,
                          const SlopeProfile& profile, const VehicleParams& params,
                          const PlatoonConfig& config) {
  FuelSeries out;
  const double length = profile.total_length();
  out.position.push_back(0.0);
  out.cumulative.push_back(0.0);
  if (trace.size() < 2) return out;

  for (std::size_t j = 0; j + 1 < trace.size(); ++j) {
    const double s0 = trace.position[j];
    const double s1 = trace.position[j + 1];
    if (s1 <= 0.0 || s0 >= length || s1 <= s0) continue;
    const double v0 = trace.speed[j];
    const double a = trace.accel[j];
    // Clip the interval to the route.
    const double tau_in = TimeToCover(v0, a, std::max(0.0, -s0));
    const double tau_out = std::min(trace.time[j + 1] - trace.time[j],
                                    TimeToCover(v0, a, std::min(s1, length) - s0));
    if (!(tau_out > tau_in)) continue;
    const double tau_mid = 0.5 * (tau_in + tau_out);
    const double v_mid = std::max(0.0, v0 + a * tau_mid);
    const double s_mid = s0 + v0 * tau_mid + 0.5 * a * tau_mid * tau_mid;
    const double theta = (s_mid >= 0.0 && s_mid <= length) ? profile.GradeAt(s_mid) : 0.0;
    const double rate = FuelRate(model, v_mid, EquivalentTractionAccel(a, v_mid, theta, params, config));
    out.total += rate * (tau_out - tau_in);
    out.position.push_back(std::min(s1, length));
    out.cumulative.push_back(out.total);
  }
  return out;
}

std::vector<FuelSeries> PlanFuel(const FuelModel& model, const PlatoonState& plan,
                                 const ControlTrajectory& controls, const SlopeProfile& profile,
                                 const PlatoonConfig& config, double dt) {
  const auto traces = ResimulateTimeDomain(plan, controls, config.ds, dt);
  std::vector<FuelSeries> out;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    out.push_back(TrajectoryFuel(model, traces[i], profile, config.vehicles[i], config));
  }
  return out;
}

double TotalFuel(const std::vector<FuelSeries>& per_vehicle) {
  double total = 0.0;
  for (const auto& f : per_vehicle) total += f.total;
  return total;
}

double FuelBetween(const std::vector<FuelSeries>& per_vehicle, double from, double to) {
  double total = 0.0;
  for (const auto& f : per_vehicle) total += f.CumulativeAt(to) - f.CumulativeAt(from);
  return total;
}

}  // namespace ecoplatoon
