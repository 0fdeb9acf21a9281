#include "ecoplatoon/constraints.hpp"

#include <cmath>

namespace ecoplatoon {

ConstraintSet::ConstraintSet(const PlatoonConfig& config)
    : num_vehicles_(config.num_vehicles()),
      speed_limit_(config.speed_limit),
      speed_floor_(config.speed_floor),
      a_min_(config.num_vehicles()),
      a_max_(config.num_vehicles()) {
  for (int i = 0; i < num_vehicles_; ++i) {
    a_min_[i] = config.vehicles[static_cast<std::size_t>(i)].a_min;
    a_max_[i] = config.vehicles[static_cast<std::size_t>(i)].a_max;
  }
}

Vector ConstraintSet::Evaluate(const Eigen::Ref<const Vector>& x,
                               const Eigen::Ref<const Vector>& u) const {
  Vector e(size());
  for (int i = 0; i < num_vehicles_; ++i) {
    const double v = 1.0 / x[SlownessIndex(i)];
    e[ConstraintIndex(i, ConstraintKind::kSpeedCap)] = v - speed_limit_;
    e[ConstraintIndex(i, ConstraintKind::kSpeedFloor)] = speed_floor_ - v;
    e[ConstraintIndex(i, ConstraintKind::kAccelCap)] = u[i] - a_max_[i];
    e[ConstraintIndex(i, ConstraintKind::kAccelFloor)] = a_min_[i] - u[i];
  }
  return e;
}

ConstraintDerivatives ConstraintSet::Derivatives(const Eigen::Ref<const Vector>& x,
                                                 const Eigen::Ref<const Vector>& u) const {
  (void)u;
  ConstraintDerivatives d;
  d.ex = Matrix::Zero(size(), 2 * num_vehicles_);
  d.eu = Matrix::Zero(size(), num_vehicles_);
  d.e_pipi = Vector::Zero(size());
  for (int i = 0; i < num_vehicles_; ++i) {
    const int p = SlownessIndex(i);
    const double pi = x[p];
    // v = 1/pi: dv/dpi = -1/pi^2, d2v/dpi2 = 2/pi^3.
    const double dv = -1.0 / (pi * pi);
    const double d2v = 2.0 / (pi * pi * pi);
    const int cap = ConstraintIndex(i, ConstraintKind::kSpeedCap);
    const int floor = ConstraintIndex(i, ConstraintKind::kSpeedFloor);
    d.ex(cap, p) = dv;
    d.e_pipi[cap] = d2v;
    d.ex(floor, p) = -dv;
    d.e_pipi[floor] = -d2v;
    d.eu(ConstraintIndex(i, ConstraintKind::kAccelCap), i) = 1.0;
    d.eu(ConstraintIndex(i, ConstraintKind::kAccelFloor), i) = -1.0;
  }
  return d;
}

ALState::ALState(int num_rows, int num_constraints, double rho_init)
    : rho(Matrix::Constant(num_rows, num_constraints, rho_init)),
      lambda(Matrix::Zero(num_rows, num_constraints)),
      slack(Matrix::Zero(num_rows, num_constraints)) {}

double AugmentedRunningCost(double base, const Eigen::Ref<const Vector>& e,
                            const Eigen::Ref<const Vector>& rho,
                            const Eigen::Ref<const Vector>& lambda,
                            const Eigen::Ref<const Vector>& slack) {
  double cost = base;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const double c = e[i] + slack[i];
    cost += lambda[i] * c + 0.5 * rho[i] * c * c;
  }
  return cost;
}

void AddAlDerivativeTerms(StageDerivatives& stage, const ConstraintDerivatives& de,
                          const Eigen::Ref<const Vector>& e, const Eigen::Ref<const Vector>& rho,
                          const Eigen::Ref<const Vector>& lambda,
                          const Eigen::Ref<const Vector>& slack, bool include_control) {
  const auto num = e.size();
  for (Eigen::Index i = 0; i < num; ++i) {
    const double w = lambda[i] + rho[i] * (e[i] + slack[i]);
    // Each row touches a single state or control entry.
    for (Eigen::Index p = 0; p < de.ex.cols(); ++p) {
      const double g = de.ex(i, p);
      if (g == 0.0) continue;
      stage.lx[p] += g * w;
      stage.lxx(p, p) += rho[i] * g * g + w * de.e_pipi[i];
    }
    if (!include_control) continue;
    for (Eigen::Index j = 0; j < de.eu.cols(); ++j) {
      const double g = de.eu(i, j);
      if (g == 0.0) continue;
      stage.lu[j] += g * w;
      stage.luu(j, j) += rho[i] * g * g;
    }
  }
  // lux gains eu^T diag(rho) ex, which vanishes here: no constraint depends on
  // both a state and a control entry.
}

ALState UpdateSlack(const ALState& al, const Eigen::Ref<const Matrix>& e_values) {
  ALState out = al;
  out.slack = (-al.lambda.cwiseQuotient(al.rho) - e_values).cwiseMax(0.0);
  return out;
}

ALState UpdateMultipliers(const ALState& al, const Eigen::Ref<const Matrix>& e_values) {
  ALState out = al;
  out.lambda = (al.lambda + al.rho.cwiseProduct(e_values + al.slack)).cwiseMax(0.0);
  return out;
}

ALState EscalatePenalty(const ALState& al, const Eigen::Ref<const Matrix>& e_values,
                        double factor, double tolerance) {
  ALState out = al;
  out.rho = (e_values.array() > tolerance).select(al.rho * factor, al.rho);
  return out;
}

}  // namespace ecoplatoon
