#pragma once

#include "ecoplatoon/common.hpp"
#include "ecoplatoon/cost_model.hpp"
#include "ecoplatoon/platoon_model.hpp"

namespace ecoplatoon {

// Four inequalities e <= 0 per vehicle, in this order.
enum class ConstraintKind { kSpeedCap = 0, kSpeedFloor = 1, kAccelCap = 2, kAccelFloor = 3 };

inline constexpr int kConstraintsPerVehicle = 4;
inline constexpr int ConstraintIndex(int vehicle, ConstraintKind kind) {
  return kConstraintsPerVehicle * vehicle + static_cast<int>(kind);
}

struct ConstraintDerivatives {
  Matrix ex;        // eps x 2N
  Matrix eu;        // eps x N
  Vector e_pipi;    // eps, d^2 e / d pi^2 of the vehicle's own slowness (speed rows only)
};

// Speed cap / floor and acceleration cap / floor for every vehicle.
class ConstraintSet {
 public:
  explicit ConstraintSet(const PlatoonConfig& config);

  int size() const { return kConstraintsPerVehicle * num_vehicles_; }
  int num_vehicles() const { return num_vehicles_; }

  Vector Evaluate(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& u) const;
  ConstraintDerivatives Derivatives(const Eigen::Ref<const Vector>& x,
                                    const Eigen::Ref<const Vector>& u) const;

 private:
  int num_vehicles_;
  double speed_limit_;
  double speed_floor_;
  Vector a_min_;
  Vector a_max_;
};

// Penalty, multiplier and slack for every (step, constraint) pair. Row k
// holds step k; the last row is the terminal step, where only the speed rows
// carry information (acceleration rows are evaluated at zero control).
struct ALState {
  Matrix rho;
  Matrix lambda;
  Matrix slack;

  ALState() = default;
  ALState(int num_rows, int num_constraints, double rho_init);

  int rows() const { return static_cast<int>(rho.rows()); }
};

// L + sum_i [lambda_i C_i + rho_i C_i^2 / 2], C_i = e_i + s_i.
double AugmentedRunningCost(double base, const Eigen::Ref<const Vector>& e,
                            const Eigen::Ref<const Vector>& rho,
                            const Eigen::Ref<const Vector>& lambda,
                            const Eigen::Ref<const Vector>& slack);

// Adds the augmented-Lagrangian corrections to stage derivatives in place.
// With w_i = lambda_i + rho_i C_i:
//   lx += ex^T w, lu += eu^T w, lxx += ex^T diag(rho) ex + sum w_i e_i,xx,
//   luu += eu^T diag(rho) eu, lux += eu^T diag(rho) ex.
void AddAlDerivativeTerms(StageDerivatives& stage, const ConstraintDerivatives& de,
                          const Eigen::Ref<const Vector>& e, const Eigen::Ref<const Vector>& rho,
                          const Eigen::Ref<const Vector>& lambda,
                          const Eigen::Ref<const Vector>& slack, bool include_control = true);

// s = max(0, -lambda / rho - e)
ALState UpdateSlack(const ALState& al, const Eigen::Ref<const Matrix>& e_values);
// lambda = max(0, lambda + rho (e + s))
ALState UpdateMultipliers(const ALState& al, const Eigen::Ref<const Matrix>& e_values);
// rho *= factor where e > tolerance
ALState EscalatePenalty(const ALState& al, const Eigen::Ref<const Matrix>& e_values,
                        double factor, double tolerance);

}  // namespace ecoplatoon
