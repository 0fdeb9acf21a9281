#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ecoplatoon {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Input outside the domain of an operation (negative speed, position off the
// route, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A space-domain step produced a non-positive slowness.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A time-domain vehicle came to rest before reaching the end of the route.
class StallError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration or data file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kMphToMps = 0.44704;

}  // namespace ecoplatoon
