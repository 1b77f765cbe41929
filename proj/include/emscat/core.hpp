#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace emscat {

// Points and matrices live in R^3; planar problems keep the third slot at zero.
using Vec = Eigen::Vector3d;
using Mat = Eigen::Matrix3d;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const { return 3; }
};

// Malformed configuration or arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 2; }
};

// Numeric failure: step underflow, no convergence, failed self-checks.
class NumericError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 3; }
};

// Precondition or coverage failure (domain of a formula, flagged data quota).
class DomainError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 4; }
};

inline bool all_finite(const Vec& x) { return x.allFinite(); }

}  // namespace emscat
