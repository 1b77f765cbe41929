#pragma once

#include "emscat/fields.hpp"
#include "emscat/line.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace emscat {

// Inputs of the closed-form bound constants.
struct BoundInputs {
  int n = 2;
  double alpha = 2;
  double beta1 = 0;
  double beta2 = 0;
  double speed = 0;   // |v|
  double offset = 0;  // |x|
  double R = 0;
  double r = 1;
  double T = 0;
};

struct BoundSet {
  BoundInputs in;
  double rho_T1 = 0, rho_T2 = 0;
  double rho1 = 0, rho2 = 0;
  double lambda_T1 = 0, lambda_T2 = 0, lambda_T3 = 0, lambda_T4 = 0;
  double lambda1 = 0, lambda2 = 0, lambda3 = 0, lambda4 = 0;
  double lambda_T = 0, lambda = 0;
  double delta11 = 0, delta21 = 0, delta12 = 0, delta22 = 0;

  // Bound on |dH/dt| for t >= 0 (also the bound on |dy/dt| at |t| for t <= 0).
  double zeta(double t) const;
  // Bound on |H(t)| for t >= 0.
  double xi(double t) const;
};

// Requires |v| > sqrt(2) R, 0 < r <= 1, alpha > 1.
BoundSet bounds(const BoundInputs& in);

// Limit of rho_2 as |v| -> infinity.
double rho2_limit(int n, double alpha, double beta1, double offset);

struct Thresholds {
  double z1 = 0, z2 = 0, z3 = 0;
  double R = 0, r = 1;
  double max() const { return std::max({z1, z2, z3}); }
};

// Roots of rho_1/r = 1, rho_2/R = 1 and lambda = 1 above sqrt(2) R, by bisection.
Thresholds thresholds(int n, double alpha, double beta1, double beta2, double R, double r, double offset);
// Default (R, r) = (2 rho2_limit, 1).
Thresholds default_thresholds(const Field& field, double offset);

// Discretized pair (f, h) ~ (y_-, dy_-/dt) on a panel time grid.
struct DeflectionPath {
  PanelGrid grid;
  std::vector<Vec> f;
  std::vector<Vec> h;

  // max(sup |f - t h|, sup |h|)
  double norm() const;
  DeflectionPath operator-(const DeflectionPath& o) const;
  bool in_ball(double R, double r) const;
};

struct PicardControls {
  QuadratureControls quadrature;
  double span_factor = 1.5;  // grid reaches this multiple of the field crossing time
  double tolerance = 1e-13;
  int max_iterations = 200;
  std::optional<double> R;  // default 2 rho2_limit
  double r = 1.0;
};

// Zero path on the time grid associated with (v, x).
DeflectionPath zero_path(const Field& field, const Vec& v_minus, const Vec& x_minus,
                         const PicardControls& controls = {});

// (A^1(f,h), A^2(f,h)) by cumulative panel quadrature from the lower grid end.
DeflectionPath apply_A(const Field& field, const Vec& v_minus, const Vec& x_minus, const DeflectionPath& path);

struct ContractionCertificate {
  double lambda = 0;
  long a_priori_iterations = 0;
  Thresholds thresholds;
};

struct FixedPointResult {
  DeflectionPath path;
  int iterations = 0;
  double residual = 0;
  std::vector<double> residual_history;
  double initial_step = 0;  // ||A^2(0,0)||
  std::optional<ContractionCertificate> certificate;
  bool below_threshold = false;  // ran without a contraction certificate
  std::string warning;
};

// Iterates (f,h) <- A^2(f,h) from (0,0).
FixedPointResult solve_fixed_point(const Field& field, const Vec& v_minus, const Vec& x_minus,
                                   const PicardControls& controls = {});

struct PicardDecomposition {
  Vec k = Vec::Zero();
  Vec l = Vec::Zero();
  PanelGrid grid;
  std::vector<Vec> H;     // H(t) at grid nodes (meaningful for t >= 0)
  std::vector<Vec> Hdot;  // dH/dt = -int_t^inf F
  double tail_estimate = 0;
  Vec H_at(double t) const;
  Vec Hdot_at(double t) const;
};

PicardDecomposition decompose_klh(const Field& field, const Vec& v_minus, const Vec& x_minus,
                                  const DeflectionPath& path);

// One named inequality lhs < rhs.
struct InequalityCheck {
  std::string name;
  double lhs = 0;
  double rhs = 0;
  bool holds = false;
};

struct SmallAngleReport {
  Vec v_minus, x_minus;
  bool admissible = false;  // |v| >= max(z1, z2), |v| > z3
  Thresholds thresholds;
  std::vector<InequalityCheck> checks;
  bool all_hold() const;
};

// Evaluates the small-angle estimates on an integrated trajectory with the
// field's declared envelope and the default (R, r).
SmallAngleReport verify_small_angle_estimates(const Field& field, const Vec& v_minus, const Vec& x_minus,
                                              std::optional<double> R = std::nullopt, double r = 1.0);

}  // namespace emscat
