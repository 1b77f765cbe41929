#pragma once

#include "emscat/fields.hpp"
#include "emscat/xray.hpp"

#include <optional>

namespace emscat {

// Field given by Catmull-Rom (C^1 piecewise cubic) interpolation of grid values,
// zero outside the grid. Used to push reconstructed B through the asymptotic
// formulas. The magnetic grid has arity 1 (B_12) for n = 2 and arity 3
// (B_12, B_13, B_23) for n = 3.
class GridField final : public Field {
 public:
  GridField(std::optional<GridFunction> potential, std::optional<GridFunction> magnetic);

  double potential(const Vec& x) const override;
  Vec potential_gradient(const Vec& x) const override;
  Mat potential_hessian(const Vec& x) const override;
  Mat magnetic(const Vec& x) const override;
  MagneticGradient magnetic_gradient(const Vec& x) const override;

  double negligible_radius(double eps) const override;
  std::optional<double> support_radius() const override { return radius_; }

 private:
  std::optional<GridFunction> V_;
  std::optional<GridFunction> B_;
  double radius_ = 0;
};

}  // namespace emscat
