#pragma once

#include <memory>
#include <vector>

namespace emscat {

// Value and first two derivatives of p with respect to s = |x - c|^2.
struct ProfileValue {
  double value = 0;
  double d1 = 0;
  double d2 = 0;
};

class RadialProfile {
 public:
  virtual ~RadialProfile() = default;
  virtual ProfileValue eval(double s) const = 0;
  // Radius beyond which the profile vanishes (or underflows).
  virtual double extent() const = 0;
  virtual bool compact() const = 0;
};

// exp(-s / w^2)
class GaussianProfile final : public RadialProfile {
 public:
  explicit GaussianProfile(double width = 1.0);
  ProfileValue eval(double s) const override;
  double extent() const override;
  bool compact() const override { return false; }

 private:
  double inv_w2_;
  double width_;
};

// exp(-1 / (1 - s / rho^2)) inside the ball of radius rho, 0 outside.
class BumpProfile final : public RadialProfile {
 public:
  explicit BumpProfile(double radius = 1.0);
  ProfileValue eval(double s) const override;
  double extent() const override { return radius_; }
  bool compact() const override { return true; }

 private:
  double radius_;
  double inv_r2_;
};

// Quintic Hermite interpolation of (f, f', f'') given on a uniform s-grid over
// [0, s_max]; identically zero for s >= s_max.
class TabulatedProfile final : public RadialProfile {
 public:
  TabulatedProfile(double s_max, std::vector<double> f, std::vector<double> d1,
                   std::vector<double> d2);
  ProfileValue eval(double s) const override;
  double extent() const override;
  bool compact() const override { return true; }

  // Integral of f over [s, s_max].
  double tail_integral(double s) const;
  double s_max() const { return s_max_; }
  double spacing() const { return h_; }
  std::size_t node_count() const { return f_.size(); }
  const std::vector<double>& node_values() const { return f_; }
  const std::vector<double>& node_d1() const { return d1_; }
  const std::vector<double>& node_d2() const { return d2_; }

 private:
  double s_max_;
  double h_;
  std::vector<double> f_, d1_, d2_;
  std::vector<double> coef_;  // 6 monomial coefficients per cell, in t = (s - s_j)/h
  std::vector<double> tail_;  // tail_[j] = integral over [s_j, s_max]
};

// Sup over r >= 0 of g(r) * (1 + offset + r)^power, where g is one of the radial
// majorants below; found by dense sampling plus golden-section refinement.
enum class Majorant { Value, Gradient, Hessian };
double radial_majorant(const RadialProfile& p, Majorant kind, double offset, double power);

// Smallest radius beyond which every majorant of the profile stays below eps.
double radial_negligible_radius(const RadialProfile& p, double eps);

}  // namespace emscat
