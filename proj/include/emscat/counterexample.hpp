#pragma once

#include "emscat/asymptotics.hpp"
#include "emscat/fields.hpp"
#include "emscat/profiles.hpp"
#include "emscat/xray.hpp"

#include <array>
#include <memory>
#include <vector>

namespace emscat {

// chi(q) = exp(-1 / (q (1 - q))) on ]0,1[, zero elsewhere.
double bump_chi(double q);

// Derivatives 0..3 of chi at q.
std::array<double, 4> bump_chi_derivatives(double q);

// Even profile g(q) prescribed as the X-ray transform of a radial function.
class EvenProfile {
 public:
  virtual ~EvenProfile() = default;
  // Derivatives 0..3 with respect to q.
  virtual std::array<double, 4> eval(double q) const = 0;
  // |q| beyond which the profile vanishes.
  virtual double extent() const = 0;
  // Abel kernel K(u) = g'(sqrt u) / sqrt u with dK/du and d2K/du2.
  virtual ProfileValue kernel(double u) const;
  // Points in q where the integrand should be split.
  virtual std::vector<double> breakpoints() const { return {}; }
  double operator()(double q) const { return eval(q)[0]; }
};

// A e^4 (chi(q) + chi(-q) + eps chi(q - 4) + eps chi(-4 - q)); A = 1 gives max = 1.
class BumpSumProfile final : public EvenProfile {
 public:
  explicit BumpSumProfile(double epsilon, double amplitude = 1.0);
  std::array<double, 4> eval(double q) const override;
  double extent() const override { return 5.0; }
  ProfileValue kernel(double u) const override;
  std::vector<double> breakpoints() const override { return {1.0, 4.0, 5.0}; }

 private:
  double eps_;
  double scale_;
};

// sqrt(pi) a e^{-q^2}: the transform of a e^{-|x|^2}.
class GaussianEvenProfile final : public EvenProfile {
 public:
  explicit GaussianEvenProfile(double amplitude = 1.0, double extent = 6.5);
  std::array<double, 4> eval(double q) const override;
  double extent() const override { return extent_; }
  ProfileValue kernel(double u) const override;

 private:
  double a_;
  double extent_;
};

// f~_i of the construction: i = 1 -> eps = +1, i = 2 -> eps = -1.
double f_tilde(int i, double q);

struct AbelOptions {
  double spacing = 0.0025;          // s-grid step of the tabulated profile
  double tolerance = 1e-12;         // adaptive quadrature target
  double forward_tolerance = 1e-6;  // sup residual of the forward check
  int forward_samples = 400;
};

struct RadialInversion {
  std::shared_ptr<const TabulatedProfile> profile;  // f(s), s = |x|^2
  double forward_residual = 0;                       // sup |2 int f(q^2+t^2) dt - g(q)|
};

// Solves 2 int_0^inf f(q^2 + t^2) dt = g(q) by inverse Abel,
// f(s) = -(1/pi) int_0^inf K(s + t^2) dt, tabulated with f' and f'' on [0, extent^2].
// Throws NumericError when the forward check exceeds its tolerance.
RadialInversion radial_from_sinogram(const EvenProfile& g, const AbelOptions& opt = {});

// 2 int_0^inf f(q^2 + t^2) dt by adaptive quadrature.
double radial_xray(const RadialProfile& f, double q, double tolerance = 1e-12);

struct CounterexampleOptions {
  AbelOptions abel;
  int J = 256;     // V sinogram angles
  int I = 256;     // V sinogram offsets
  double Q = 5.5;  // offset range
  FbpOptions fbp{5.5, 128, Apodization::Hann, 0};
  QuadratureControls quadrature;
};

struct CounterexampleBundle {
  std::shared_ptr<const BumpSumProfile> g1, g2;       // f~_1, f~_2
  std::shared_ptr<const TabulatedProfile> f1, f2;     // B^i_12(x) = f_i(|x|^2)
  std::shared_ptr<const TabulatedProfile> V_profile;  // V(x) = V_profile(|x|^2)
  FieldPtr V_B1;   // (V, B_1)
  FieldPtr zero_B2;  // (0, B_2)
  FieldPtr B1;     // (0, B_1)

  Sinogram PV;           // X-ray transform of V from the nested integrals
  GridFunction V_fbp;    // V recovered from PV
  GridFunction V_exact;  // closed-form V on the same grid
  double V_fbp_error = 0;         // relative L2
  double PV_closed_form_gap = 0;  // nested integrals vs quadrature of the closed form

  double abel_residual1 = 0, abel_residual2 = 0;
  double B_sup_difference = 0, B1_sup = 0;
  double V_sup = 0;
  double integral_f1 = 0, integral_f2 = 0;  // int_0^inf f_i(s) ds
  double FF1 = 0, FF2 = 0;                  // int_0^inf F_i(t^2) f_i(t^2) dt
};

// F_i(s) = -int_s^inf f_i.
double tail_primitive(const TabulatedProfile& f, double s);

// Nested-integral X-ray transform of V at offset q:
// split(f_2(.^2+q^2) C_2) - split(f_1(.^2+q^2) C_1), C_i = int_{-inf}^sigma f_i(eta^2 + q^2) d eta.
double nested_PV(const RadialProfile& f1, const RadialProfile& f2, double q, const QuadratureControls& qc = {});

CounterexampleBundle build_bundle(const CounterexampleOptions& opt = {});

struct EqualityReport {
  int angles = 0, offsets = 0;
  double max_residual = 0;          // max over lines and components of |W22(V,B1) - W22(0,B2)|
  double max_residual_theta = 0;    // along theta
  double max_residual_perp = 0;     // along theta_perp
  double scale = 0;                 // max |W22(0,B2)|
  double max_closed_form_gap = 0;   // |W22(V,B1) . theta_perp - (q/2) f~_1(q)^2|
  double max_W21 = 0;               // max |W21(B_i)|
  bool B_differ = false;
  bool V_nonzero = false;
};

// Angles phi_j = 2 pi j / angles, offsets uniform on [-Q, Q].
EqualityReport verify_equality(const CounterexampleBundle& b, int angles = 32, int offsets = 64, double Q = 5.5,
                               const AsymptoticsOptions& opt = {}, int threads = 0);

}  // namespace emscat
