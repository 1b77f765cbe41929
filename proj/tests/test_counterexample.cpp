#include "emscat/counterexample.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace emscat;

namespace {

const CounterexampleBundle& bundle() {
  static const CounterexampleBundle b = build_bundle();
  return b;
}

class ZeroProfile final : public EvenProfile {
 public:
  std::array<double, 4> eval(double) const override { return {0, 0, 0, 0}; }
  double extent() const override { return 2.0; }
};

}  // namespace

TEST_CASE("bump chi") {
  CHECK(bump_chi(-0.5) == 0.0);
  CHECK(bump_chi(1.5) == 0.0);
  CHECK(bump_chi(0.0) == 0.0);
  CHECK(bump_chi(1.0) == 0.0);
  CHECK(bump_chi(0.5) == doctest::Approx(std::exp(-4.0)).epsilon(1e-15));
  bool nonnegative = true;
  for (int k = 0; k <= 10000; ++k) nonnegative = nonnegative && bump_chi(-0.5 + 2.0 * k / 10000) >= 0;
  CHECK(nonnegative);
  // derivatives against central differences
  for (double q : {0.2, 0.5, 0.77}) {
    const auto d = bump_chi_derivatives(q);
    const double h = 1e-5;
    const auto p = bump_chi_derivatives(q + h), m = bump_chi_derivatives(q - h);
    CHECK(d[0] == bump_chi(q));
    for (int k = 0; k < 3; ++k) CHECK(std::abs((p[k] - m[k]) / (2 * h) - d[k + 1]) <= 1e-6 * (1 + std::abs(d[k + 1])));
  }
}

TEST_CASE("even profiles f~") {
  double sq_gap = 0, odd_gap = 0, peak = 0;
  for (int k = 0; k <= 20000; ++k) {
    const double q = -6 + 12.0 * k / 20000;
    sq_gap = std::max(sq_gap, std::abs(f_tilde(1, q) * f_tilde(1, q) - f_tilde(2, q) * f_tilde(2, q)));
    odd_gap = std::max({odd_gap, std::abs(f_tilde(1, q) - f_tilde(1, -q)), std::abs(f_tilde(2, q) - f_tilde(2, -q))});
    peak = std::max(peak, f_tilde(1, q));
  }
  CHECK(sq_gap == 0.0);
  CHECK(odd_gap == 0.0);
  CHECK(peak == doctest::Approx(1.0).epsilon(1e-6));

  const double chi = oracle::simpson_scalar(bump_chi, 0, 1, 1e-15);
  const double i1 = oracle::simpson_scalar([](double q) { return f_tilde(1, q); }, -6, 6, 1e-14, 96);
  const double i2 = oracle::simpson_scalar([](double q) { return f_tilde(2, q); }, -6, 6, 1e-14, 96);
  CHECK(std::abs(i2) <= 1e-12);
  CHECK(i1 > 0);
  // A = e^4 normalization
  CHECK(i1 == doctest::Approx(4 * std::exp(4.0) * chi).epsilon(1e-10));
  CHECK_THROWS_AS(f_tilde(3, 0.5), ConfigError);
}

TEST_CASE("inverse Abel") {
  SUBCASE("Gaussian pair") {
    const RadialInversion r = radial_from_sinogram(GaussianEvenProfile());
    for (double s : {0.0, 0.4, 1.7, 6.0}) CHECK(r.profile->eval(s).value == doctest::Approx(std::exp(-s)).epsilon(1e-9));
    CHECK(r.forward_residual <= 1e-9);
  }
  SUBCASE("zero profile") {
    const RadialInversion r = radial_from_sinogram(ZeroProfile());
    for (double s : {0.0, 1.0, 3.9}) CHECK(r.profile->eval(s).value == 0.0);
  }
  SUBCASE("forward transform of the recovered bump profiles") {
    const CounterexampleBundle& b = bundle();
    CHECK(b.abel_residual1 <= 1e-6);
    CHECK(b.abel_residual2 <= 1e-6);
    // independent spot check: Simpson along the line against f~_i
    for (double q : {0.15, 0.5, 2.0, 4.3, 4.9}) {
      const double p1 = 2 * oracle::simpson_scalar([&](double t) { return b.f1->eval(q * q + t * t).value; }, 0, 5.5, 1e-13, 128);
      const double p2 = 2 * oracle::simpson_scalar([&](double t) { return b.f2->eval(q * q + t * t).value; }, 0, 5.5, 1e-13, 128);
      CHECK(std::abs(p1 - f_tilde(1, q)) <= 1e-6);
      CHECK(std::abs(p2 - f_tilde(2, q)) <= 1e-6);
    }
  }
}

TEST_CASE("bundle") {
  const CounterexampleBundle& b = bundle();
  CHECK(b.B_sup_difference > 0.1 * b.B1_sup);
  // (int f_1)^2 != (int f_2)^2, against Simpson on the tabulated profiles
  const double i1 = oracle::simpson_scalar([&](double s) { return b.f1->eval(s).value; }, 0, 25, 1e-13, 400);
  const double i2 = oracle::simpson_scalar([&](double s) { return b.f2->eval(s).value; }, 0, 25, 1e-13, 400);
  CHECK(i1 == doctest::Approx(b.integral_f1).epsilon(1e-8));
  CHECK(std::abs(i2 - b.integral_f2) <= 1e-8);
  CHECK(std::abs(i1 * i1 - i2 * i2) > 0.1);
  CHECK(std::abs(b.FF1 - b.FF2) > 1e-4);
  CHECK(b.V_sup > 0);
  // PV from the nested integrals: even and angle independent, and equal to the
  // transform of the closed-form V
  const Sinogram& s = b.PV;
  double even_gap = 0, angle_gap = 0, peak = 0;
  for (int l = 0; l < s.I; ++l) {
    even_gap = std::max(even_gap, std::abs(s.at(0, l) - s.at(0, s.I - 1 - l)));
    peak = std::max(peak, std::abs(s.at(0, l)));
    for (int j = 1; j < s.J; ++j) angle_gap = std::max(angle_gap, std::abs(s.at(j, l) - s.at(0, l)));
  }
  CHECK(even_gap <= 1e-10 * peak);
  CHECK(angle_gap == 0.0);
  CHECK(b.PV_closed_form_gap <= 1e-8);
  for (double q : {0.0, 0.7, 3.3}) CHECK(std::abs(nested_PV(*b.f1, *b.f2, q) - radial_xray(*b.V_profile, q)) <= 1e-8);
  CHECK(b.V_fbp_error <= 0.05);
}

TEST_CASE("W22 equality") {
  const CounterexampleBundle& b = bundle();
  const EqualityReport r = verify_equality(b, 32, 64, 5.5);
  CHECK(r.max_residual <= 1e-6);
  CHECK(r.max_W21 <= 1e-12);
  CHECK(r.B_differ);
  CHECK(r.V_nonzero);
  CHECK(r.scale > 0.1);
  CHECK(r.max_closed_form_gap <= 1e-6);

  // closed form on single lines, and the two sides computed separately
  for (double q : {0.3, 4.5})
    for (double phi : {0.0, 2.1}) {
      const Line line = Line::planar(phi, q);
      const AsymptoticTerms lhs = limit_terms(*b.V_B1, line), rhs = limit_terms(*b.zero_B2, line);
      const double ft = f_tilde(1, q);
      CHECK(std::abs(lhs.W22.dot(perp(line.theta)) - 0.5 * q * ft * ft) <= 1e-6);
      CHECK((lhs.W22 - rhs.W22).norm() <= 1e-6);
      CHECK(lhs.W21.norm() <= 1e-12);
      CHECK(rhs.W21.norm() <= 1e-12);
    }
}
