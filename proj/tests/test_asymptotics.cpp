#include "emscat/asymptotics.hpp"
#include "emscat/dynamics.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace emscat;

namespace {

const double kSqrtPi = std::sqrt(std::numbers::pi);

Vec xray_gradV(const Field& f, const Line& line) {
  return oracle::simpson([&](double t) { return f.potential_gradient(line.at(t)); }, -12, 12, 1e-14);
}

AsymptoticsOptions with_width(double w) {
  AsymptoticsOptions o;
  o.quadrature.panel_width = w;
  return o;
}

double max_change(const AsymptoticTerms& a, const AsymptoticTerms& b) {
  return std::max({(a.W11 - b.W11).norm(), (a.W12 - b.W12).norm(), (a.W21 - b.W21).norm(), (a.W22 - b.W22).norm()});
}

}  // namespace

TEST_CASE("W11 in closed form on the reference field") {
  const Line line = Line::make(Vec(1, 0, 0), Vec(0, 1, 0));
  const AsymptoticTerms W = limit_terms(*field_a(), line);
  CHECK(std::abs(W.W11[0]) <= 1e-15);
  CHECK(W.W11[1] == doctest::Approx(-kSqrtPi / std::exp(1.0)).epsilon(1e-13));
  // -grad V is odd in tau along this line except for its y component
  const Vec ref = xray_gradV(*field_a(), line);
  CHECK((W.xray_gradV - ref).norm() <= 1e-12);
}

TEST_CASE("B = 0 reduces to the potential terms") {
  const FieldPtr g = gaussian_field(0.8, 0.0, 1.3);
  for (const Line& line : {Line::planar(0.3, 0.7), Line::planar(2.0, -1.1)}) {
    const AsymptoticTerms W = limit_terms(*g, line);
    CHECK(W.W11.norm() == 0.0);
    CHECK(W.W21.norm() == 0.0);
    CHECK((W.W12 + xray_gradV(*g, line)).norm() <= 1e-12);
    CHECK((W.W22 - W.split_minus_gradV).norm() == 0.0);
    const FiniteEnergyTerms w = finite_energy_terms(*g, 7.0 * line.theta, line.x);
    CHECK((w.w1 + xray_gradV(*g, line) / 7.0).norm() <= 1e-12);
    CHECK(w.omega3.norm() == 0.0);
    CHECK(w.omega4.norm() == 0.0);
  }
}

TEST_CASE("orientation parities") {
  const FieldPtr f = field_a();
  for (const Line& line : {Line::planar(0.4, 0.5), Line::planar(4.0, 1.5)}) {
    const AsymptoticTerms p = limit_terms(*f, line), m = limit_terms(*f, line.reversed());
    CHECK((p.W11 + m.W11).norm() <= 1e-14);
    CHECK((p.xray_gradV - m.xray_gradV).norm() <= 1e-14);
  }
}

TEST_CASE("resolution doubling") {
  const FieldPtr f = field_a();
  const Line line = Line::make(Vec(1, 0, 0), Vec(0, 1, 0));
  const AsymptoticTerms a = limit_terms(*f, line, with_width(0.25)), b = limit_terms(*f, line, with_width(0.125));
  CHECK(max_change(a, b) <= 1e-8);
  AsymptoticsOptions est;
  est.estimate_error = true;
  const AsymptoticTerms e = limit_terms(*f, Line::planar(1.0, 0.4), est);
  const AsymptoticTerms fine = limit_terms(*f, Line::planar(1.0, 0.4), with_width(0.0625));
  CHECK(max_change(e, fine) <= std::max(e.error_estimate, 1e-13));
}

TEST_CASE("W11 and W12 against the extrapolated velocity change") {
  const FieldPtr f = field_a();
  const Line line = Line::make(Vec(1, 0, 0), Vec(0, 1, 0));
  const AsymptoticTerms W = limit_terms(*f, line);
  std::vector<Vec> e;
  for (double s : {16.0, 32.0, 64.0}) e.push_back(s * (scattering_datum(*f, s * line.theta, line.x).a_sc - W.W11));
  // e_s = W12 + c/s + d/s^2: two-level Richardson on the last three
  const Vec r1 = 2 * e[1] - e[0], r2 = 2 * e[2] - e[1];
  const Vec W12 = (4 * r2 - r1) / 3;
  CHECK((W12 - W.W12).norm() <= 2e-3 * W.W12.norm());
  // and W11 itself from a_sc with the first-order correction
  const Vec a64 = scattering_datum(*f, 64 * line.theta, line.x).a_sc;
  CHECK((a64 - W.W12 / 64 - W.W11).norm() <= 0.05 * W.W12.norm() / 64);
}

TEST_CASE("s b_sc approaches W21 at rate 1/s") {
  const FieldPtr f = field_a();
  const Line line = Line::planar(0.7, 0.6);
  const AsymptoticTerms W = limit_terms(*f, line);
  std::vector<double> s{16, 32, 64}, r;
  for (double v : s) r.push_back((v * scattering_datum(*f, v * line.theta, line.x).b_sc - W.W21).norm());
  CHECK(oracle::loglog_slope(s, r) == doctest::Approx(-1).epsilon(0.15));
}

TEST_CASE("radial B has no W21") {
  const FieldPtr g = gaussian_field(0.5, 1.0, 1.2);
  for (double phi : {0.0, 1.3, 2.9})
    for (double q : {0.0, 0.6, -1.8}) CHECK(limit_terms(*g, Line::planar(phi, q)).W21.norm() <= 1e-14);
}

TEST_CASE("W22 is even in B") {
  const FieldPtr f = field_a();
  const ScaledField flipped(f, 1, -1);
  for (const Line& line : {Line::planar(0.2, 0.3), Line::planar(3.5, -1.0)}) {
    const AsymptoticTerms p = limit_terms(*f, line), m = limit_terms(flipped, line);
    CHECK((p.W22 - m.W22).norm() <= 1e-13 * (1 + p.W22.norm()));
    CHECK((p.W11 + m.W11).norm() <= 1e-15);
  }
}

TEST_CASE("scaling of the magnetic factor") {
  const FieldPtr f = field_a();
  const Line line = Line::planar(0.9, 0.25);
  const AsymptoticTerms one = limit_terms(*f, line);
  const AsymptoticTerms two = limit_terms(ScaledField(f, 1, 2), line);
  CHECK((two.W11 - 2 * one.W11).norm() <= 1e-14);
  CHECK((two.W21 - 2 * one.W21).norm() <= 1e-14);
  CHECK((two.magnetic_full - 4 * one.magnetic_full).norm() <= 1e-13);
  CHECK((two.xray_gradV - one.xray_gradV).norm() <= 1e-14);  // the line grid follows |B|
}

TEST_CASE("finite-energy structural limits") {
  const FieldPtr f = field_a();
  const Line line = Line::planar(0.5, 0.8);
  const AsymptoticTerms W = limit_terms(*f, line);
  std::vector<double> s{16, 32, 64, 128}, r1, r2;
  for (double v : s) {
    const FiniteEnergyTerms w = finite_energy_terms(*f, v * line.theta, line.x);
    r1.push_back((v * (w.w1 - W.W11) - W.W12).norm());
    r2.push_back((v * (v * w.w2 - W.W21) - W.W22).norm());
  }
  CHECK(oracle::loglog_slope(s, r1) == doctest::Approx(-1).epsilon(0.15));
  CHECK(oracle::loglog_slope(s, r2) == doctest::Approx(-1).epsilon(0.15));
}

TEST_CASE("Born terms") {
  SUBCASE("V = 0: w1 does not depend on s") {
    const FieldPtr g = gaussian_field(0.0, 1.0);
    const Line line = Line::planar(0.6, 0.2);
    CHECK((born_leading(*g, 10, line).w1 - born_leading(*g, 1000, line).w1).norm() == 0.0);
  }
  SUBCASE("linear in the field, quadratic defect against the dynamics") {
    const FieldPtr f = field_a();
    const Line line = Line::planar(1.1, 0.5);
    const double s = 4;
    std::vector<double> eps{0.1, 0.05, 0.025}, defect, lin;
    const BornTerms base = born_leading(*f, s, line);
    for (double e : eps) {
      const ScaledField fe(f, e, e);
      const BornTerms b = born_leading(fe, s, line);
      lin.push_back((b.w1 - e * base.w1).norm() + (b.w2 - e * base.w2).norm());
      defect.push_back((scattering_datum(fe, s * line.theta, line.x).a_sc - b.w1).norm());
      const FiniteEnergyTerms w = finite_energy_terms(fe, s * line.theta, line.x);
      CHECK((w.born1 - b.w1).norm() <= 1e-15);
    }
    for (double l : lin) CHECK(l <= 1e-15);
    CHECK(oracle::loglog_slope(eps, defect) == doctest::Approx(2).epsilon(0.1));
  }
}

TEST_CASE("symmetrize") {
  const FieldPtr f = field_a();
  const Line line = Line::planar(0.35, 0.9);
  const double s = 12;
  const SymmetrizedBorn sym = symmetrize(born_leading(*f, s, line), born_leading(*f, s, line.reversed()));
  const AsymptoticTerms W = limit_terms(*f, line);
  CHECK((sym.xray_gradV - xray_gradV(*f, line)).norm() <= 1e-10);
  CHECK((sym.magnetic_line - W.W11).norm() <= 1e-10);
  CHECK((sym.magnetic_split - W.W21).norm() <= 1e-10);
  CHECK((sym.split_minus_gradV - W.split_minus_gradV).norm() <= 1e-10);

  const FieldPtr g = gaussian_field(1.0, 0.0);
  const BornTerms p = born_leading(*g, s, line);
  const SymmetrizedBorn z = symmetrize(p, born_leading(*g, s, line.reversed()));
  CHECK(z.magnetic_line.norm() <= 1e-15);
  CHECK((z.xray_gradV + s * p.w1).norm() <= 1e-12);
  CHECK_THROWS_AS(symmetrize(p, born_leading(*g, 2 * s, line.reversed())), DomainError);
}
