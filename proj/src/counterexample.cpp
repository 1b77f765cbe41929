#include "emscat/counterexample.hpp"

#include "emscat/inversion.hpp"
#include "emscat/parallel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace emscat {

using std::numbers::pi;
using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

double bump_chi(double q) {
  if (!(q > 0 && q < 1)) return 0;
  const double u = q * (1 - q);
  return std::exp(-1 / u);
}

std::array<double, 4> bump_chi_derivatives(double q) {
  if (!(q > 0 && q < 1)) return {0, 0, 0, 0};
  const double u = q * (1 - q);
  if (1 / u > 700) return {0, 0, 0, 0};
  const double c = std::exp(-1 / u);
  const double u1 = 1 - 2 * q, u2 = -2;
  const double g1 = u1 / (u * u);
  const double g2 = u2 / (u * u) - 2 * u1 * u1 / (u * u * u);
  const double g3 = -6 * u1 * u2 / (u * u * u) + 6 * u1 * u1 * u1 / (u * u * u * u);
  return {c, c * g1, c * (g2 + g1 * g1), c * (g3 + 3 * g1 * g2 + g1 * g1 * g1)};
}

ProfileValue EvenProfile::kernel(double u) const {
  const double q = std::sqrt(std::max(u, 1e-12));
  const auto d = eval(q);
  return {d[1] / q, (q * d[2] - d[1]) / (2 * q * q * q),
          (q * q * d[3] - 3 * q * d[2] + 3 * d[1]) / (4 * std::pow(q, 5))};
}

BumpSumProfile::BumpSumProfile(double epsilon, double amplitude) : eps_(epsilon), scale_(amplitude * std::exp(4.0)) {}

std::array<double, 4> BumpSumProfile::eval(double q) const {
  const auto a = bump_chi_derivatives(q), b = bump_chi_derivatives(-q);
  const auto c = bump_chi_derivatives(q - 4), d = bump_chi_derivatives(-4 - q);
  std::array<double, 4> out{};
  for (int k = 0; k < 4; ++k) {
    const double sgn = (k % 2) ? -1.0 : 1.0;  // chain rule through -q
    out[k] = scale_ * (a[k] + sgn * b[k] + eps_ * (c[k] + sgn * d[k]));
  }
  return out;
}

ProfileValue BumpSumProfile::kernel(double u) const {
  // the profile vanishes to all orders near q = 0
  if (u < 0.005 * 0.005) return {};
  return EvenProfile::kernel(u);
}

GaussianEvenProfile::GaussianEvenProfile(double amplitude, double extent) : a_(amplitude), extent_(extent) {}

std::array<double, 4> GaussianEvenProfile::eval(double q) const {
  const double g = std::sqrt(pi) * a_ * std::exp(-q * q);
  return {g, -2 * q * g, (4 * q * q - 2) * g, (-8 * q * q * q + 12 * q) * g};
}

ProfileValue GaussianEvenProfile::kernel(double u) const {
  const double k = 2 * std::sqrt(pi) * a_ * std::exp(-u);
  return {-k, k, -k};
}

double f_tilde(int i, double q) {
  if (i != 1 && i != 2) throw ConfigError("f_tilde: index must be 1 or 2");
  return BumpSumProfile(i == 1 ? 1.0 : -1.0)(q);
}

// ---------------------------------------------------------------------------

namespace {

// Adaptive bisection on the 61-point rule with an absolute floor, so that
// integrands at round-off level do not drive the recursion to full depth.
template <class H>
double adaptive(H& h, double a, double b, double tol, int depth) {
  double err = 0, l1 = 0;
  const double v = GK::integrate(h, a, b, 0, 0.0, &err, &l1);
  if (depth == 0 || err <= std::max(tol * l1, 1e-17 * (b - a))) return v;
  const double m = 0.5 * (a + b);
  return adaptive(h, a, m, tol, depth - 1) + adaptive(h, m, b, tol, depth - 1);
}

// Integral of h over [0, T] split at the given points.
template <class H>
double split_integral(H&& h, double T, std::vector<double> cuts, double tol) {
  if (!(T > 0)) return 0;
  cuts.push_back(T);
  std::sort(cuts.begin(), cuts.end());
  double a = 0, acc = 0;
  for (double c : cuts) {
    if (!(c > a)) continue;
    c = std::min(c, T);
    acc += adaptive(h, a, c, tol, 15);
    a = c;
    if (a >= T) break;
  }
  return acc;
}

}  // namespace

double radial_xray(const RadialProfile& f, double q, double tolerance) {
  const double R = f.extent();
  const double T2 = R * R - q * q;
  if (!(T2 > 0)) return 0;
  const double T = std::sqrt(T2);
  std::vector<double> cuts;
  for (int k = 1; k < 8; ++k) cuts.push_back(T * k / 8);
  return 2 * split_integral([&](double t) { return f.eval(q * q + t * t).value; }, T, cuts, tolerance);
}

RadialInversion radial_from_sinogram(const EvenProfile& g, const AbelOptions& opt) {
  if (!(opt.spacing > 0)) throw ConfigError("radial_from_sinogram: spacing must be positive");
  const double R = g.extent(), s_max = R * R;
  const std::size_t cells = std::size_t(std::ceil(s_max / opt.spacing));
  const double h = s_max / double(cells);
  std::vector<double> f(cells + 1), d1(cells + 1), d2(cells + 1);
  const std::vector<double> bps = g.breakpoints();
  parallel_for(cells + 1, [&](std::size_t k) {
    const double s = h * double(k);
    const double T = std::sqrt(std::max(s_max - s, 0.0));
    std::vector<double> cuts;
    for (double b : bps)
      if (b * b > s) cuts.push_back(std::sqrt(b * b - s));
    const double c = -1 / pi;
    f[k] = c * split_integral([&](double t) { return g.kernel(s + t * t).value; }, T, cuts, opt.tolerance);
    d1[k] = c * split_integral([&](double t) { return g.kernel(s + t * t).d1; }, T, cuts, opt.tolerance);
    d2[k] = c * split_integral([&](double t) { return g.kernel(s + t * t).d2; }, T, cuts, opt.tolerance);
  });
  RadialInversion out;
  out.profile = std::make_shared<TabulatedProfile>(s_max, std::move(f), std::move(d1), std::move(d2));
  std::vector<double> res(opt.forward_samples);
  parallel_for(res.size(), [&](std::size_t k) {
    const double q = R * double(k) / double(res.size());
    res[k] = std::abs(radial_xray(*out.profile, q) - g(q));
  });
  out.forward_residual = *std::max_element(res.begin(), res.end());
  if (!(out.forward_residual <= opt.forward_tolerance))
    throw NumericError("radial_from_sinogram: forward check residual " + std::to_string(out.forward_residual));
  return out;
}

double tail_primitive(const TabulatedProfile& f, double s) { return -f.tail_integral(s); }

double nested_PV(const RadialProfile& f1, const RadialProfile& f2, double q, const QuadratureControls& qc) {
  const double R = std::max(f1.extent(), f2.extent());
  const double T2 = R * R - q * q;
  if (!(T2 > 0)) return 0;
  const double T = std::sqrt(T2);
  const int np = std::max(4, int(std::ceil(T / (0.2 * qc.panel_width))));
  std::vector<double> edges;
  for (int k = -np; k <= np; ++k) edges.push_back(T * k / np);
  const PanelGrid G(std::move(edges), qc.order);
  auto split_of = [&](const RadialProfile& f) {
    std::vector<double> v(G.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = f.eval(G.nodes()[j] * G.nodes()[j] + q * q).value;
    const std::vector<double> C = G.cumulative_left<double>(v);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] *= C[j];
    return G.split_double<double>(v);
  };
  return split_of(f2) - split_of(f1);
}

CounterexampleBundle build_bundle(const CounterexampleOptions& opt) {
  CounterexampleBundle b;
  b.g1 = std::make_shared<BumpSumProfile>(1.0);
  b.g2 = std::make_shared<BumpSumProfile>(-1.0);
  const RadialInversion r1 = radial_from_sinogram(*b.g1, opt.abel);
  const RadialInversion r2 = radial_from_sinogram(*b.g2, opt.abel);
  b.f1 = r1.profile;
  b.f2 = r2.profile;
  b.abel_residual1 = r1.forward_residual;
  b.abel_residual2 = r2.forward_residual;

  // V = (F_2 f_2 - F_1 f_1) / 2 in s = |x|^2, F_i = -int_s^inf f_i
  const std::size_t M = b.f1->node_count();
  const double h = b.f1->spacing();
  std::vector<double> v(M), v1(M), v2(M);
  for (std::size_t k = 0; k < M; ++k) {
    const double s = h * double(k);
    const double F1 = tail_primitive(*b.f1, s), F2 = tail_primitive(*b.f2, s);
    const double a = b.f1->node_values()[k], a1 = b.f1->node_d1()[k], a2 = b.f1->node_d2()[k];
    const double c = b.f2->node_values()[k], c1 = b.f2->node_d1()[k], c2 = b.f2->node_d2()[k];
    v[k] = 0.5 * (F2 * c - F1 * a);
    v1[k] = 0.5 * (c * c + F2 * c1 - a * a - F1 * a1);
    v2[k] = 0.5 * (3 * c * c1 + F2 * c2 - 3 * a * a1 - F1 * a2);
  }
  b.V_profile = std::make_shared<TabulatedProfile>(b.f1->s_max(), v, v1, v2);

  const Vec origin = Vec::Zero();
  b.V_B1 = std::make_shared<CompositeField>(2, std::vector<RadialTerm>{{b.V_profile, origin, 1.0}},
                                            std::vector<RadialTerm>{{b.f1, origin, 1.0}},
                                            std::vector<VectorPotentialTerm>{});
  b.zero_B2 = std::make_shared<CompositeField>(2, std::vector<RadialTerm>{},
                                               std::vector<RadialTerm>{{b.f2, origin, 1.0}},
                                               std::vector<VectorPotentialTerm>{});
  b.B1 = std::make_shared<CompositeField>(2, std::vector<RadialTerm>{}, std::vector<RadialTerm>{{b.f1, origin, 1.0}},
                                          std::vector<VectorPotentialTerm>{});

  // PV from the nested integrals; V is radial so one column serves every angle
  b.PV = Sinogram(opt.J, opt.I, opt.Q, 1);
  std::vector<double> column(opt.I), gap(opt.I);
  parallel_for(std::size_t(opt.I), [&](std::size_t l) {
    const double q = b.PV.q(int(l));
    column[l] = nested_PV(*b.f1, *b.f2, q, opt.quadrature);
    gap[l] = std::abs(column[l] - radial_xray(*b.V_profile, q));
  });
  for (int j = 0; j < opt.J; ++j)
    for (int l = 0; l < opt.I; ++l) b.PV.at(j, l) = column[l];
  b.PV_closed_form_gap = *std::max_element(gap.begin(), gap.end());
  b.V_fbp = invert_fbp(b.PV, opt.fbp);
  b.V_exact = sample_grid(2, opt.fbp.L, opt.fbp.N, 1, [&](const Vec& x) {
    Eigen::VectorXd r(1);
    r[0] = b.V_profile->eval(x.squaredNorm()).value;
    return r;
  });
  b.V_fbp_error = error_report(b.V_exact, b.V_fbp).total_relative_l2;

  for (std::size_t k = 0; k < M; ++k) {
    b.B_sup_difference = std::max(b.B_sup_difference, std::abs(b.f1->node_values()[k] - b.f2->node_values()[k]));
    b.B1_sup = std::max(b.B1_sup, std::abs(b.f1->node_values()[k]));
    b.V_sup = std::max(b.V_sup, std::abs(v[k]));
  }
  b.integral_f1 = b.f1->tail_integral(0);
  b.integral_f2 = b.f2->tail_integral(0);
  auto FF = [&](const TabulatedProfile& f) {
    const double T = std::sqrt(f.s_max());
    return split_integral(
        [&](double t) { return tail_primitive(f, t * t) * f.eval(t * t).value; }, T, {1.0, 4.0}, 1e-12);
  };
  b.FF1 = FF(*b.f1);
  b.FF2 = FF(*b.f2);
  return b;
}

EqualityReport verify_equality(const CounterexampleBundle& b, int angles, int offsets, double Q,
                               const AsymptoticsOptions& opt, int threads) {
  if (angles < 1 || offsets < 2 || !(Q > 0)) throw ConfigError("verify_equality: invalid line grid");
  EqualityReport rep;
  rep.angles = angles;
  rep.offsets = offsets;
  const std::size_t total = std::size_t(angles) * offsets;
  struct Cell {
    double res = 0, th = 0, pp = 0, scale = 0, closed = 0, w21 = 0;
  };
  std::vector<Cell> cells(total);
  parallel_for(
      total,
      [&](std::size_t k) {
        const int j = int(k / offsets), l = int(k % offsets);
        const double phi = 2 * pi * j / angles, q = -Q + 2 * Q * l / (offsets - 1);
        const Line line = Line::planar(phi, q);
        const AsymptoticTerms a = limit_terms(*b.V_B1, line, opt);
        const AsymptoticTerms c = limit_terms(*b.zero_B2, line, opt);
        const Vec d = a.W22 - c.W22;
        const Vec tp = perp(line.theta);
        Cell& out = cells[k];
        out.res = d.cwiseAbs().maxCoeff();
        out.th = std::abs(d.dot(line.theta));
        out.pp = std::abs(d.dot(tp));
        out.scale = c.W22.norm();
        const double g = (*b.g1)(q);
        out.closed = std::abs(a.W22.dot(tp) - 0.5 * q * g * g);
        out.w21 = std::max(a.W21.norm(), c.W21.norm());
      },
      threads);
  for (const Cell& c : cells) {
    rep.max_residual = std::max(rep.max_residual, c.res);
    rep.max_residual_theta = std::max(rep.max_residual_theta, c.th);
    rep.max_residual_perp = std::max(rep.max_residual_perp, c.pp);
    rep.scale = std::max(rep.scale, c.scale);
    rep.max_closed_form_gap = std::max(rep.max_closed_form_gap, c.closed);
    rep.max_W21 = std::max(rep.max_W21, c.w21);
  }
  rep.B_differ = b.B_sup_difference > 0.1 * b.B1_sup;
  const double sq = b.integral_f1 * b.integral_f1 - b.integral_f2 * b.integral_f2;
  rep.V_nonzero = std::abs(sq) > 1e-8 && std::abs(b.FF1 - b.FF2) > 1e-8;
  return rep;
}

}  // namespace emscat
