#include "emscat/picard.hpp"

#include "emscat/asymptotics.hpp"
#include "emscat/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace emscat {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

struct Common {
  double a;   // |v|/sqrt2 - R
  double X;   // 1 + |x|/sqrt2
  double K;   // 1 + sqrt(n)|v| + sqrt(n) R
  double sn;  // sqrt(n)
};

Common common(const BoundInputs& in) {
  const double sn = std::sqrt(double(in.n));
  return {in.speed / kSqrt2 - in.R, 1 + in.offset / kSqrt2, 1 + sn * in.speed + sn * in.R, sn};
}

double lambda_combination(double l1, double l2, double l3, double l4) {
  return std::max(l1 * l3 + l2 * l3 + l3 * l4 + l4 * l4, l1 * l1 + l1 * l2 + l2 * l4 + l2 * l3);
}

}  // namespace

BoundSet bounds(const BoundInputs& in) {
  if (!(in.alpha > 1)) throw DomainError("bounds: alpha must exceed 1");
  if (!(in.r > 0 && in.r <= 1)) throw DomainError("bounds: r must lie in (0, 1]");
  if (!(in.R > 0)) throw DomainError("bounds: R must be positive");
  if (!(in.speed > kSqrt2 * in.R)) throw DomainError("bounds: need |v| > sqrt(2) R");
  if (in.beta1 < 0 || in.beta2 < 0 || in.n < 1) throw DomainError("bounds: invalid constants");
  BoundSet b;
  b.in = in;
  const Common c = common(in);
  const double al = in.alpha, n = in.n, b1 = in.beta1, b2 = in.beta2;
  const double DT = c.X + c.a * std::abs(in.T);
  const double p1 = std::pow(2.0, al + 1), p2 = std::pow(2.0, al + 2);

  b.rho_T2 = p1 * b1 * c.sn * c.K / (al * c.a * std::pow(DT, al));
  b.rho_T1 = p1 * b1 * c.sn * c.K / ((al - 1) * c.a * c.a * std::pow(DT, al - 1));
  b.rho2 = p2 * b1 * c.sn * c.K / (al * c.a * std::pow(c.X, al));
  b.rho1 = p2 * b1 * c.sn * c.K / (al * (al - 1) * c.a * c.a * std::pow(c.X, al - 1));

  auto lam = [&](double D, double& l1, double& l2, double& l3, double& l4) {
    l1 = p2 * n * b2 * c.K / (al * c.a * c.a * std::pow(D, al));
    l2 = p1 * n * (b1 * c.a + 2 * b2 * c.K) / ((al - 1) * c.a * c.a * c.a * std::pow(D, al - 1));
    l3 = p2 * n * b2 * c.K / ((al + 1) * c.a * std::pow(D, al + 1));
    l4 = p1 * n * (b1 * c.a + 2 * b2 * c.K) / (al * c.a * c.a * std::pow(D, al));
  };
  lam(DT, b.lambda_T1, b.lambda_T2, b.lambda_T3, b.lambda_T4);
  double l10, l20, l30, l40;
  lam(c.X, l10, l20, l30, l40);
  b.lambda1 = 2 * l10 / (al + 1);
  b.lambda2 = 2 * l20 / al;
  b.lambda3 = 2 * l30;
  b.lambda4 = 2 * l40;
  b.lambda_T = lambda_combination(b.lambda_T1, b.lambda_T2, b.lambda_T3, b.lambda_T4);
  b.lambda = lambda_combination(b.lambda1, b.lambda2, b.lambda3, b.lambda4);

  b.delta11 = (b.lambda2 * b.lambda3 + b.lambda4 * b.lambda4) * b.rho2 +
              (b.lambda1 * b.lambda3 + b.lambda3 * b.lambda4) * b.rho1;
  b.delta21 = (b.lambda1 * b.lambda2 + b.lambda2 * b.lambda4) * b.rho2 +
              (b.lambda1 * b.lambda1 + b.lambda2 * b.lambda3) * b.rho1;
  const double n3 = n * n * n, vs = in.speed / kSqrt2, tail = 1 + c.sn * in.speed;
  b.delta12 = std::pow(2.0, al + 4) * kSqrt2 * n3 * tail * (2 * al * al + al - 2) * b1 * (b1 + 2 * b2 + b1 * b2) /
              ((al - 1) * al * (al + 1) * vs * c.a * c.a * std::pow(c.X, 2 * al));
  b.delta22 = std::pow(2.0, al + 5) * n3 * (2 * al + 4) * b1 * (2 * b2 + b1 + b1 * b2) * tail /
              ((al - 1) * al * al * (al + 1) * vs * c.a * c.a * c.a * std::pow(c.X, 2 * al - 1));
  return b;
}

double BoundSet::zeta(double t) const {
  const Common c = common(in);
  const double al = in.alpha;
  return std::pow(2.0, al + 1) * in.beta1 * c.sn * c.K / (al * c.a * std::pow(c.X + c.a * t, al));
}

double BoundSet::xi(double t) const {
  const Common c = common(in);
  const double al = in.alpha;
  return std::pow(2.0, al + 1) * in.beta1 * c.sn * c.K /
         (al * (al - 1) * c.a * c.a * std::pow(c.X + c.a * t, al - 1));
}

double rho2_limit(int n, double alpha, double beta1, double offset) {
  return std::pow(2.0, alpha + 2) * kSqrt2 * beta1 * n / (alpha * std::pow(1 + offset / kSqrt2, alpha));
}

Thresholds thresholds(int n, double alpha, double beta1, double beta2, double R, double r, double offset) {
  if (!(r > 0 && r <= 1)) throw DomainError("thresholds: r must lie in (0, 1]");
  if (!(R > rho2_limit(n, alpha, beta1, offset)))
    throw DomainError("thresholds: R must exceed the large-speed limit of rho_2 (no root exists)");
  BoundInputs in{n, alpha, beta1, beta2, 0, offset, R, r, 0};
  auto solve = [&](auto&& g) {
    // g decreasing in |v|, g -> +inf at sqrt2 R and below 1 at large |v|
    double lo = kSqrt2 * R, hi = 2 * lo + 1;
    while (g(hi) >= 1) {
      lo = hi;
      hi *= 2;
      if (hi > 1e300) throw NumericError("thresholds: root not bracketed");
    }
    while (hi - lo > 1e-13 * hi) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (g(mid) >= 1 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  auto at = [&](double v) {
    BoundInputs q = in;
    q.speed = v;
    return bounds(q);
  };
  Thresholds z;
  z.R = R;
  z.r = r;
  z.z1 = beta1 > 0 ? solve([&](double v) { return at(v).rho1 / r; }) : kSqrt2 * R;
  z.z2 = beta1 > 0 ? solve([&](double v) { return at(v).rho2 / R; }) : kSqrt2 * R;
  z.z3 = (beta1 > 0 || beta2 > 0) ? solve([&](double v) { return at(v).lambda; }) : kSqrt2 * R;
  return z;
}

Thresholds default_thresholds(const Field& field, double offset) {
  const Envelope& e = field.envelope();
  const int n = field.dimension();
  double R = 2 * rho2_limit(n, e.alpha, e.beta1, offset);
  if (!(R > 0)) R = 1;
  return thresholds(n, e.alpha, e.beta1, e.beta2, R, 1.0, offset);
}

// ---------------------------------------------------------------------------

double DeflectionPath::norm() const {
  const auto& t = grid.nodes();
  double a = 0, b = 0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    a = std::max(a, (f[j] - t[j] * h[j]).norm());
    b = std::max(b, h[j].norm());
  }
  return std::max(a, b);
}

DeflectionPath DeflectionPath::operator-(const DeflectionPath& o) const {
  DeflectionPath d{grid, f, h};
  for (std::size_t j = 0; j < f.size(); ++j) {
    d.f[j] -= o.f[j];
    d.h[j] -= o.h[j];
  }
  return d;
}

bool DeflectionPath::in_ball(double R, double r) const {
  const auto& t = grid.nodes();
  for (std::size_t j = 0; j < t.size(); ++j)
    if ((f[j] - t[j] * h[j]).norm() > r || h[j].norm() > R) return false;
  return true;
}

DeflectionPath zero_path(const Field& field, const Vec& v_minus, const Vec& x_minus, const PicardControls& pc) {
  const Vec x = project_offset(v_minus, x_minus);
  const double s = v_minus.norm();
  const Line line = Line::make(v_minus, x);
  QuadratureControls qc = pc.quadrature;
  const LineGrid lg = line_grid(field, line, qc);
  std::vector<double> edges = lg.grid.edges();
  // field-free extension: the path is affine there, so a few wide panels suffice
  const double lo = edges.front(), hi = edges.back();
  const double grow = std::max(pc.span_factor, 1.0) - 1;
  std::vector<double> left, right;
  if (grow > 0)
    for (int k = 4; k >= 1; --k) {
      left.push_back(lo + grow * lo * k / 4);
      right.push_back(hi + grow * hi * (5 - k) / 4);
    }
  edges.insert(edges.begin(), left.begin(), left.end());
  edges.insert(edges.end(), right.begin(), right.end());
  DeflectionPath p;
  p.grid = PanelGrid(std::move(edges), qc.order).scaled(1.0 / s);
  p.f.assign(p.grid.size(), Vec::Zero());
  p.h.assign(p.grid.size(), Vec::Zero());
  return p;
}

DeflectionPath apply_A(const Field& field, const Vec& v_minus, const Vec& x_minus, const DeflectionPath& path) {
  if (!(v_minus.norm() > 0)) throw DomainError("apply_A: v_minus must be nonzero");
  if (path.f.size() != path.grid.size() || path.h.size() != path.grid.size())
    throw DomainError("apply_A: path is not defined on its grid");
  const auto& t = path.grid.nodes();
  std::vector<Vec> F(t.size());
  for (std::size_t j = 0; j < t.size(); ++j)
    F[j] = field.force_unchecked(x_minus + t[j] * v_minus + path.f[j], v_minus + path.h[j]);
  DeflectionPath out;
  out.grid = path.grid;
  out.h = path.grid.cumulative_left(F);
  out.f = path.grid.cumulative_left(out.h);
  return out;
}

FixedPointResult solve_fixed_point(const Field& field, const Vec& v_minus, const Vec& x_minus,
                                   const PicardControls& pc) {
  const Vec x = project_offset(v_minus, x_minus);
  FixedPointResult res;
  const double s = v_minus.norm();
  try {
    const Envelope& e = field.envelope();
    const double R = pc.R.value_or(2 * rho2_limit(field.dimension(), e.alpha, e.beta1, x.norm()));
    if (e.beta1 == 0 && e.beta2 == 0) {
      res.certificate = ContractionCertificate{0.0, 1, Thresholds{}};
    } else {
      const Thresholds z = thresholds(field.dimension(), e.alpha, e.beta1, e.beta2, R, pc.r, x.norm());
      if (s >= std::max(z.z1, z.z2) && s > z.z3) {
        BoundInputs in{field.dimension(), e.alpha, e.beta1, e.beta2, s, x.norm(), R, pc.r, 0};
        res.certificate = ContractionCertificate{bounds(in).lambda, 0, z};
      } else {
        res.below_threshold = true;
        res.warning = "speed below the contraction thresholds; no certificate";
      }
    }
  } catch (const DomainError& err) {
    res.below_threshold = true;
    res.warning = err.what();
  }

  DeflectionPath p = zero_path(field, v_minus, x, pc);
  for (int it = 1; it <= pc.max_iterations; ++it) {
    DeflectionPath next = apply_A(field, v_minus, x, apply_A(field, v_minus, x, p));
    const double r = (next - p).norm();
    if (it == 1) res.initial_step = next.norm();
    res.residual_history.push_back(r);
    p = std::move(next);
    res.iterations = it;
    res.residual = r;
    if (r <= pc.tolerance * (1 + p.norm())) {
      res.path = std::move(p);
      if (res.certificate && res.certificate->lambda > 0 && res.certificate->lambda < 1 && res.initial_step > 0) {
        const double lam = res.certificate->lambda;
        res.certificate->a_priori_iterations = std::max(0L, long(
            std::ceil(std::log(pc.tolerance * (1 - lam) / res.initial_step) / std::log(lam))));
      }
      return res;
    }
  }
  throw NumericError("solve_fixed_point: no convergence, last residual " + std::to_string(res.residual));
}

// ---------------------------------------------------------------------------

PicardDecomposition decompose_klh(const Field& field, const Vec& v_minus, const Vec& x_minus,
                                  const DeflectionPath& path) {
  const DeflectionPath a = apply_A(field, v_minus, x_minus, path);
  const auto& t = path.grid.nodes();
  std::vector<Vec> F(t.size());
  for (std::size_t j = 0; j < t.size(); ++j)
    F[j] = field.force_unchecked(x_minus + t[j] * v_minus + a.f[j], v_minus + a.h[j]);
  PicardDecomposition d;
  d.grid = path.grid;
  d.k = path.grid.integral(F);
  d.l = path.grid.split_double(F);
  const std::vector<Vec> R = path.grid.cumulative_right(F);
  d.H = path.grid.cumulative_right(R);
  d.Hdot.resize(R.size());
  for (std::size_t j = 0; j < R.size(); ++j) d.Hdot[j] = -R[j];
  return d;
}

Vec PicardDecomposition::H_at(double t) const { return grid.interpolate(H, t); }
Vec PicardDecomposition::Hdot_at(double t) const { return grid.interpolate(Hdot, t); }

// ---------------------------------------------------------------------------

bool SmallAngleReport::all_hold() const {
  return std::all_of(checks.begin(), checks.end(), [](const InequalityCheck& c) { return c.holds; });
}

SmallAngleReport verify_small_angle_estimates(const Field& field, const Vec& v_minus, const Vec& x_minus,
                                              std::optional<double> R_opt, double r) {
  SmallAngleReport rep;
  const Vec x = project_offset(v_minus, x_minus);
  rep.v_minus = v_minus;
  rep.x_minus = x;
  const Envelope& e = field.envelope();
  const int n = field.dimension();
  const double s = v_minus.norm(), xn = x.norm();
  const double R = R_opt.value_or(2 * rho2_limit(n, e.alpha, e.beta1, xn));
  rep.thresholds = thresholds(n, e.alpha, e.beta1, e.beta2, R, r, xn);
  rep.admissible = s >= std::max(rep.thresholds.z1, rep.thresholds.z2) && s > rep.thresholds.z3;
  if (!rep.admissible) return rep;

  const BoundSet b = bounds({n, e.alpha, e.beta1, e.beta2, s, xn, R, r, 0});
  const Trajectory tr = integrate_trajectory(field, v_minus, x);
  const ScatteringDatum d = scattering_datum(tr);
  const FiniteEnergyTerms w = finite_energy_terms(field, v_minus, x);

  std::vector<double> ts;
  const auto& steps = tr.times();
  for (std::size_t k = 0; k < steps.size(); ++k) {
    ts.push_back(steps[k]);
    if (k + 1 < steps.size()) ts.push_back(0.5 * (steps[k] + steps[k + 1]));
  }
  double ball_f = 0, ball_h = 0, in_vel = 0, in_pos = 0, out_h = 0, out_hd = 0;
  for (double t : ts) {
    const DeflectionState y = tr.deflection(t);
    ball_f = std::max(ball_f, (y.y - t * y.u).norm());
    ball_h = std::max(ball_h, y.u.norm());
    if (t <= 0) {
      in_vel = std::max(in_vel, y.u.norm() / b.zeta(std::abs(t)));
      in_pos = std::max(in_pos, y.y.norm());
    }
    if (t >= 0) {
      const Vec h = y.y - t * d.a_sc - d.b_sc;
      const Vec hd = y.u - d.a_sc;
      out_h = std::max(out_h, h.norm() / b.xi(t));
      out_hd = std::max(out_hd, hd.norm() / b.zeta(t));
    }
  }
  auto add = [&](std::string name, double lhs, double rhs) {
    rep.checks.push_back({std::move(name), lhs, rhs, lhs < rhs});
  };
  add("ball_position_sup", ball_f, r);
  add("ball_velocity_sup", ball_h, R);
  add("incoming_velocity_decay_ratio", in_vel, 1.0);
  add("incoming_deflection_sup", in_pos, 0.5 * b.rho1);
  add("outgoing_remainder_ratio", out_h, 1.0);
  add("outgoing_remainder_rate_ratio", out_hd, 1.0);
  add("velocity_change_norm", d.a_sc.norm(), b.rho2);
  add("position_change_norm", d.b_sc.norm(), b.rho1);
  add("velocity_change_minus_w1", (d.a_sc - w.w1).norm(), b.delta11 + b.delta12);
  add("position_change_minus_w2", (d.b_sc - w.w2).norm(), b.delta21 + b.delta22);
  add("max_deflection_angle", d.max_angle, std::numbers::pi / 4);
  return rep;
}

}  // namespace emscat
