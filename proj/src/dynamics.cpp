#include "emscat/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace emscat {

namespace {

using State = Eigen::Matrix<double, 6, 1>;

// Dormand-Prince 5(4) tableau and Hairer's dense-output coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

struct Rhs {
  const Field& field;
  Vec v;
  Vec x;
  State operator()(double t, const State& z) const {
    const Vec y = z.head<3>(), u = z.tail<3>();
    State out;
    out.head<3>() = u;
    out.tail<3>() = field.force_unchecked(x + t * v + y, v + u);
    return out;
  }
};

double error_norm(const State& err, const State& z0, const State& z1, double rtol, double atol) {
  double acc = 0;
  for (int i = 0; i < 6; ++i) {
    const double sc = atol + rtol * std::max(std::abs(z0[i]), std::abs(z1[i]));
    const double e = err[i] / sc;
    acc += e * e;
  }
  return std::sqrt(acc / 6);
}

}  // namespace

Vec project_offset(const Vec& v, const Vec& x) {
  const double vn = v.norm();
  if (!(vn > 0)) throw DomainError("v_minus must be nonzero");
  if (!v.allFinite() || !x.allFinite()) throw DomainError("non-finite initial data");
  const Vec vh = v / vn;
  const double c = vh.dot(x);
  if (std::abs(c) > 1e-9 * (1 + x.norm()))
    throw DomainError("x_minus is not perpendicular to v_minus");
  return x - c * vh;
}

Trajectory integrate_trajectory(const Field& field, const Vec& v_minus, const Vec& x_minus,
                                const IntegrationControls& ctl) {
  if (!(ctl.rtol > 0) || !(ctl.atol > 0)) throw ConfigError("integration tolerances must be positive");
  const Vec x = project_offset(v_minus, x_minus);
  const Vec v = v_minus;
  const double s = v.norm();
  const double xn = x.norm();

  Trajectory tr;
  tr.v_minus = v;
  tr.x_minus = x;
  tr.rtol = ctl.rtol;
  tr.atol = ctl.atol;

  const double beta = std::max(field.envelope().beta1, 1e-300);
  const double L = field.negligible_radius(ctl.start_epsilon * beta);
  const double cap = ctl.time_cap * (1 + xn) / s;
  const double half = L > xn ? std::sqrt(L * L - xn * xn) / s : 0.0;
  const double t0 = -std::min(std::max(half, 1.0 / s), cap);
  tr.t0 = t0;

  const Rhs f{field, v, x};
  State z = State::Zero();
  double t = t0;
  State k1 = f(t, z);
  double h = std::min(0.01 * std::abs(t0), 0.05 / s);
  double t_end = std::numeric_limits<double>::infinity();
  bool exited = false;
  double err_prev = 1e-4;

  tr.times_.push_back(t);
  tr.energy_start = energy(field, x + t * v + z.head<3>(), v + z.tail<3>());

  while (t < t_end) {
    if (tr.steps + tr.rejected > ctl.max_steps)
      throw NumericError("integrate_trajectory: step budget exhausted");
    if (t + h > t_end) h = t_end - t;
    if (h < 1e-14 * std::max(std::abs(t), 1.0 / s))
      throw NumericError("integrate_trajectory: step size underflow (near-singular dynamics)");
    const State k2 = f(t + c2 * h, z + h * a21 * k1);
    const State k3 = f(t + c3 * h, z + h * (a31 * k1 + a32 * k2));
    const State k4 = f(t + c4 * h, z + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const State k5 = f(t + c5 * h, z + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const State k6 = f(t + h, z + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const State z1 = z + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const State k7 = f(t + h, z1);
    const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = error_norm(err, z, z1, ctl.rtol, ctl.atol);
    if (!std::isfinite(en)) throw NumericError("integrate_trajectory: non-finite state");
    if (en <= 1.0) {
      Trajectory::Segment seg;
      seg.t = t;
      seg.h = h;
      const State dz = z1 - z;
      const State bspl = h * k1 - dz;
      seg.r[0] = z;
      seg.r[1] = dz;
      seg.r[2] = bspl;
      seg.r[3] = dz - h * k7 - bspl;
      seg.r[4] = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      tr.segments.push_back(seg);
      t += h;
      z = z1;
      k1 = k7;
      ++tr.steps;
      tr.times_.push_back(t);
      // PI step-size control
      const double fac = 0.9 * std::pow(std::max(en, 1e-10), -0.7 / 5) * std::pow(err_prev, 0.4 / 5);
      h *= std::clamp(fac, 0.2, 10.0);
      err_prev = std::max(en, 1e-4);
      if (!exited && t > 0) {
        const Vec pos = x + t * v + z.head<3>();
        const Vec vel = v + z.tail<3>();
        if ((pos.norm() >= L && pos.dot(vel) > 0) || t >= cap) {
          exited = true;
          tr.t_exit = t;
          t_end = std::min(t + ctl.tail_extension * (t - t0), std::max(cap, t));
        }
      }
    } else {
      ++tr.rejected;
      h *= std::max(0.2, 0.9 * std::pow(en, -1.0 / 5));
    }
  }
  tr.t1 = t;
  tr.energy_end = energy(field, x + t * v + z.head<3>(), v + z.tail<3>());
  return tr;
}

DeflectionState Trajectory::deflection(double t) const {
  if (segments.empty()) return {};
  if (t <= t0) {
    // free incoming asymptote
    return {};
  }
  if (t >= t1) {
    const Segment& s = segments.back();
    const Eigen::Matrix<double, 6, 1> z = s.r[0] + s.r[1];
    return {z.head<3>() + (t - t1) * z.tail<3>(), z.tail<3>()};
  }
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t k = std::size_t(it - times_.begin()) - 1;
  k = std::min(k, segments.size() - 1);
  const Segment& s = segments[k];
  const double th = (t - s.t) / s.h, th1 = 1 - th;
  const Eigen::Matrix<double, 6, 1> z = s.r[0] + th * (s.r[1] + th1 * (s.r[2] + th * (s.r[3] + th1 * s.r[4])));
  return {z.head<3>(), z.tail<3>()};
}

Vec Trajectory::position(double t) const { return x_minus + t * v_minus + deflection(t).y; }
Vec Trajectory::velocity(double t) const { return v_minus + deflection(t).u; }

double Trajectory::energy_drift() const {
  return std::abs(energy_end - energy_start) / std::abs(energy_start);
}

double max_deflection_angle(const Trajectory& traj) {
  const Vec vh = traj.v_minus.normalized();
  double m = 0;
  auto angle = [&](const Vec& w) {
    const double along = w.dot(vh);
    const double across = (w - along * vh).norm();
    return std::atan2(across, along);
  };
  const auto& ts = traj.times();
  for (std::size_t k = 0; k < ts.size(); ++k) {
    m = std::max(m, angle(traj.velocity(ts[k])));
    if (k + 1 < ts.size()) m = std::max(m, angle(traj.velocity(0.5 * (ts[k] + ts[k + 1]))));
  }
  return m;
}

ScatteringDatum scattering_datum(const Trajectory& tr, const IntegrationControls& ctl) {
  ScatteringDatum d;
  d.v_minus = tr.v_minus;
  d.x_minus = tr.x_minus;
  const double span = tr.t1 - tr.t0;
  const double ta = tr.t1 - ctl.fit_fraction * span;
  const int m = std::max(ctl.fit_points, 3);
  // least squares y(t) = a (t - tc) + c, centered for conditioning
  const double tc = 0.5 * (ta + tr.t1);
  std::vector<double> ts(m);
  std::vector<Vec> ys(m);
  double stt = 0;
  Vec sy = Vec::Zero(), sty = Vec::Zero();
  for (int i = 0; i < m; ++i) {
    ts[i] = ta + (tr.t1 - ta) * i / (m - 1);
    ys[i] = tr.deflection(ts[i]).y;
    const double dt = ts[i] - tc;
    stt += dt * dt;
    sy += ys[i];
    sty += dt * ys[i];
  }
  const Vec a = sty / stt;
  const Vec c = sy / m;
  double res = 0;
  for (int i = 0; i < m; ++i) res = std::max(res, (ys[i] - (a * (ts[i] - tc) + c)).norm());
  d.a_sc = a;
  d.b_sc = c - a * tc;
  d.v_plus = d.v_minus + d.a_sc;
  d.x_plus = d.x_minus + d.b_sc;
  d.fit_residual = res;
  d.energy_drift = tr.energy_drift();
  d.max_angle = max_deflection_angle(tr);
  if (res > ctl.fit_tolerance * (1 + d.b_sc.norm())) {
    d.flagged = true;
    d.flag_reason = "asymptote fit residual above tolerance";
  }
  if (d.energy_drift > 100 * ctl.rtol) {
    d.flagged = true;
    if (!d.flag_reason.empty()) d.flag_reason += "; ";
    d.flag_reason += "energy drift above 100x tolerance";
  }
  return d;
}

ScatteringDatum scattering_datum(const Field& field, const Vec& v_minus, const Vec& x_minus,
                                 const IntegrationControls& ctl) {
  return scattering_datum(integrate_trajectory(field, v_minus, x_minus, ctl), ctl);
}

ScatteringMap scattering_map(const Field& field, const Vec& v, const Vec& x, const IntegrationControls& ctl) {
  const double vn = v.norm();
  if (!(vn > 0)) throw DomainError("v_minus must be nonzero");
  const double c = v.dot(x) / (vn * vn);
  const Vec xp = x - c * v;
  const ScatteringDatum d = scattering_datum(field, v, xp, ctl);
  return {d.v_plus, d.x_plus + c * d.v_plus};
}

}  // namespace emscat
