#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's quadrature or integrators.

#include "emscat/fields.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using emscat::Vec;

// Adaptive Simpson on [a, b] for a vector-valued integrand.
inline Vec simpson_rec(const std::function<Vec(double)>& f, double a, double b, const Vec& fa, const Vec& fm,
                       const Vec& fb, const Vec& whole, double tol, int depth) {
  const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const Vec flm = f(lm), frm = f(rm);
  const Vec left = (m - a) / 6 * (fa + 4 * flm + fm);
  const Vec right = (b - m) / 6 * (fm + 4 * frm + fb);
  const Vec delta = left + right - whole;
  if (depth <= 0 || delta.cwiseAbs().maxCoeff() <= 15 * tol) return left + right + delta / 15;
  return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

// Integral over [a, b], cut into `pieces` equal parts first so narrow features are seen.
inline Vec simpson(const std::function<Vec(double)>& f, double a, double b, double tol = 1e-13, int pieces = 64) {
  Vec acc = Vec::Zero();
  const double w = (b - a) / pieces;
  for (int p = 0; p < pieces; ++p) {
    const double lo = a + p * w, hi = lo + w, m = 0.5 * (lo + hi);
    const Vec fa = f(lo), fm = f(m), fb = f(hi);
    acc += simpson_rec(f, lo, hi, fa, fm, fb, w / 6 * (fa + 4 * fm + fb), tol / pieces, 40);
  }
  return acc;
}

inline double simpson_scalar(const std::function<double(double)>& f, double a, double b, double tol = 1e-13,
                             int pieces = 64) {
  return simpson([&](double t) { return Vec(f(t), 0, 0); }, a, b, tol, pieces)[0];
}

// Classical fixed-step RK4 for x'' = -grad V(x) + B(x) x'. Returns (x, v) at t1.
struct State {
  Vec x, v;
};
inline State rk4(const emscat::Field& field, Vec x, Vec v, double t0, double t1, long steps) {
  const double h = (t1 - t0) / steps;
  auto acc = [&](const Vec& p, const Vec& u) { return Vec(-field.potential_gradient(p) + field.magnetic(p) * u); };
  for (long k = 0; k < steps; ++k) {
    const Vec k1x = v, k1v = acc(x, v);
    const Vec k2x = v + 0.5 * h * k1v, k2v = acc(x + 0.5 * h * k1x, v + 0.5 * h * k1v);
    const Vec k3x = v + 0.5 * h * k2v, k3v = acc(x + 0.5 * h * k2x, v + 0.5 * h * k2v);
    const Vec k4x = v + h * k3v, k4v = acc(x + h * k3x, v + h * k3v);
    x += h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
    v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
  }
  return {x, v};
}

// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle
