#include "emscat/profiles.hpp"

#include "emscat/core.hpp"

#include <algorithm>
#include <cmath>

namespace emscat {

GaussianProfile::GaussianProfile(double width) : inv_w2_(1.0 / (width * width)), width_(width) {
  if (!(width > 0)) throw ConfigError("gaussian profile: width must be positive");
}

ProfileValue GaussianProfile::eval(double s) const {
  const double e = std::exp(-s * inv_w2_);
  return {e, -inv_w2_ * e, inv_w2_ * inv_w2_ * e};
}

double GaussianProfile::extent() const { return width_ * std::sqrt(745.0); }

BumpProfile::BumpProfile(double radius) : radius_(radius), inv_r2_(1.0 / (radius * radius)) {
  if (!(radius > 0)) throw ConfigError("bump profile: radius must be positive");
}

ProfileValue BumpProfile::eval(double s) const {
  const double u = 1.0 - s * inv_r2_;
  if (u <= 0) return {};
  const double p = std::exp(-1.0 / u);
  if (p == 0) return {};
  const double u2 = u * u;
  const double d1 = -p * inv_r2_ / u2;
  const double d2 = p * (1.0 - 2.0 * u) * inv_r2_ * inv_r2_ / (u2 * u2);
  return {p, d1, d2};
}

TabulatedProfile::TabulatedProfile(double s_max, std::vector<double> f, std::vector<double> d1,
                                   std::vector<double> d2)
    : s_max_(s_max), f_(std::move(f)), d1_(std::move(d1)), d2_(std::move(d2)) {
  const std::size_t n = f_.size();
  if (n < 2 || d1_.size() != n || d2_.size() != n || !(s_max > 0))
    throw ConfigError("tabulated profile: need at least two nodes of (f, f', f'')");
  h_ = s_max_ / double(n - 1);
  coef_.resize(6 * (n - 1));
  for (std::size_t j = 0; j + 1 < n; ++j) {
    double* c = &coef_[6 * j];
    c[0] = f_[j];
    c[1] = h_ * d1_[j];
    c[2] = 0.5 * h_ * h_ * d2_[j];
    const double a = f_[j + 1] - (c[0] + c[1] + c[2]);
    const double b = h_ * d1_[j + 1] - (c[1] + 2 * c[2]);
    const double e = h_ * h_ * d2_[j + 1] - 2 * c[2];
    c[3] = 10 * a - 4 * b + 0.5 * e;
    c[4] = -15 * a + 7 * b - e;
    c[5] = 6 * a - 3 * b + 0.5 * e;
  }
  tail_.assign(n, 0.0);
  for (std::size_t j = n - 1; j-- > 0;) {
    const double* c = &coef_[6 * j];
    double cell = 0;
    for (int k = 0; k < 6; ++k) cell += c[k] / (k + 1);
    tail_[j] = tail_[j + 1] + h_ * cell;
  }
}

ProfileValue TabulatedProfile::eval(double s) const {
  if (s >= s_max_ || s < 0) return {};
  std::size_t j = std::min<std::size_t>(std::size_t(s / h_), f_.size() - 2);
  const double t = s / h_ - double(j);
  const double* c = &coef_[6 * j];
  const double v = c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
  const double dv = c[1] + t * (2 * c[2] + t * (3 * c[3] + t * (4 * c[4] + t * 5 * c[5])));
  const double ddv = 2 * c[2] + t * (6 * c[3] + t * (12 * c[4] + t * 20 * c[5]));
  return {v, dv / h_, ddv / (h_ * h_)};
}

double TabulatedProfile::extent() const { return std::sqrt(s_max_); }

double TabulatedProfile::tail_integral(double s) const {
  if (s >= s_max_) return 0;
  if (s < 0) s = 0;
  std::size_t j = std::min<std::size_t>(std::size_t(s / h_), f_.size() - 2);
  const double t = s / h_ - double(j);
  const double* c = &coef_[6 * j];
  // integral over [s, s_{j+1}] = cell total - integral over [s_j, s]
  double total = 0, head = 0, tp = t;
  for (int k = 0; k < 6; ++k) {
    total += c[k] / (k + 1);
    head += c[k] * tp / (k + 1);
    tp *= t;
  }
  return tail_[j + 1] + h_ * (total - head);
}

namespace {

double majorant_at(const RadialProfile& p, Majorant kind, double r) {
  const ProfileValue v = p.eval(r * r);
  switch (kind) {
    case Majorant::Value:
      return std::abs(v.value);
    case Majorant::Gradient:
      return 2 * std::abs(v.d1) * r;
    case Majorant::Hessian:
      return 2 * std::abs(v.d1) + 4 * std::abs(v.d2) * r * r;
  }
  return 0;
}

}  // namespace

double radial_majorant(const RadialProfile& p, Majorant kind, double offset, double power) {
  const double r_end = p.extent();
  const int samples = 20000;
  const double dr = r_end / samples;
  auto g = [&](double r) { return majorant_at(p, kind, r) * std::pow(1 + offset + r, power); };
  int best = 0;
  double best_val = -1;
  for (int i = 0; i <= samples; ++i) {
    const double val = g(i * dr);
    if (val > best_val) {
      best_val = val;
      best = i;
    }
  }
  double a = std::max(0.0, (best - 1) * dr), b = std::min(r_end, (best + 1) * dr);
  const double phi = 0.5 * (std::sqrt(5.0) - 1);
  double c = b - phi * (b - a), d = a + phi * (b - a);
  for (int it = 0; it < 60; ++it) {
    if (g(c) > g(d))
      b = d;
    else
      a = c;
    c = b - phi * (b - a);
    d = a + phi * (b - a);
  }
  return std::max(best_val, g(0.5 * (a + b)));
}

double radial_negligible_radius(const RadialProfile& p, double eps) {
  const double r_end = p.extent();
  const int samples = 400;
  const double dr = r_end / samples;
  auto m = [&](double r) {
    return std::max({majorant_at(p, Majorant::Value, r), majorant_at(p, Majorant::Gradient, r),
                     majorant_at(p, Majorant::Hessian, r)});
  };
  for (int i = samples; i >= 0; --i) {
    if (m(i * dr) < eps) continue;
    if (i == samples) return r_end;
    double a = i * dr, b = (i + 1) * dr;
    for (int it = 0; it < 50; ++it) {
      const double c = 0.5 * (a + b);
      (m(c) >= eps ? a : b) = c;
    }
    return b;
  }
  return 0;
}

}  // namespace emscat
