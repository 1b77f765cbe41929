#include "emscat/grid_field.hpp"

#include <array>
#include <cmath>

namespace emscat {

namespace {

struct Weights {
  std::array<double, 4> w, d1, d2;
};

Weights catmull_rom(double t) {
  const double t2 = t * t, t3 = t2 * t;
  return {{0.5 * (-t3 + 2 * t2 - t), 0.5 * (3 * t3 - 5 * t2 + 2), 0.5 * (-3 * t3 + 4 * t2 + t), 0.5 * (t3 - t2)},
          {0.5 * (-3 * t2 + 4 * t - 1), 0.5 * (9 * t2 - 10 * t), 0.5 * (-9 * t2 + 8 * t + 1), 0.5 * (3 * t2 - 2 * t)},
          {-3 * t + 2, 9 * t - 5, -9 * t + 4, 3 * t - 1}};
}

struct Interpolated {
  double value = 0;
  Vec grad = Vec::Zero();
  Mat hess = Mat::Zero();
};

Interpolated interpolate(const GridFunction& g, int comp, const Vec& x, bool want_hessian) {
  const int n = g.dimension;
  const double h = g.h();
  std::array<int, 3> base{0, 0, 0};
  std::array<Weights, 3> W;
  for (int a = 0; a < n; ++a) {
    const double u = (x[a] - g.coord(0)) / h;
    if (u < -2 || u > g.N + 1) return {};
    const double fl = std::floor(u);
    base[a] = int(fl) - 1;
    W[a] = catmull_rom(u - fl);
  }
  Interpolated r;
  const int nz = n == 3 ? 4 : 1;
  for (int c = 0; c < nz; ++c) {
    const int iz = n == 3 ? base[2] + c : 0;
    if (iz < 0 || iz >= (n == 3 ? g.N : 1)) continue;
    for (int b = 0; b < 4; ++b) {
      const int iy = base[1] + b;
      if (iy < 0 || iy >= g.N) continue;
      for (int a = 0; a < 4; ++a) {
        const int ix = base[0] + a;
        if (ix < 0 || ix >= g.N) continue;
        const double v = g.at(g.index(ix, iy, iz), comp);
        if (v == 0) continue;
        const double wz = n == 3 ? W[2].w[c] : 1, dz = n == 3 ? W[2].d1[c] : 0;
        r.value += v * W[0].w[a] * W[1].w[b] * wz;
        r.grad[0] += v * W[0].d1[a] * W[1].w[b] * wz;
        r.grad[1] += v * W[0].w[a] * W[1].d1[b] * wz;
        if (n == 3) r.grad[2] += v * W[0].w[a] * W[1].w[b] * dz;
        if (want_hessian) {
          const double zz = n == 3 ? W[2].d2[c] : 0;
          r.hess(0, 0) += v * W[0].d2[a] * W[1].w[b] * wz;
          r.hess(1, 1) += v * W[0].w[a] * W[1].d2[b] * wz;
          r.hess(0, 1) += v * W[0].d1[a] * W[1].d1[b] * wz;
          if (n == 3) {
            r.hess(2, 2) += v * W[0].w[a] * W[1].w[b] * zz;
            r.hess(0, 2) += v * W[0].d1[a] * W[1].w[b] * dz;
            r.hess(1, 2) += v * W[0].w[a] * W[1].d1[b] * dz;
          }
        }
      }
    }
  }
  r.grad /= h;
  r.hess /= h * h;
  r.hess(1, 0) = r.hess(0, 1);
  r.hess(2, 0) = r.hess(0, 2);
  r.hess(2, 1) = r.hess(1, 2);
  return r;
}

constexpr int kPairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};

}  // namespace

GridField::GridField(std::optional<GridFunction> potential, std::optional<GridFunction> magnetic)
    : Field(potential ? potential->dimension : magnetic ? magnetic->dimension : 2),
      V_(std::move(potential)),
      B_(std::move(magnetic)) {
  if (V_ && V_->arity != 1) throw ConfigError("GridField: potential grid must be scalar");
  if (B_ && B_->arity != (n_ == 2 ? 1 : 3)) throw ConfigError("GridField: magnetic grid arity must be 1 (2-D) or 3 (3-D)");
  if (V_ && B_ && (V_->dimension != B_->dimension)) throw ConfigError("GridField: grid dimensions differ");
  for (const auto* g : {V_ ? &*V_ : nullptr, B_ ? &*B_ : nullptr})
    if (g) radius_ = std::max(radius_, (g->L + 2 * g->h()) * std::sqrt(double(n_)));

  // envelope from the interpolant at cell centres, alpha = 2
  Envelope e;
  const double al = e.alpha, margin = 1.1;
  auto scan = [&](const GridFunction& g, auto&& visit) {
    for (std::size_t c = 0; c < g.cells(); ++c) visit(g.point(c), 1 + g.point(c).norm());
  };
  if (V_)
    scan(*V_, [&](const Vec& x, double w) {
      const Interpolated r = interpolate(*V_, 0, x, true);
      e.beta0 = std::max(e.beta0, margin * std::abs(r.value) * std::pow(w, al));
      e.beta1 = std::max(e.beta1, margin * r.grad.norm() * std::pow(w, al + 1));
      e.beta2 = std::max(e.beta2, margin * r.hess.norm() * std::pow(w, al + 2));
    });
  if (B_)
    scan(*B_, [&](const Vec& x, double w) {
      for (int c = 0; c < B_->arity; ++c) {
        const Interpolated r = interpolate(*B_, c, x, false);
        e.beta1 = std::max(e.beta1, margin * std::abs(r.value) * std::pow(w, al + 1));
        e.beta2 = std::max(e.beta2, margin * r.grad.norm() * std::pow(w, al + 2));
      }
    });
  envelope_ = e;
}

double GridField::potential(const Vec& x) const { return V_ ? interpolate(*V_, 0, x, false).value : 0.0; }

Vec GridField::potential_gradient(const Vec& x) const {
  return V_ ? interpolate(*V_, 0, x, false).grad : Vec::Zero();
}

Mat GridField::potential_hessian(const Vec& x) const {
  return V_ ? interpolate(*V_, 0, x, true).hess : Mat::Zero();
}

Mat GridField::magnetic(const Vec& x) const {
  Mat B = Mat::Zero();
  if (!B_) return B;
  for (int p = 0; p < B_->arity; ++p) {
    const double v = interpolate(*B_, p, x, false).value;
    B(kPairs[p][0], kPairs[p][1]) = v;
    B(kPairs[p][1], kPairs[p][0]) = -v;
  }
  return B;
}

MagneticGradient GridField::magnetic_gradient(const Vec& x) const {
  MagneticGradient g;
  if (!B_) return g;
  for (int p = 0; p < B_->arity; ++p) {
    const Vec d = interpolate(*B_, p, x, false).grad;
    for (int l = 0; l < 3; ++l) {
      g.d[l](kPairs[p][0], kPairs[p][1]) = d[l];
      g.d[l](kPairs[p][1], kPairs[p][0]) = -d[l];
    }
  }
  return g;
}

double GridField::negligible_radius(double) const { return radius_; }

}  // namespace emscat
