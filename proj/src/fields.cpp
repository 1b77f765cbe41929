#include "emscat/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace emscat {

Field::Field(int dimension, Envelope envelope) : n_(dimension), envelope_(envelope) {
  if (dimension != 2 && dimension != 3) throw ConfigError("field dimension must be 2 or 3");
  if (!(envelope.alpha > 1)) throw ConfigError("decay exponent alpha must exceed 1");
}

Vec Field::force_unchecked(const Vec& x, const Vec& v) const {
  return -potential_gradient(x) + magnetic(x) * v;
}

double Field::negligible_radius(double eps) const {
  const double b = std::max({envelope_.beta0, envelope_.beta1, envelope_.beta2});
  if (b <= 0) return 0;
  return std::max(0.0, std::pow(b / eps, 1.0 / envelope_.alpha) - 1.0);
}

namespace {

void require_finite(const Vec& x, const char* what) {
  if (!x.allFinite()) throw DomainError(std::string(what) + " has non-finite coordinates");
}

}  // namespace

FieldSample eval_field(const Field& field, const Vec& x) {
  require_finite(x, "field evaluation point");
  FieldSample s;
  s.x = x;
  s.V = field.potential(x);
  s.gradV = field.potential_gradient(x);
  s.hessV = field.potential_hessian(x);
  s.B = field.magnetic(x);
  s.gradB = field.magnetic_gradient(x);
  return s;
}

Vec force(const Field& field, const Vec& x, const Vec& v) {
  require_finite(x, "position");
  require_finite(v, "velocity");
  return field.force_unchecked(x, v);
}

double energy(const Field& field, const Vec& x, const Vec& v) {
  return 0.5 * v.squaredNorm() + field.potential(x);
}

ClosureReport check_closure(const Field& field, std::span<const Vec> points, double tolerance) {
  if (points.empty()) throw DomainError("check_closure: empty sample set");
  ClosureReport rep;
  rep.tolerance = tolerance;
  const int n = field.dimension();
  for (const Vec& x : points) {
    const MagneticGradient g = field.magnetic_gradient(x);
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
          const double r = std::abs(g.d[l](i, k) + g.d[k](l, i) + g.d[i](k, l));
          if (r > rep.max_residual) {
            rep.max_residual = r;
            rep.worst_point = x;
            rep.worst_indices = {l, i, k};
          }
        }
  }
  rep.pass = rep.max_residual <= tolerance;
  return rep;
}

DecayReport estimate_decay(const Field& field, double alpha, double radius, int grid_density) {
  if (!(alpha > 1)) throw DomainError("estimate_decay: alpha must exceed 1");
  if (!(radius > 0) || grid_density < 2) throw DomainError("estimate_decay: bad sampling grid");
  const int n = field.dimension();
  DecayReport rep;
  rep.declared = field.envelope();
  rep.observed.alpha = alpha;
  const double h = 2 * radius / (grid_density - 1);
  const int nz = n == 3 ? grid_density : 1;
  const std::array<double*, 3> obs{&rep.observed.beta0, &rep.observed.beta1, &rep.observed.beta2};
  const std::array<double, 3> decl{rep.declared.beta0, rep.declared.beta1, rep.declared.beta2};
  const char* names[3] = {"beta0", "beta1", "beta2"};
  for (int iz = 0; iz < nz; ++iz)
    for (int iy = 0; iy < grid_density; ++iy)
      for (int ix = 0; ix < grid_density; ++ix) {
        Vec x(-radius + ix * h, -radius + iy * h, n == 3 ? -radius + iz * h : 0.0);
        const FieldSample s = eval_field(field, x);
        const double w = 1 + x.norm();
        std::array<double, 3> m{};
        m[0] = std::abs(s.V);
        m[1] = std::max(s.gradV.head(n).cwiseAbs().maxCoeff(), s.B.cwiseAbs().maxCoeff());
        double g2 = s.hessV.cwiseAbs().maxCoeff();
        for (int l = 0; l < n; ++l) g2 = std::max(g2, s.gradB.d[l].cwiseAbs().maxCoeff());
        m[2] = g2;
        for (int k = 0; k < 3; ++k) {
          const double val = m[k] * std::pow(w, alpha + k);
          *obs[k] = std::max(*obs[k], val);
          const double ratio = decl[k] > 0 ? val / decl[k] : (val > 0 ? HUGE_VAL : 0.0);
          if (ratio > rep.worst_ratio) {
            rep.worst_ratio = ratio;
            rep.worst_point = x;
            rep.worst_quantity = names[k];
          }
        }
      }
  rep.pass = rep.worst_ratio <= 1.0 && std::abs(alpha - rep.declared.alpha) < 1e-12;
  return rep;
}

// ---------------------------------------------------------------------------

CompositeField::CompositeField(int dimension, std::vector<RadialTerm> potential,
                               std::vector<RadialTerm> planar_magnetic,
                               std::vector<VectorPotentialTerm> vector_potential,
                               std::optional<Envelope> declared)
    : Field(dimension, declared.value_or(Envelope{})),
      potential_(std::move(potential)),
      planar_(std::move(planar_magnetic)),
      vector_(std::move(vector_potential)) {
  if (!planar_.empty() && dimension != 2)
    throw ConfigError("planar B_12 terms are only defined for n = 2");
  auto check = [&](const Vec& c, const std::shared_ptr<const RadialProfile>& p) {
    if (!p) throw ConfigError("field term without a profile");
    if (!c.allFinite() || (dimension == 2 && c[2] != 0))
      throw ConfigError("field term center must be finite and lie in the plane for n = 2");
  };
  for (auto& t : potential_) check(t.center, t.profile);
  for (auto& t : planar_) check(t.center, t.profile);
  for (auto& t : vector_) {
    check(t.center, t.profile);
    if (dimension == 2 && t.amplitude[2] != 0)
      throw ConfigError("vector potential must be planar for n = 2");
  }
  if (!declared) envelope_ = analytic_envelope(2.0);
}

double CompositeField::potential(const Vec& x) const {
  double v = 0;
  for (const auto& t : potential_) v += t.amplitude * t.profile->eval((x - t.center).squaredNorm()).value;
  return v;
}

Vec CompositeField::potential_gradient(const Vec& x) const {
  Vec g = Vec::Zero();
  for (const auto& t : potential_) {
    const Vec d = x - t.center;
    g += (2 * t.amplitude * t.profile->eval(d.squaredNorm()).d1) * d;
  }
  return g;
}

Mat CompositeField::potential_hessian(const Vec& x) const {
  Mat h = Mat::Zero();
  for (const auto& t : potential_) {
    const Vec d = x - t.center;
    const ProfileValue p = t.profile->eval(d.squaredNorm());
    h += t.amplitude * (2 * p.d1 * Mat::Identity() + 4 * p.d2 * d * d.transpose());
  }
  if (n_ == 2) h(2, 2) = 0;
  return h;
}

Mat CompositeField::magnetic(const Vec& x) const {
  Mat b = Mat::Zero();
  for (const auto& t : planar_) {
    const double v = t.amplitude * t.profile->eval((x - t.center).squaredNorm()).value;
    b(0, 1) += v;
    b(1, 0) -= v;
  }
  for (const auto& t : vector_) {
    const Vec d = x - t.center;
    const double p1 = t.profile->eval(d.squaredNorm()).d1;
    const Mat m = 2 * p1 * (d * t.amplitude.transpose() - t.amplitude * d.transpose());
    b += m;
  }
  return b;
}

MagneticGradient CompositeField::magnetic_gradient(const Vec& x) const {
  MagneticGradient g;
  for (const auto& t : planar_) {
    const Vec d = x - t.center;
    const double p1 = t.profile->eval(d.squaredNorm()).d1;
    for (int l = 0; l < 2; ++l) {
      const double v = 2 * t.amplitude * p1 * d[l];
      g.d[l](0, 1) += v;
      g.d[l](1, 0) -= v;
    }
  }
  for (const auto& t : vector_) {
    const Vec d = x - t.center;
    const ProfileValue p = t.profile->eval(d.squaredNorm());
    const Vec& a = t.amplitude;
    const Mat core = d * a.transpose() - a * d.transpose();
    for (int l = 0; l < n_; ++l) {
      Mat e = 4 * p.d2 * d[l] * core;
      // 2 p' (delta_il a_k - a_i delta_kl)
      for (int k = 0; k < 3; ++k) e(l, k) += 2 * p.d1 * a[k];
      for (int i = 0; i < 3; ++i) e(i, l) -= 2 * p.d1 * a[i];
      g.d[l] += e;
    }
  }
  return g;
}

Vec CompositeField::force_unchecked(const Vec& x, const Vec& v) const {
  Vec f = Vec::Zero();
  for (const auto& t : potential_) {
    const Vec d = x - t.center;
    f -= (2 * t.amplitude * t.profile->eval(d.squaredNorm()).d1) * d;
  }
  for (const auto& t : planar_) {
    const double b = t.amplitude * t.profile->eval((x - t.center).squaredNorm()).value;
    f[0] += b * v[1];
    f[1] -= b * v[0];
  }
  for (const auto& t : vector_) {
    const Vec d = x - t.center;
    const double p1 = t.profile->eval(d.squaredNorm()).d1;
    // (d a^T - a d^T) v
    f += 2 * p1 * (d * t.amplitude.dot(v) - t.amplitude * d.dot(v));
  }
  return f;
}

double CompositeField::negligible_radius(double eps) const {
  double r = 0;
  for (const auto& t : potential_) {
    if (t.amplitude == 0) continue;
    r = std::max(r, t.center.norm() + radial_negligible_radius(*t.profile, eps / std::abs(t.amplitude)));
  }
  for (const auto& t : planar_) {
    if (t.amplitude == 0) continue;
    r = std::max(r, t.center.norm() + radial_negligible_radius(*t.profile, eps / std::abs(t.amplitude)));
  }
  for (const auto& t : vector_) {
    const double a = 2 * t.amplitude.cwiseAbs().maxCoeff();
    if (a == 0) continue;
    r = std::max(r, t.center.norm() + radial_negligible_radius(*t.profile, eps / a));
  }
  return r;
}

std::optional<double> CompositeField::support_radius() const {
  double r = 0;
  auto add = [&](const Vec& c, const RadialProfile& p) -> bool {
    if (!p.compact()) return false;
    r = std::max(r, c.norm() + p.extent());
    return true;
  };
  for (const auto& t : potential_)
    if (!add(t.center, *t.profile)) return std::nullopt;
  for (const auto& t : planar_)
    if (!add(t.center, *t.profile)) return std::nullopt;
  for (const auto& t : vector_)
    if (!add(t.center, *t.profile)) return std::nullopt;
  return r;
}

Envelope CompositeField::analytic_envelope(double alpha) const {
  Envelope e;
  e.alpha = alpha;
  double b1v = 0, b2v = 0, b1b = 0, b2b = 0;
  for (const auto& t : potential_) {
    const double a = std::abs(t.amplitude), c = t.center.norm();
    e.beta0 += a * radial_majorant(*t.profile, Majorant::Value, c, alpha);
    b1v += a * radial_majorant(*t.profile, Majorant::Gradient, c, alpha + 1);
    b2v += a * radial_majorant(*t.profile, Majorant::Hessian, c, alpha + 2);
  }
  for (const auto& t : planar_) {
    const double a = std::abs(t.amplitude), c = t.center.norm();
    b1b += a * radial_majorant(*t.profile, Majorant::Value, c, alpha + 1);
    b2b += a * radial_majorant(*t.profile, Majorant::Gradient, c, alpha + 2);
  }
  for (const auto& t : vector_) {
    double m = 0;
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k)
        if (i != k) m = std::max(m, std::abs(t.amplitude[i]) + std::abs(t.amplitude[k]));
    const double c = t.center.norm();
    b1b += m * radial_majorant(*t.profile, Majorant::Gradient, c, alpha + 1);
    b2b += m * radial_majorant(*t.profile, Majorant::Hessian, c, alpha + 2);
  }
  // the sampled sup is refined to ~1e-10 relative; keep a small margin
  const double margin = 1 + 1e-6;
  e.beta0 *= margin;
  e.beta1 = margin * std::max(b1v, b1b);
  e.beta2 = margin * std::max(b2v, b2b);
  return e;
}

// ---------------------------------------------------------------------------

namespace {

Envelope scaled_envelope(const Envelope& e, double pv, double pb) {
  const double m = std::max(std::abs(pv), std::abs(pb));
  return {e.alpha, e.beta0 * std::abs(pv), e.beta1 * m, e.beta2 * m};
}

}  // namespace

ScaledField::ScaledField(FieldPtr base, double potential_scale, double magnetic_scale,
                         std::optional<Envelope> envelope)
    : Field(base->dimension(),
            envelope.value_or(scaled_envelope(base->envelope(), potential_scale, magnetic_scale))),
      base_(std::move(base)),
      pv_(potential_scale),
      pb_(magnetic_scale) {}

double ScaledField::potential(const Vec& x) const { return pv_ == 0 ? 0.0 : pv_ * base_->potential(x); }
Vec ScaledField::potential_gradient(const Vec& x) const {
  return pv_ == 0 ? Vec(Vec::Zero()) : Vec(pv_ * base_->potential_gradient(x));
}
Mat ScaledField::potential_hessian(const Vec& x) const {
  return pv_ == 0 ? Mat(Mat::Zero()) : Mat(pv_ * base_->potential_hessian(x));
}
Mat ScaledField::magnetic(const Vec& x) const {
  return pb_ == 0 ? Mat(Mat::Zero()) : Mat(pb_ * base_->magnetic(x));
}
MagneticGradient ScaledField::magnetic_gradient(const Vec& x) const {
  MagneticGradient g;
  if (pb_ == 0) return g;
  g = base_->magnetic_gradient(x);
  for (auto& m : g.d) m *= pb_;
  return g;
}
Vec ScaledField::force_unchecked(const Vec& x, const Vec& v) const {
  Vec f = Vec::Zero();
  if (pv_ != 0) f -= pv_ * base_->potential_gradient(x);
  if (pb_ != 0) f += pb_ * (base_->magnetic(x) * v);
  return f;
}
double ScaledField::negligible_radius(double eps) const {
  const double m = std::max(std::abs(pv_), std::abs(pb_));
  return m == 0 ? 0.0 : base_->negligible_radius(eps / m);
}

// ---------------------------------------------------------------------------

FieldPtr zero_field(int dimension) {
  return std::make_shared<CompositeField>(dimension, std::vector<RadialTerm>{},
                                          std::vector<RadialTerm>{},
                                          std::vector<VectorPotentialTerm>{});
}

FieldPtr gaussian_field(double potential_amplitude, double magnetic_amplitude, double width) {
  auto p = std::make_shared<GaussianProfile>(width);
  std::vector<RadialTerm> v, b;
  if (potential_amplitude != 0) v.push_back({p, Vec::Zero(), potential_amplitude});
  if (magnetic_amplitude != 0) b.push_back({p, Vec::Zero(), magnetic_amplitude});
  return std::make_shared<CompositeField>(2, std::move(v), std::move(b),
                                          std::vector<VectorPotentialTerm>{});
}

FieldPtr field_a() { return gaussian_field(1.0, 1.0, 1.0); }

FieldPtr bump_field(double potential_amplitude, double magnetic_amplitude, double radius) {
  auto p = std::make_shared<BumpProfile>(radius);
  std::vector<RadialTerm> v, b;
  if (potential_amplitude != 0) v.push_back({p, Vec::Zero(), potential_amplitude});
  if (magnetic_amplitude != 0) b.push_back({p, Vec::Zero(), magnetic_amplitude});
  return std::make_shared<CompositeField>(2, std::move(v), std::move(b),
                                          std::vector<VectorPotentialTerm>{});
}

FieldPtr potential3d_field(double potential_amplitude, std::vector<VectorPotentialTerm> terms) {
  std::vector<RadialTerm> v;
  if (potential_amplitude != 0)
    v.push_back({std::make_shared<GaussianProfile>(1.0), Vec::Zero(), potential_amplitude});
  return std::make_shared<CompositeField>(3, std::move(v), std::vector<RadialTerm>{},
                                          std::move(terms));
}

FieldPtr default_potential3d_field() {
  auto g = std::make_shared<GaussianProfile>(1.0);
  std::vector<VectorPotentialTerm> terms{
      {g, Vec(0, 0, 0), Vec(0, 0, 1)},
      {g, Vec(0, 0.5, 0), Vec(1, 0, 0)},
      {std::make_shared<GaussianProfile>(0.8), Vec(0.3, 0, -0.4), Vec(0, 0.7, 0)},
  };
  return potential3d_field(1.0, std::move(terms));
}

}  // namespace emscat
