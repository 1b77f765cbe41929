#pragma once

#include "emscat/core.hpp"
#include "emscat/profiles.hpp"

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace emscat {

// |d^j V| <= beta_|j| (1+|x|)^(-alpha-|j|),  |d^j B| <= beta_(|j|+1) (1+|x|)^(-alpha-1-|j|)
struct Envelope {
  double alpha = 2.0;
  double beta0 = 0;
  double beta1 = 0;
  double beta2 = 0;
};

// d[l](i,k) = dB_ik / dx_l
struct MagneticGradient {
  std::array<Mat, 3> d{Mat::Zero(), Mat::Zero(), Mat::Zero()};
  Vec grad(int i, int k) const { return {d[0](i, k), d[1](i, k), d[2](i, k)}; }
};

struct FieldSample {
  Vec x = Vec::Zero();
  double V = 0;
  Vec gradV = Vec::Zero();
  Mat hessV = Mat::Zero();
  Mat B = Mat::Zero();
  MagneticGradient gradB;
};

class Field {
 public:
  explicit Field(int dimension, Envelope envelope = {});
  virtual ~Field() = default;

  int dimension() const { return n_; }
  const Envelope& envelope() const { return envelope_; }

  virtual double potential(const Vec& x) const = 0;
  virtual Vec potential_gradient(const Vec& x) const = 0;
  virtual Mat potential_hessian(const Vec& x) const = 0;
  virtual Mat magnetic(const Vec& x) const = 0;
  virtual MagneticGradient magnetic_gradient(const Vec& x) const = 0;

  // -grad V(x) + B(x) v, without the input validation of force().
  virtual Vec force_unchecked(const Vec& x, const Vec& v) const;

  // Radius beyond which V, B and their first two derivatives stay below eps.
  // The default follows the power-law envelope.
  virtual double negligible_radius(double eps) const;
  virtual std::optional<double> support_radius() const { return std::nullopt; }

 protected:
  int n_;
  Envelope envelope_;
};

using FieldPtr = std::shared_ptr<const Field>;

FieldSample eval_field(const Field& field, const Vec& x);
Vec force(const Field& field, const Vec& x, const Vec& v);
double energy(const Field& field, const Vec& x, const Vec& v);

struct ClosureReport {
  double max_residual = 0;
  Vec worst_point = Vec::Zero();
  std::array<int, 3> worst_indices{0, 0, 0};
  double tolerance = 1e-10;
  bool pass = true;
};
ClosureReport check_closure(const Field& field, std::span<const Vec> points, double tolerance = 1e-10);

struct DecayReport {
  Envelope observed;
  Envelope declared;
  bool pass = true;
  std::string worst_quantity;
  Vec worst_point = Vec::Zero();
  double worst_ratio = 0;  // observed / declared at the worst point
};
DecayReport estimate_decay(const Field& field, double alpha, double radius, int grid_density);

// p(|x-c|^2) scaled by an amplitude.
struct RadialTerm {
  std::shared_ptr<const RadialProfile> profile;
  Vec center = Vec::Zero();
  double amplitude = 1.0;
};

// Vector potential A(x) = a p(|x-c|^2); contributes B_ik = d_i A_k - d_k A_i.
struct VectorPotentialTerm {
  std::shared_ptr<const RadialProfile> profile;
  Vec center = Vec::Zero();
  Vec amplitude = Vec::Zero();
};

// Sums of radial potential terms, planar radial B_12 terms (n = 2 only) and
// vector-potential terms. All derivatives are analytic.
class CompositeField final : public Field {
 public:
  CompositeField(int dimension, std::vector<RadialTerm> potential,
                 std::vector<RadialTerm> planar_magnetic,
                 std::vector<VectorPotentialTerm> vector_potential,
                 std::optional<Envelope> declared = std::nullopt);

  double potential(const Vec& x) const override;
  Vec potential_gradient(const Vec& x) const override;
  Mat potential_hessian(const Vec& x) const override;
  Mat magnetic(const Vec& x) const override;
  MagneticGradient magnetic_gradient(const Vec& x) const override;
  Vec force_unchecked(const Vec& x, const Vec& v) const override;
  double negligible_radius(double eps) const override;
  std::optional<double> support_radius() const override;

  // Envelope majorized term by term from the radial profiles.
  Envelope analytic_envelope(double alpha) const;

 private:
  std::vector<RadialTerm> potential_;
  std::vector<RadialTerm> planar_;
  std::vector<VectorPotentialTerm> vector_;
};

// Wraps another field, scaling V by pv and B by pb, optionally replacing the envelope.
class ScaledField final : public Field {
 public:
  ScaledField(FieldPtr base, double potential_scale, double magnetic_scale,
              std::optional<Envelope> envelope = std::nullopt);

  double potential(const Vec& x) const override;
  Vec potential_gradient(const Vec& x) const override;
  Mat potential_hessian(const Vec& x) const override;
  Mat magnetic(const Vec& x) const override;
  MagneticGradient magnetic_gradient(const Vec& x) const override;
  Vec force_unchecked(const Vec& x, const Vec& v) const override;
  double negligible_radius(double eps) const override;
  std::optional<double> support_radius() const override { return base_->support_radius(); }

 private:
  FieldPtr base_;
  double pv_, pb_;
};

// Built-in families.
FieldPtr zero_field(int dimension);
// V = a_V exp(-|x|^2/w^2), B_12 = a_B exp(-|x|^2/w^2)  (n = 2)
FieldPtr gaussian_field(double potential_amplitude, double magnetic_amplitude, double width = 1.0);
// The reference field: V = exp(-|x|^2), B_12 = exp(-|x|^2).
FieldPtr field_a();
// Bump profiles exp(-1/(1-|x|^2/rho^2)) for V and B_12 (n = 2).
FieldPtr bump_field(double potential_amplitude, double magnetic_amplitude, double radius = 1.0);
// n = 3: Gaussian V plus B from a sum of Gaussian vector-potential terms.
FieldPtr potential3d_field(double potential_amplitude, std::vector<VectorPotentialTerm> terms);
// A fixed three-term vector potential used as the default n = 3 example.
FieldPtr default_potential3d_field();

}  // namespace emscat
