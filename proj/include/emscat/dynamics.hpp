#pragma once

#include "emscat/fields.hpp"

#include <array>
#include <string>
#include <vector>

namespace emscat {

struct IntegrationControls {
  double rtol = 1e-10;
  double atol = 1e-12;
  double start_epsilon = 1e-12;  // relative to beta_1; field treated as absent below it
  double tail_extension = 0.25;  // integrate this fraction of the span past the exit time
  double fit_fraction = 0.2;     // asymptote fit over the last part of the span
  int fit_points = 33;
  double fit_tolerance = 1e-9;   // relative to (1 + |b_sc|)
  double time_cap = 1e4;         // |t| <= time_cap (1 + |x_-|) / |v_-|
  long max_steps = 2'000'000;
};

// State in deflection coordinates: y = x(t) - v_- t - x_-, u = dy/dt.
struct DeflectionState {
  Vec y = Vec::Zero();
  Vec u = Vec::Zero();
};

// Trajectory of the Newton equation with Dormand-Prince 5(4) dense output.
class Trajectory {
 public:
  Vec v_minus = Vec::Zero();
  Vec x_minus = Vec::Zero();
  double t0 = 0, t1 = 0, t_exit = 0;
  double rtol = 0, atol = 0;
  double energy_start = 0, energy_end = 0;
  long steps = 0, rejected = 0;

  DeflectionState deflection(double t) const;
  Vec position(double t) const;
  Vec velocity(double t) const;
  // Accepted step times, t0 first and t1 last.
  const std::vector<double>& times() const { return times_; }
  double energy_drift() const;

  // Internal: one dense-output segment per accepted step.
  struct Segment {
    double t, h;
    std::array<Eigen::Matrix<double, 6, 1>, 5> r;
  };
  std::vector<Segment> segments;

 private:
  friend Trajectory integrate_trajectory(const Field&, const Vec&, const Vec&, const IntegrationControls&);
  std::vector<double> times_;
};

struct ScatteringDatum {
  Vec v_minus = Vec::Zero();
  Vec x_minus = Vec::Zero();
  Vec a_sc = Vec::Zero();
  Vec b_sc = Vec::Zero();
  Vec v_plus = Vec::Zero();
  Vec x_plus = Vec::Zero();
  double energy_drift = 0;
  double fit_residual = 0;
  double max_angle = 0;
  bool flagged = false;
  std::string flag_reason;
};

// x_minus is projected onto the complement of v_minus (error if the correction
// exceeds 1e-9 relative).
Trajectory integrate_trajectory(const Field& field, const Vec& v_minus, const Vec& x_minus,
                                const IntegrationControls& controls = {});
ScatteringDatum scattering_datum(const Field& field, const Vec& v_minus, const Vec& x_minus,
                                 const IntegrationControls& controls = {});
// Fits the outgoing asymptote of an existing trajectory.
ScatteringDatum scattering_datum(const Trajectory& traj, const IntegrationControls& controls = {});

double max_deflection_angle(const Trajectory& traj);

// (v_+, x_+) for arbitrary x (not necessarily perpendicular to v), using the
// time-shift covariance of the asymptotes.
struct ScatteringMap {
  Vec v_plus;
  Vec x_plus;
};
ScatteringMap scattering_map(const Field& field, const Vec& v, const Vec& x,
                             const IntegrationControls& controls = {});

// Projects x onto the complement of v; throws when the correction is large.
Vec project_offset(const Vec& v, const Vec& x);

}  // namespace emscat
