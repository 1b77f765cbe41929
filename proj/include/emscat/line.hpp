#pragma once

#include "emscat/core.hpp"
#include "emscat/fields.hpp"
#include "emscat/quadrature.hpp"

namespace emscat {

// Oriented line {tau theta + x} with |theta| = 1 and theta . x = 0.
struct Line {
  Vec theta = Vec(1, 0, 0);
  Vec x = Vec::Zero();

  // Normalizes theta; rejects offsets that are not perpendicular to it.
  static Line make(const Vec& theta, const Vec& x);
  // n = 2: theta = (cos phi, sin phi), x = q theta_perp with theta_perp = (sin phi, -cos phi).
  static Line planar(double phi, double q);
  Line reversed() const { return {-theta, x}; }
  Vec at(double tau) const { return tau * theta + x; }
};

// theta_perp for a planar direction.
inline Vec perp(const Vec& theta) { return Vec(theta[1], -theta[0], 0); }

struct QuadratureControls {
  double panel_width = 0.25;
  int order = 16;
  double tail_tolerance = 1e-14;  // field magnitude treated as zero beyond the core
  double core_cap = 60;           // longest uniformly paneled half-line
  double tail_ratio = 1.5;        // geometric growth of tail panels
};

struct LineGrid {
  PanelGrid grid;
  double half_width = 0;       // truncation radius along the line
  double tail_estimate = 0;    // heuristic size of the discarded tail
};

// Panels along the line parameter tau, with 0 as an edge, covering the part of
// the line where the field exceeds the tail tolerance.
LineGrid line_grid(const Field& field, const Line& line, const QuadratureControls& qc);

}  // namespace emscat
