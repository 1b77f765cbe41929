#include "emscat/line.hpp"

#include <algorithm>
#include <cmath>

namespace emscat {

Line Line::make(const Vec& theta, const Vec& x) {
  if (!theta.allFinite() || !x.allFinite()) throw DomainError("line with non-finite data");
  const double nt = theta.norm();
  if (!(nt > 0)) throw DomainError("line direction must be nonzero");
  Line l{theta / nt, x};
  if (std::abs(l.theta.dot(x)) > 1e-12 * (1 + x.norm()))
    throw DomainError("line offset must be perpendicular to its direction");
  return l;
}

Line Line::planar(double phi, double q) {
  const Vec th(std::cos(phi), std::sin(phi), 0);
  return {th, q * perp(th)};
}

LineGrid line_grid(const Field& field, const Line& line, const QuadratureControls& qc) {
  if (!(qc.panel_width > 0) || qc.order < 2 || !(qc.tail_ratio > 1))
    throw ConfigError("invalid quadrature controls");
  const double L = field.negligible_radius(qc.tail_tolerance);
  const double xn = line.x.norm();
  double half = L > xn ? std::sqrt(L * L - xn * xn) : 0.0;
  LineGrid out;
  const double core = std::min(half, qc.core_cap);
  const int np = std::max(1, int(std::ceil(core / qc.panel_width)));
  const double w = core > 0 ? core / np : qc.panel_width;
  std::vector<double> right;
  for (int k = 1; k <= np; ++k) right.push_back(k * w);
  double e = right.back();
  while (e < half) {
    e = std::min(half, e * qc.tail_ratio);
    right.push_back(e);
  }
  std::vector<double> edges;
  for (auto it = right.rbegin(); it != right.rend(); ++it) edges.push_back(-*it);
  edges.push_back(0.0);
  edges.insert(edges.end(), right.begin(), right.end());
  out.grid = PanelGrid(std::move(edges), qc.order);
  out.half_width = out.grid.upper();
  const auto sup = field.support_radius();
  out.tail_estimate = (sup && *sup <= std::hypot(out.half_width, xn)) ? 0.0
                                                                        : qc.tail_tolerance * out.half_width;
  return out;
}

}  // namespace emscat
