#include "emscat/asymptotics.hpp"

#include <algorithm>
#include <cmath>

namespace emscat {

namespace {

struct LineData {
  LineGrid lg;
  std::vector<Vec> pos;
  std::vector<Vec> b;      // B theta
  std::vector<Vec> gradV;
  std::vector<Vec> c1;     // int_{-inf}^tau B theta
  std::vector<Vec> y;      // int_{-inf}^tau c1
  std::vector<Vec> bc1;    // B c1
};

LineData sample_line(const Field& field, const Line& line, const QuadratureControls& qc) {
  LineData d;
  d.lg = line_grid(field, line, qc);
  const auto& t = d.lg.grid.nodes();
  const std::size_t N = t.size();
  d.pos.resize(N);
  d.b.resize(N);
  d.gradV.resize(N);
  std::vector<Mat> B(N);
  for (std::size_t j = 0; j < N; ++j) {
    d.pos[j] = line.at(t[j]);
    B[j] = field.magnetic(d.pos[j]);
    d.b[j] = B[j] * line.theta;
    d.gradV[j] = field.potential_gradient(d.pos[j]);
  }
  d.c1 = d.lg.grid.cumulative_left(d.b);
  d.y = d.lg.grid.cumulative_left(d.c1);
  d.bc1.resize(N);
  for (std::size_t j = 0; j < N; ++j) d.bc1[j] = B[j] * d.c1[j];
  return d;
}

// sum_k theta_k grad B_ik(p) . y
Vec omega_integrand(const MagneticGradient& g, const Vec& theta, const Vec& y, int n) {
  Vec out = Vec::Zero();
  for (int i = 0; i < n; ++i) {
    double acc = 0;
    for (int k = 0; k < n; ++k) {
      if (theta[k] == 0) continue;
      double dot = 0;
      for (int l = 0; l < n; ++l) dot += g.d[l](i, k) * y[l];
      acc += theta[k] * dot;
    }
    out[i] = acc;
  }
  return out;
}

AsymptoticTerms limit_terms_once(const Field& field, const Line& line, const QuadratureControls& qc) {
  const LineData d = sample_line(field, line, qc);
  const PanelGrid& G = d.lg.grid;
  const std::size_t N = G.size();
  const int n = field.dimension();
  std::vector<Vec> om(N), mgv(N);
  for (std::size_t j = 0; j < N; ++j) {
    om[j] = omega_integrand(field.magnetic_gradient(d.pos[j]), line.theta, d.y[j], n);
    mgv[j] = -d.gradV[j];
  }
  AsymptoticTerms r;
  r.line = line;
  r.W11 = G.integral(d.b);
  r.W21 = G.split_double(d.b);
  r.xray_gradV = G.integral(d.gradV);
  r.magnetic_full = G.integral(d.bc1);
  r.omega1 = G.integral(om);
  r.split_minus_gradV = G.split_double(mgv);
  r.magnetic_split = G.split_double(d.bc1);
  r.omega2 = G.split_double(om);
  r.W12 = -r.xray_gradV + r.magnetic_full + r.omega1;
  r.W22 = r.split_minus_gradV + r.magnetic_split + r.omega2;
  r.tail_estimate = d.lg.tail_estimate;
  return r;
}

double max_diff(std::initializer_list<std::pair<Vec, Vec>> pairs, double& scale) {
  double m = 0;
  for (const auto& [a, b] : pairs) {
    m = std::max(m, (a - b).norm());
    scale = std::max(scale, a.norm());
  }
  return m;
}

QuadratureControls refined(const QuadratureControls& qc) {
  QuadratureControls f = qc;
  f.panel_width *= 0.5;
  return f;
}

FiniteEnergyTerms finite_once(const Field& field, const Vec& v, const Vec& x, const AsymptoticsOptions& opt,
                              const QuadratureControls& qc) {
  const double s = v.norm();
  const Line line = Line::make(v, x);
  const LineData d = sample_line(field, line, qc);
  const PanelGrid& G = d.lg.grid;
  const std::size_t N = G.size();
  const int n = field.dimension();
  const GaussLegendreRule& eps_rule = gauss_legendre(opt.epsilon_nodes);
  std::vector<Vec> om(N), mgv(N);
  for (std::size_t j = 0; j < N; ++j) {
    Vec acc = Vec::Zero();
    for (int e = 0; e < opt.epsilon_nodes; ++e) {
      const double eps = 0.5 * (eps_rule.nodes[e] + 1);
      const Vec p = d.pos[j] + (eps / s) * d.y[j];
      acc += 0.5 * eps_rule.weights[e] * omega_integrand(field.magnetic_gradient(p), line.theta, d.y[j], n);
    }
    om[j] = acc;
    mgv[j] = -d.gradV[j];
  }
  FiniteEnergyTerms r;
  r.s = s;
  r.line = line;
  const Vec W11 = G.integral(d.b), W21 = G.split_double(d.b);
  const Vec fullV = G.integral(mgv), splitV = G.split_double(mgv);
  r.omega3 = G.integral(om);
  r.omega4 = G.split_double(om);
  r.w1 = W11 + (fullV + G.integral(d.bc1) + r.omega3) / s;
  r.w2 = W21 / s + (splitV + G.split_double(d.bc1) + r.omega4) / (s * s);
  r.born1 = W11 + fullV / s;
  r.born2 = W21 / s + splitV / (s * s);
  return r;
}

}  // namespace

AsymptoticTerms limit_terms(const Field& field, const Line& line, const AsymptoticsOptions& opt) {
  if (!opt.estimate_error) return limit_terms_once(field, line, opt.quadrature);
  const AsymptoticTerms coarse = limit_terms_once(field, line, opt.quadrature);
  AsymptoticTerms fine = limit_terms_once(field, line, refined(opt.quadrature));
  double scale = 0;
  const double diff = max_diff({{fine.W11, coarse.W11}, {fine.W12, coarse.W12},
                                {fine.W21, coarse.W21}, {fine.W22, coarse.W22}},
                               scale);
  fine.error_estimate = std::max(diff, 1e-13 * (1 + scale));
  return fine;
}

VelocityLimits limit_terms_velocity(const Field& field, const Line& line, const AsymptoticsOptions& opt) {
  const AsymptoticTerms t = limit_terms(field, line, opt);
  return {t.W11, t.W12};
}

PositionLimits limit_terms_position(const Field& field, const Line& line, const AsymptoticsOptions& opt) {
  const AsymptoticTerms t = limit_terms(field, line, opt);
  return {t.W21, t.W22};
}

FiniteEnergyTerms finite_energy_terms(const Field& field, const Vec& v_minus, const Vec& x_minus,
                                      const AsymptoticsOptions& opt) {
  if (!(v_minus.norm() > 0)) throw DomainError("finite_energy_terms: v_minus must be nonzero");
  if (opt.epsilon_nodes < 2) throw ConfigError("finite_energy_terms: need at least 2 epsilon nodes");
  if (!opt.estimate_error) return finite_once(field, v_minus, x_minus, opt, opt.quadrature);
  const FiniteEnergyTerms coarse = finite_once(field, v_minus, x_minus, opt, opt.quadrature);
  FiniteEnergyTerms fine = finite_once(field, v_minus, x_minus, opt, refined(opt.quadrature));
  double scale = 0;
  const double diff = max_diff({{fine.w1, coarse.w1}, {fine.w2, coarse.w2},
                                {fine.born1, coarse.born1}, {fine.born2, coarse.born2}},
                               scale);
  fine.error_estimate = std::max(diff, 1e-13 * (1 + scale));
  return fine;
}

BornTerms born_leading(const Field& field, double s, const Line& line, const AsymptoticsOptions& opt) {
  if (!(s > 0)) throw DomainError("born_leading: s must be positive");
  const LineData d = sample_line(field, line, opt.quadrature);
  const PanelGrid& G = d.lg.grid;
  std::vector<Vec> mgv(d.gradV.size());
  for (std::size_t j = 0; j < mgv.size(); ++j) mgv[j] = -d.gradV[j];
  BornTerms r;
  r.s = s;
  r.line = line;
  r.w1 = G.integral(d.b) + G.integral(mgv) / s;
  r.w2 = G.split_double(d.b) / s + G.split_double(mgv) / (s * s);
  return r;
}

SymmetrizedBorn symmetrize(const BornTerms& plus, const BornTerms& minus) {
  if (plus.s != minus.s) throw DomainError("symmetrize: both orientations need the same s");
  const double s = plus.s;
  if ((plus.line.theta + minus.line.theta).norm() > 1e-12 || (plus.line.x - minus.line.x).norm() > 1e-12)
    throw DomainError("symmetrize: second input must be the reversed line");
  SymmetrizedBorn r;
  r.xray_gradV = -0.5 * s * (plus.w1 + minus.w1);
  r.magnetic_line = 0.5 * (plus.w1 - minus.w1);
  r.magnetic_split = 0.5 * s * (plus.w2 + minus.w2);
  r.split_minus_gradV = 0.5 * s * s * (plus.w2 - minus.w2);
  return r;
}

}  // namespace emscat
