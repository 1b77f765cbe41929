#include "emscat/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace emscat {

namespace {

// Legendre P_0..P_m at x.
std::vector<double> legendre_all(int m, double x) {
  std::vector<double> p(m + 1);
  p[0] = 1;
  if (m >= 1) p[1] = x;
  for (int k = 1; k < m; ++k) p[k + 1] = ((2 * k + 1) * x * p[k] - k * p[k - 1]) / (k + 1);
  return p;
}

std::unique_ptr<GaussLegendreRule> build_rule(int m) {
  auto r = std::make_unique<GaussLegendreRule>();
  r->nodes.resize(m);
  r->weights.resize(m);
  for (int i = 0; i < m; ++i) {
    double x = -std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto p = legendre_all(m, x);
      const double dp = m * (x * p[m] - p[m - 1]) / (x * x - 1);
      const double dx = p[m] / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto p = legendre_all(m, x);
    const double dp = m * (x * p[m] - p[m - 1]) / (x * x - 1);
    r->nodes[i] = x;
    r->weights[i] = 2.0 / ((1 - x * x) * dp * dp);
  }
  // Lagrange basis in Legendre coefficients: l_j = sum_n c_jn P_n with
  // c_jn = w_j P_n(x_j) (2n+1)/2, exact by discrete orthogonality.
  r->left.resize(m, m);
  r->right.resize(m, m);
  std::vector<std::vector<double>> pn(m);
  for (int j = 0; j < m; ++j) pn[j] = legendre_all(m, r->nodes[j]);
  for (int i = 0; i < m; ++i) {
    const double x = r->nodes[i];
    const auto p = legendre_all(m, x);
    // I_n(x) = int_{-1}^x P_n
    std::vector<double> I(m);
    I[0] = x + 1;
    for (int n = 1; n < m; ++n) I[n] = (p[n + 1] - p[n - 1]) / (2 * n + 1);
    for (int j = 0; j < m; ++j) {
      double s = 0;
      for (int n = 0; n < m; ++n) s += r->weights[j] * pn[j][n] * (2 * n + 1) / 2.0 * I[n];
      r->left(i, j) = s;
      r->right(i, j) = r->weights[j] - s;
    }
  }
  r->barycentric.resize(m);
  for (int j = 0; j < m; ++j) {
    double prod = 1;
    for (int k = 0; k < m; ++k)
      if (k != j) prod *= r->nodes[j] - r->nodes[k];
    r->barycentric[j] = 1.0 / prod;
  }
  return r;
}

}  // namespace

const GaussLegendreRule& gauss_legendre(int order) {
  if (order < 2 || order > 64) throw ConfigError("Gauss-Legendre order must be in [2, 64]");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussLegendreRule>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[order];
  if (!slot) slot = build_rule(order);
  return *slot;
}

PanelGrid::PanelGrid(std::vector<double> edges, int order)
    : m_(order), edges_(std::move(edges)), rule_(&gauss_legendre(order)) {
  if (edges_.size() < 2) throw ConfigError("panel grid needs at least one panel");
  for (std::size_t p = 0; p + 1 < edges_.size(); ++p)
    if (!(edges_[p + 1] > edges_[p])) throw ConfigError("panel edges must be strictly increasing");
  nodes_.reserve(panels() * m_);
  weights_.reserve(panels() * m_);
  for (std::size_t p = 0; p + 1 < edges_.size(); ++p) {
    const double a = edges_[p], b = edges_[p + 1], half = 0.5 * (b - a);
    for (int i = 0; i < m_; ++i) {
      nodes_.push_back(a + half * (rule_->nodes[i] + 1));
      weights_.push_back(half * rule_->weights[i]);
    }
  }
}

PanelGrid PanelGrid::scaled(double c) const {
  std::vector<double> e(edges_);
  for (double& x : e) x *= c;
  return PanelGrid(std::move(e), m_);
}

std::size_t PanelGrid::zero_edge() const {
  auto it = std::find(edges_.begin(), edges_.end(), 0.0);
  if (it == edges_.end()) throw DomainError("split double integral needs 0 as a panel edge");
  return std::size_t(it - edges_.begin());
}

}  // namespace emscat
