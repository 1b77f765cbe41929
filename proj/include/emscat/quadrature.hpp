#pragma once

#include "emscat/core.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace emscat {

// Gauss-Legendre rule on [-1, 1] together with its spectral integration
// matrices: left(i, j) = int_{-1}^{x_i} l_j, right(i, j) = int_{x_i}^{1} l_j.
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  Eigen::MatrixXd left;
  Eigen::MatrixXd right;
  std::vector<double> barycentric;  // weights for barycentric interpolation
};

const GaussLegendreRule& gauss_legendre(int order);

// Composite Gauss-Legendre grid on [edges.front(), edges.back()].
class PanelGrid {
 public:
  PanelGrid() = default;
  PanelGrid(std::vector<double> edges, int order);

  std::size_t size() const { return nodes_.size(); }
  int order() const { return m_; }
  std::size_t panels() const { return edges_.size() - 1; }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& edges() const { return edges_; }
  double lower() const { return edges_.front(); }
  double upper() const { return edges_.back(); }
  // Same grid with every coordinate multiplied by c > 0.
  PanelGrid scaled(double c) const;

  template <class T>
  T integral(std::span<const T> g) const;
  // C(t_j) = integral of g over [lower, t_j]
  template <class T>
  std::vector<T> cumulative_left(std::span<const T> g) const;
  // C(t_j) = integral of g over [t_j, upper]
  template <class T>
  std::vector<T> cumulative_right(std::span<const T> g) const;
  // int_{-inf}^0 int_{-inf}^tau g - int_0^inf int_tau^inf g; 0 must be an edge.
  template <class T>
  T split_double(std::span<const T> g) const;
  // Polynomial interpolation inside the panel containing t (clamped to the grid).
  template <class T>
  T interpolate(std::span<const T> g, double t) const;

  template <class T>
  T integral(const std::vector<T>& g) const { return integral(std::span<const T>(g)); }
  template <class T>
  std::vector<T> cumulative_left(const std::vector<T>& g) const {
    return cumulative_left(std::span<const T>(g));
  }
  template <class T>
  std::vector<T> cumulative_right(const std::vector<T>& g) const {
    return cumulative_right(std::span<const T>(g));
  }
  template <class T>
  T split_double(const std::vector<T>& g) const { return split_double(std::span<const T>(g)); }
  template <class T>
  T interpolate(const std::vector<T>& g, double t) const {
    return interpolate(std::span<const T>(g), t);
  }

 private:
  std::size_t zero_edge() const;

  int m_ = 0;
  std::vector<double> edges_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  const GaussLegendreRule* rule_ = nullptr;
};

template <class T>
T zero_like();
template <>
inline double zero_like<double>() { return 0.0; }
template <>
inline Vec zero_like<Vec>() { return Vec::Zero(); }

template <class T>
T PanelGrid::integral(std::span<const T> g) const {
  T s = zero_like<T>();
  for (std::size_t j = 0; j < nodes_.size(); ++j) s += weights_[j] * g[j];
  return s;
}

template <class T>
std::vector<T> PanelGrid::cumulative_left(std::span<const T> g) const {
  std::vector<T> c(nodes_.size(), zero_like<T>());
  T base = zero_like<T>();
  for (std::size_t p = 0; p + 1 < edges_.size(); ++p) {
    const double half = 0.5 * (edges_[p + 1] - edges_[p]);
    const std::size_t o = p * m_;
    T total = zero_like<T>();
    for (int i = 0; i < m_; ++i) {
      T acc = zero_like<T>();
      for (int j = 0; j < m_; ++j) acc += rule_->left(i, j) * g[o + j];
      c[o + i] = base + half * acc;
      total += rule_->weights[i] * g[o + i];
    }
    base += half * total;
  }
  return c;
}

template <class T>
std::vector<T> PanelGrid::cumulative_right(std::span<const T> g) const {
  std::vector<T> c(nodes_.size(), zero_like<T>());
  T base = zero_like<T>();
  for (std::size_t p = edges_.size() - 1; p-- > 0;) {
    const double half = 0.5 * (edges_[p + 1] - edges_[p]);
    const std::size_t o = p * m_;
    T total = zero_like<T>();
    for (int i = 0; i < m_; ++i) {
      T acc = zero_like<T>();
      for (int j = 0; j < m_; ++j) acc += rule_->right(i, j) * g[o + j];
      c[o + i] = base + half * acc;
      total += rule_->weights[i] * g[o + i];
    }
    base += half * total;
  }
  return c;
}

template <class T>
T PanelGrid::split_double(std::span<const T> g) const {
  const std::size_t z = zero_edge();
  const std::vector<T> cl = cumulative_left(g);
  const std::vector<T> cr = cumulative_right(g);
  T neg = zero_like<T>(), pos = zero_like<T>();
  const std::size_t split = z * m_;
  for (std::size_t j = 0; j < split; ++j) neg += weights_[j] * cl[j];
  for (std::size_t j = split; j < nodes_.size(); ++j) pos += weights_[j] * cr[j];
  return neg - pos;
}

template <class T>
T PanelGrid::interpolate(std::span<const T> g, double t) const {
  if (t <= edges_.front()) t = edges_.front();
  if (t >= edges_.back()) t = edges_.back();
  std::size_t p = 0;
  {
    std::size_t lo = 0, hi = edges_.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (edges_[mid] <= t ? lo : hi) = mid;
    }
    p = lo;
  }
  const double a = edges_[p], b = edges_[p + 1];
  const double x = (2 * t - a - b) / (b - a);
  const std::size_t o = p * m_;
  T num = zero_like<T>();
  double den = 0;
  for (int j = 0; j < m_; ++j) {
    const double diff = x - rule_->nodes[j];
    if (diff == 0) return g[o + j];
    const double w = rule_->barycentric[j] / diff;
    num += w * g[o + j];
    den += w;
  }
  return num / den;
}

}  // namespace emscat
