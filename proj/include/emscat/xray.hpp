#pragma once

#include "emscat/core.hpp"
#include "emscat/line.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace emscat {

// Function R^n -> R^m to be integrated along lines. Either the support radius
// (|f| negligible beyond it) or the power-law decay |f| <= constant (1+|x|)^-decay
// fixes the truncation.
struct XrayTarget {
  int dimension = 2;
  int arity = 1;
  std::function<Eigen::VectorXd(const Vec&)> f;
  double decay = 2.0;
  double decay_constant = 1.0;
  std::optional<double> support_radius;
};

XrayTarget scalar_target(int dimension, std::function<double(const Vec&)> f, double decay, double decay_constant,
                         std::optional<double> support_radius = std::nullopt);

struct XrayOptions {
  double tolerance = 1e-12;  // tail bound and quadrature target, relative to the value scale
  int max_depth = 15;
};

// Pf(theta, x) = int f(t theta + x) dt. Rejects decay <= 1 without a support radius.
Eigen::VectorXd xray_forward(const XrayTarget& target, const Line& line, const XrayOptions& opt = {});

// Planar line family: theta = cos(phi) e_i + sin(phi) e_k, offset q theta_perp + z e_normal
// with theta_perp = sin(phi) e_i - cos(phi) e_k. In 2-D, (i, k) = (0, 1) and z = 0.
struct PlaneFamily {
  int i = 0;
  int k = 1;
  double normal_offset = 0;
  int normal_axis() const { return 3 - i - k; }
  Line line(double phi, double q) const;
};

// Samples on phi_j = pi j / J, q_l = -Q + 2 Q l / (I - 1).
struct Sinogram {
  int J = 0;
  int I = 0;
  double Q = 0;
  int arity = 1;
  PlaneFamily plane;
  std::vector<double> values;  // (j * I + l) * arity + c

  Sinogram() = default;
  Sinogram(int J, int I, double Q, int arity, PlaneFamily plane = {});
  double phi(int j) const;
  double q(int l) const;
  double spacing() const { return 2 * Q / (I - 1); }
  double& at(int j, int l, int c = 0) { return values[(std::size_t(j) * I + l) * arity + c]; }
  double at(int j, int l, int c = 0) const { return values[(std::size_t(j) * I + l) * arity + c]; }
  Line line(int j, int l) const { return plane.line(phi(j), q(l)); }
  // One component as a scalar sinogram.
  Sinogram component(int c) const;
};

// Evaluates g on every line of the grid; g may return any arity fixed by the first call.
Sinogram sample_sinogram(int J, int I, double Q, int arity, const std::function<Eigen::VectorXd(const Line&)>& g,
                         PlaneFamily plane = {}, int threads = 0);
Sinogram build_sinogram(const XrayTarget& target, int J, int I, double Q, PlaneFamily plane = {},
                        const XrayOptions& opt = {}, int threads = 0);

// Uniform cell-centred grid over [-L, L]^dimension with `arity` values per cell.
// Row-major: the first coordinate varies fastest.
struct GridFunction {
  int dimension = 2;
  double L = 1;
  int N = 0;
  int arity = 1;
  std::vector<double> values;
  bool undersampled = false;
  std::string warning;

  GridFunction() = default;
  GridFunction(int dimension, double L, int N, int arity);
  double h() const { return 2 * L / N; }
  double coord(int k) const { return -L + (k + 0.5) * h(); }
  std::size_t cells() const;
  std::size_t index(int ix, int iy, int iz = 0) const {
    return ((std::size_t(iz) * N + iy) * N + ix);
  }
  double& at(std::size_t cell, int c = 0) { return values[cell * arity + c]; }
  double at(std::size_t cell, int c = 0) const { return values[cell * arity + c]; }
  Vec point(std::size_t cell) const;
  GridFunction component(int c) const;
};

// Fills a grid by evaluating f at cell centres.
GridFunction sample_grid(int dimension, double L, int N, int arity, const std::function<Eigen::VectorXd(const Vec&)>& f,
                         int threads = 0);

enum class Apodization { None, Hann };

struct FbpOptions {
  double L = 1;          // output half-width
  int N = 128;           // output resolution per axis
  Apodization window = Apodization::Hann;
  int threads = 0;
};

// Filtered backprojection of a planar scalar-or-vector sinogram onto an N x N grid
// (componentwise). Sets `undersampled` when I < N.
GridFunction invert_fbp(const Sinogram& sino, const FbpOptions& opt);

// PB_ik = theta_k (W11)_i - theta_i (W11)_k for lines of the family, as a scalar sinogram.
// Input arity must be >= max(i, k) + 1.
Sinogram plane_transform_from_W11(const Sinogram& w11);

// 2-D: B_12 on the grid from W_11 samples over T S^1.
GridFunction recover_B_from_W11(const Sinogram& w11, const FbpOptions& opt);

// 3-D: slices[p] holds one W_11 sinogram per normal offset for plane pair p in
// {(0,1), (0,2), (1,2)}; normal offsets must match the output grid coordinates.
// Output arity 3 with components (B_12, B_13, B_23) in 1-based naming.
GridFunction recover_B_from_W11_3d(const std::array<std::vector<Sinogram>, 3>& slices, const FbpOptions& opt);

// V on the grid from samples of -PV.
GridFunction recover_V(const Sinogram& minus_PV, const FbpOptions& opt);

// CSV formats. Sinogram: header "J,I,Q,m" then rows "j,i,v_0,...".
// GridFunction: header "L,N,m,dimension" then row-major values, one cell per row.
void write_sinogram_csv(std::ostream& os, const Sinogram& s);
Sinogram read_sinogram_csv(std::istream& is);
void write_grid_csv(std::ostream& os, const GridFunction& g);
GridFunction read_grid_csv(std::istream& is);

}  // namespace emscat
