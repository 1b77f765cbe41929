#include "emscat/xray.hpp"

#include "emscat/io.hpp"
#include "emscat/parallel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fftw3.h>

#include <cmath>
#include <complex>
#include <istream>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>

namespace emscat {

using Eigen::VectorXd;
using std::numbers::pi;

XrayTarget scalar_target(int dimension, std::function<double(const Vec&)> f, double decay, double decay_constant,
                         std::optional<double> support_radius) {
  XrayTarget t;
  t.dimension = dimension;
  t.arity = 1;
  t.f = [g = std::move(f)](const Vec& x) {
    VectorXd v(1);
    v[0] = g(x);
    return v;
  };
  t.decay = decay;
  t.decay_constant = decay_constant;
  t.support_radius = support_radius;
  return t;
}

VectorXd xray_forward(const XrayTarget& target, const Line& line, const XrayOptions& opt) {
  if (!target.f) throw ConfigError("xray_forward: empty target");
  if (!target.support_radius && !(target.decay > 1))
    throw DomainError("xray_forward: decay exponent must exceed 1 for the line integral to converge");
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double inf = std::numeric_limits<double>::infinity();
  double lo = -inf, hi = inf;
  if (target.support_radius) {
    const double R = *target.support_radius, xn = line.x.norm();
    if (xn >= R) return VectorXd::Zero(target.arity);
    hi = std::sqrt(R * R - xn * xn);
    lo = -hi;
  }
  VectorXd out(target.arity);
  for (int c = 0; c < target.arity; ++c) {
    auto g = [&](double t) { return target.f(line.at(t))[c]; };
    // split at the closest point, where smooth targets concentrate
    out[c] = GK::integrate(g, lo, 0.0, opt.max_depth, opt.tolerance) +
             GK::integrate(g, 0.0, hi, opt.max_depth, opt.tolerance);
  }
  return out;
}

// ---------------------------------------------------------------------------

Line PlaneFamily::line(double phi, double q) const {
  Vec theta = Vec::Zero(), tperp = Vec::Zero();
  const double c = std::cos(phi), s = std::sin(phi);
  theta[i] = c;
  theta[k] = s;
  tperp[i] = s;
  tperp[k] = -c;
  Vec x = q * tperp;
  if (normal_offset != 0) x[normal_axis()] = normal_offset;
  return Line{theta, x};
}

Sinogram::Sinogram(int J_, int I_, double Q_, int arity_, PlaneFamily plane_)
    : J(J_), I(I_), Q(Q_), arity(arity_), plane(plane_) {
  if (J < 4 || I < 4) throw ConfigError("sinogram needs at least 4 angles and 4 offsets");
  if (!(Q > 0)) throw ConfigError("sinogram offset range must be positive");
  if (arity < 1) throw ConfigError("sinogram arity must be positive");
  values.assign(std::size_t(J) * I * arity, 0.0);
}

double Sinogram::phi(int j) const { return pi * j / J; }
double Sinogram::q(int l) const { return -Q + 2 * Q * l / (I - 1); }

Sinogram Sinogram::component(int c) const {
  Sinogram s(J, I, Q, 1, plane);
  for (int j = 0; j < J; ++j)
    for (int l = 0; l < I; ++l) s.at(j, l) = at(j, l, c);
  return s;
}

Sinogram sample_sinogram(int J, int I, double Q, int arity, const std::function<VectorXd(const Line&)>& g,
                         PlaneFamily plane, int threads) {
  Sinogram s(J, I, Q, arity, plane);
  parallel_for(
      std::size_t(J) * I,
      [&](std::size_t cell) {
        const int j = int(cell / I), l = int(cell % I);
        const VectorXd v = g(s.line(j, l));
        if (v.size() != arity) throw ConfigError("sample_sinogram: value arity mismatch");
        for (int c = 0; c < arity; ++c) s.at(j, l, c) = v[c];
      },
      threads);
  return s;
}

Sinogram build_sinogram(const XrayTarget& target, int J, int I, double Q, PlaneFamily plane, const XrayOptions& opt,
                        int threads) {
  return sample_sinogram(
      J, I, Q, target.arity, [&](const Line& line) { return xray_forward(target, line, opt); }, plane, threads);
}

// ---------------------------------------------------------------------------

GridFunction::GridFunction(int dimension_, double L_, int N_, int arity_)
    : dimension(dimension_), L(L_), N(N_), arity(arity_) {
  if (dimension != 2 && dimension != 3) throw ConfigError("grid dimension must be 2 or 3");
  if (N < 2 || !(L > 0) || arity < 1) throw ConfigError("invalid grid shape");
  values.assign(cells() * arity, 0.0);
}

std::size_t GridFunction::cells() const {
  std::size_t c = std::size_t(N) * N;
  return dimension == 3 ? c * N : c;
}

Vec GridFunction::point(std::size_t cell) const {
  const int ix = int(cell % N), iy = int((cell / N) % N), iz = int(cell / (std::size_t(N) * N));
  return Vec(coord(ix), coord(iy), dimension == 3 ? coord(iz) : 0.0);
}

GridFunction GridFunction::component(int c) const {
  GridFunction g(dimension, L, N, 1);
  for (std::size_t i = 0; i < cells(); ++i) g.at(i) = at(i, c);
  g.undersampled = undersampled;
  g.warning = warning;
  return g;
}

GridFunction sample_grid(int dimension, double L, int N, int arity, const std::function<VectorXd(const Vec&)>& f,
                         int threads) {
  GridFunction g(dimension, L, N, arity);
  parallel_for(
      g.cells(),
      [&](std::size_t cell) {
        const VectorXd v = f(g.point(cell));
        for (int c = 0; c < arity; ++c) g.at(cell, c) = v[c];
      },
      threads);
  return g;
}

// ---------------------------------------------------------------------------

namespace {

std::mutex fftw_planner_mutex;  // the FFTW planner is not thread-safe

// Ram-Lak filter (spatial kernel of the band-limited ramp, zero padded) times the window.
std::vector<double> filter_response(int M, double d, Apodization window) {
  std::vector<double> h(M, 0.0);
  for (int n = -(M / 2) + 1; n <= M / 2; ++n) {
    double v = 0;
    if (n == 0) v = 1 / (4 * d * d);
    else if (n % 2 != 0) v = -1 / (double(n) * n * pi * pi * d * d);
    h[(n + M) % M] = v;
  }
  std::vector<std::complex<double>> H(M / 2 + 1);
  {
    std::lock_guard lock(fftw_planner_mutex);
    fftw_plan p = fftw_plan_dft_r2c_1d(M, h.data(), reinterpret_cast<fftw_complex*>(H.data()), FFTW_ESTIMATE);
    fftw_execute(p);
    fftw_destroy_plan(p);
  }
  std::vector<double> out(M / 2 + 1);
  for (int k = 0; k <= M / 2; ++k) {
    double w = 1;
    if (window == Apodization::Hann) w = 0.5 * (1 + std::cos(2 * pi * k / M));
    out[k] = H[k].real() * w;
  }
  return out;
}

// Filtered projections Q_j(q_l) of one scalar component.
std::vector<double> filter_projections(const Sinogram& s, int c, Apodization window) {
  const double d = s.spacing();
  int M = 1;
  while (M < 2 * s.I) M *= 2;
  const std::vector<double> H = filter_response(M, d, window);
  std::vector<double> buf(M);
  std::vector<std::complex<double>> spec(M / 2 + 1);
  fftw_plan fwd, bwd;
  {
    std::lock_guard lock(fftw_planner_mutex);
    fwd = fftw_plan_dft_r2c_1d(M, buf.data(), reinterpret_cast<fftw_complex*>(spec.data()), FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_1d(M, reinterpret_cast<fftw_complex*>(spec.data()), buf.data(), FFTW_ESTIMATE);
  }
  std::vector<double> Q(std::size_t(s.J) * s.I);
  for (int j = 0; j < s.J; ++j) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (int l = 0; l < s.I; ++l) buf[l] = s.at(j, l, c);
    fftw_execute(fwd);
    for (int k = 0; k <= M / 2; ++k) spec[k] *= H[k] * d / M;
    fftw_execute(bwd);
    for (int l = 0; l < s.I; ++l) Q[std::size_t(j) * s.I + l] = buf[l];
  }
  {
    std::lock_guard lock(fftw_planner_mutex);
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }
  return Q;
}

}  // namespace

GridFunction invert_fbp(const Sinogram& sino, const FbpOptions& opt) {
  GridFunction g(2, opt.L, opt.N, sino.arity);
  for (const double v : sino.values)
    if (!std::isfinite(v)) throw NumericError("invert_fbp: non-finite sinogram value");
  if (sino.I < opt.N) {
    g.undersampled = true;
    g.warning = "sinogram has fewer offsets than output cells per axis";
  }
  std::vector<double> cs(sino.J), sn(sino.J);
  for (int j = 0; j < sino.J; ++j) {
    cs[j] = std::cos(sino.phi(j));
    sn[j] = std::sin(sino.phi(j));
  }
  const double d = sino.spacing();
  for (int c = 0; c < sino.arity; ++c) {
    const std::vector<double> Q = filter_projections(sino, c, opt.window);
    parallel_for(
        std::size_t(opt.N),
        [&](std::size_t iy) {
          const double w = g.coord(int(iy));
          for (int ix = 0; ix < opt.N; ++ix) {
            const double u = g.coord(ix);
            double acc = 0;
            for (int j = 0; j < sino.J; ++j) {
              // p . theta_perp
              const double t = u * sn[j] - w * cs[j];
              const double r = (t + sino.Q) / d;
              const int l = int(std::floor(r));
              if (l < 0 || l >= sino.I - 1) continue;
              const double a = r - l;
              const double* row = &Q[std::size_t(j) * sino.I];
              acc += (1 - a) * row[l] + a * row[l + 1];
            }
            g.at(g.index(ix, int(iy)), c) = acc * pi / sino.J;
          }
        },
        opt.threads);
  }
  return g;
}

Sinogram plane_transform_from_W11(const Sinogram& w11) {
  const int i = w11.plane.i, k = w11.plane.k;
  if (w11.arity <= std::max(i, k)) throw ConfigError("plane_transform_from_W11: W11 arity too small for the plane");
  Sinogram s(w11.J, w11.I, w11.Q, 1, w11.plane);
  for (int j = 0; j < w11.J; ++j) {
    const double ti = std::cos(w11.phi(j)), tk = std::sin(w11.phi(j));
    for (int l = 0; l < w11.I; ++l) s.at(j, l) = tk * w11.at(j, l, i) - ti * w11.at(j, l, k);
  }
  return s;
}

namespace {
void check_coverage(const Sinogram& s, const FbpOptions& opt) {
  if (s.J < 8) throw DomainError("insufficient angular coverage for reconstruction (need >= 8 angles)");
  if (s.Q < opt.L) throw DomainError("sinogram offsets do not cover the output grid");
}
}  // namespace

GridFunction recover_B_from_W11(const Sinogram& w11, const FbpOptions& opt) {
  check_coverage(w11, opt);
  return invert_fbp(plane_transform_from_W11(w11), opt);
}

GridFunction recover_B_from_W11_3d(const std::array<std::vector<Sinogram>, 3>& slices, const FbpOptions& opt) {
  static constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  GridFunction out(3, opt.L, opt.N, 3);
  for (int p = 0; p < 3; ++p) {
    if (int(slices[p].size()) != opt.N) throw DomainError("recover_B_from_W11_3d: need one slice per grid layer");
    for (int m = 0; m < opt.N; ++m) {
      const Sinogram& s = slices[p][m];
      if (s.plane.i != pairs[p][0] || s.plane.k != pairs[p][1])
        throw ConfigError("recover_B_from_W11_3d: slice belongs to another plane family");
      if (std::abs(s.plane.normal_offset - out.coord(m)) > 1e-9 * (1 + opt.L))
        throw ConfigError("recover_B_from_W11_3d: slice offset does not match the grid layer");
      const GridFunction g = recover_B_from_W11(s, opt);
      if (g.undersampled) {
        out.undersampled = true;
        out.warning = g.warning;
      }
      for (int b = 0; b < opt.N; ++b)
        for (int a = 0; a < opt.N; ++a) {
          std::size_t cell = 0;
          if (p == 0) cell = out.index(a, b, m);
          else if (p == 1) cell = out.index(a, m, b);
          else cell = out.index(m, a, b);
          out.at(cell, p) = g.at(g.index(a, b));
        }
    }
  }
  return out;
}

GridFunction recover_V(const Sinogram& minus_PV, const FbpOptions& opt) {
  if (minus_PV.arity != 1) throw ConfigError("recover_V: expects a scalar sinogram");
  check_coverage(minus_PV, opt);
  Sinogram pv = minus_PV;
  for (double& v : pv.values) v = -v;
  return invert_fbp(pv, opt);
}

// ---------------------------------------------------------------------------

void write_sinogram_csv(std::ostream& os, const Sinogram& s) {
  os << "J,I,Q,m\n" << s.J << ',' << s.I << ',' << format_double(s.Q) << ',' << s.arity << '\n';
  for (int j = 0; j < s.J; ++j)
    for (int l = 0; l < s.I; ++l) {
      os << j << ',' << l;
      for (int c = 0; c < s.arity; ++c) os << ',' << format_double(s.at(j, l, c));
      os << '\n';
    }
}

Sinogram read_sinogram_csv(std::istream& is) {
  std::string line;
  if (!next_data_line(is, line) || line.rfind("J,I,Q,m", 0) != 0) throw ConfigError("sinogram CSV: missing header");
  if (!next_data_line(is, line)) throw ConfigError("sinogram CSV: missing shape row");
  const auto h = split_csv(line);
  if (h.size() != 4) throw ConfigError("sinogram CSV: bad shape row");
  Sinogram s(int(parse_long(h[0])), int(parse_long(h[1])), parse_double(h[2]), int(parse_long(h[3])));
  std::size_t rows = 0;
  while (next_data_line(is, line)) {
    const auto f = split_csv(line);
    if (int(f.size()) != 2 + s.arity) throw ConfigError("sinogram CSV: bad row width");
    const long j = parse_long(f[0]), l = parse_long(f[1]);
    if (j < 0 || j >= s.J || l < 0 || l >= s.I) throw ConfigError("sinogram CSV: index out of range");
    for (int c = 0; c < s.arity; ++c) s.at(int(j), int(l), c) = parse_double(f[2 + c]);
    ++rows;
  }
  if (rows != std::size_t(s.J) * s.I) throw ConfigError("sinogram CSV: wrong number of rows");
  return s;
}

void write_grid_csv(std::ostream& os, const GridFunction& g) {
  os << "L,N,m,dimension\n" << format_double(g.L) << ',' << g.N << ',' << g.arity << ',' << g.dimension << '\n';
  for (std::size_t i = 0; i < g.cells(); ++i) {
    for (int c = 0; c < g.arity; ++c) os << (c ? "," : "") << format_double(g.at(i, c));
    os << '\n';
  }
}

GridFunction read_grid_csv(std::istream& is) {
  std::string line;
  if (!next_data_line(is, line) || line.rfind("L,N,m", 0) != 0) throw ConfigError("grid CSV: missing header");
  if (!next_data_line(is, line)) throw ConfigError("grid CSV: missing shape row");
  const auto h = split_csv(line);
  if (h.size() != 3 && h.size() != 4) throw ConfigError("grid CSV: bad shape row");
  const int dim = h.size() == 4 ? int(parse_long(h[3])) : 2;
  GridFunction g(dim, parse_double(h[0]), int(parse_long(h[1])), int(parse_long(h[2])));
  std::size_t row = 0;
  while (next_data_line(is, line)) {
    const auto f = split_csv(line);
    if (int(f.size()) != g.arity || row >= g.cells()) throw ConfigError("grid CSV: bad row");
    for (int c = 0; c < g.arity; ++c) g.at(row, c) = parse_double(f[c]);
    ++row;
  }
  if (row != g.cells()) throw ConfigError("grid CSV: wrong number of rows");
  return g;
}

}  // namespace emscat
