#include "emscat/inversion.hpp"

#include "emscat/grid_field.hpp"
#include "emscat/io.hpp"
#include "emscat/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

namespace emscat {

std::size_t LineSet::lines() const {
  std::size_t n = 0;
  for (const auto& f : families) n += std::size_t(f.J) * f.I;
  return n;
}

LineSet planar_line_set(int J, int I, double Q) {
  LineSet s;
  s.dimension = 2;
  s.families.push_back({J, I, Q, PlaneFamily{}});
  return s;
}

LineSet slab_line_set(int J, int I, double Q, double L, int N) {
  LineSet s;
  s.dimension = 3;
  const GridFunction layout(3, L, N, 1);
  static constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (const auto& p : pairs)
    for (int m = 0; m < N; ++m) s.families.push_back({J, I, Q, PlaneFamily{p[0], p[1], layout.coord(m)}});
  return s;
}

const ScatteringDatum& EnergySweep::at(std::size_t f, std::size_t e, int j, int l) const {
  const LineFamily& fam = lines.families[f];
  return data[f][(e * fam.J + j) * fam.I + l];
}

std::size_t EnergySweep::flagged() const {
  std::size_t n = 0;
  for (const auto& fam : data)
    for (const auto& d : fam) n += d.flagged;
  return n;
}

void validate_ladder(const std::vector<double>& ladder) {
  if (ladder.size() < 3) throw ConfigError("energy ladder needs at least 3 entries");
  if (!(ladder[0] > 0)) throw ConfigError("energy ladder entries must be positive");
  const double ratio = ladder[1] / ladder[0];
  if (!(ratio > 1)) throw ConfigError("energy ladder must increase");
  for (std::size_t e = 1; e < ladder.size(); ++e)
    if (std::abs(ladder[e] / ladder[e - 1] - ratio) > 1e-12 * ratio)
      throw ConfigError("energy ladder must be geometric");
}

EnergySweep generate_sweep(const Field& field, const LineSet& lines, const std::vector<double>& ladder,
                           const IntegrationControls& controls, int threads) {
  validate_ladder(ladder);
  if (lines.dimension != field.dimension()) throw ConfigError("line set and field dimensions differ");
  EnergySweep sw;
  sw.lines = lines;
  sw.ladder = ladder;
  std::vector<std::size_t> offset;
  std::size_t total = 0;
  for (const auto& fam : lines.families) {
    offset.push_back(total);
    const std::size_t n = ladder.size() * fam.J * fam.I;
    sw.data.emplace_back(n);
    total += n;
  }
  parallel_for(
      total,
      [&](std::size_t k) {
        const std::size_t f = std::size_t(std::upper_bound(offset.begin(), offset.end(), k) - offset.begin()) - 1;
        const LineFamily& fam = lines.families[f];
        const std::size_t local = k - offset[f];
        const std::size_t e = local / (std::size_t(fam.J) * fam.I);
        const int j = int((local / fam.I) % fam.J), l = int(local % fam.I);
        const Sinogram geometry(fam.J, fam.I, fam.Q, 1, fam.plane);
        const Line line = geometry.line(j, l);
        ScatteringDatum& d = sw.data[f][local];
        try {
          d = scattering_datum(field, ladder[e] * line.theta, line.x, controls);
        } catch (const NumericError& err) {
          d.v_minus = ladder[e] * line.theta;
          d.x_minus = line.x;
          d.flagged = true;
          d.flag_reason = err.what();
        }
      },
      threads);
  return sw;
}

namespace {

void put_vec(std::ostream& os, const Vec& v) {
  for (int c = 0; c < 3; ++c) os << ',' << format_double(v[c]);
}

Vec get_vec(const std::vector<std::string_view>& f, std::size_t at) {
  return Vec(parse_double(f[at]), parse_double(f[at + 1]), parse_double(f[at + 2]));
}

}  // namespace

void write_sweep_csv(std::ostream& os, const EnergySweep& sw) {
  os << "dimension," << sw.lines.dimension << '\n' << "ladder";
  for (double s : sw.ladder) os << ',' << format_double(s);
  os << "\nfamily,i,k,normal_offset,J,I,Q\n";
  for (std::size_t f = 0; f < sw.lines.families.size(); ++f) {
    const LineFamily& fam = sw.lines.families[f];
    os << f << ',' << fam.plane.i << ',' << fam.plane.k << ',' << format_double(fam.plane.normal_offset) << ','
       << fam.J << ',' << fam.I << ',' << format_double(fam.Q) << '\n';
  }
  os << "family,index,vx,vy,vz,xx,xy,xz,ax,ay,az,bx,by,bz,energy_drift,fit_residual,max_angle,flagged\n";
  for (std::size_t f = 0; f < sw.data.size(); ++f)
    for (std::size_t k = 0; k < sw.data[f].size(); ++k) {
      const ScatteringDatum& d = sw.data[f][k];
      os << f << ',' << k;
      put_vec(os, d.v_minus);
      put_vec(os, d.x_minus);
      put_vec(os, d.a_sc);
      put_vec(os, d.b_sc);
      os << ',' << format_double(d.energy_drift) << ',' << format_double(d.fit_residual) << ','
         << format_double(d.max_angle) << ',' << (d.flagged ? 1 : 0) << '\n';
    }
}

EnergySweep read_sweep_csv(std::istream& is) {
  EnergySweep sw;
  std::string line;
  auto expect = [&](const char* what) {
    if (!next_data_line(is, line)) throw ConfigError(std::string("sweep CSV: missing ") + what);
    return split_csv(line);
  };
  auto f = expect("dimension row");
  if (f.size() != 2 || f[0] != "dimension") throw ConfigError("sweep CSV: bad dimension row");
  sw.lines.dimension = int(parse_long(f[1]));
  f = expect("ladder row");
  if (f.empty() || f[0] != "ladder") throw ConfigError("sweep CSV: bad ladder row");
  for (std::size_t c = 1; c < f.size(); ++c) sw.ladder.push_back(parse_double(f[c]));
  validate_ladder(sw.ladder);
  f = expect("family header");
  if (f.empty() || f[0] != "family") throw ConfigError("sweep CSV: bad family header");
  while (true) {
    f = expect("data header");
    if (f[0] == "family") break;
    if (f.size() != 7) throw ConfigError("sweep CSV: bad family row");
    LineFamily fam;
    fam.plane.i = int(parse_long(f[1]));
    fam.plane.k = int(parse_long(f[2]));
    fam.plane.normal_offset = parse_double(f[3]);
    fam.J = int(parse_long(f[4]));
    fam.I = int(parse_long(f[5]));
    fam.Q = parse_double(f[6]);
    sw.lines.families.push_back(fam);
    sw.data.emplace_back(sw.ladder.size() * fam.J * fam.I);
  }
  std::vector<std::vector<char>> seen;
  for (const auto& d : sw.data) seen.emplace_back(d.size(), 0);
  std::size_t rows = 0;
  while (next_data_line(is, line)) {
    f = split_csv(line);
    if (f.size() != 18) throw ConfigError("sweep CSV: bad data row");
    const std::size_t fam = std::size_t(parse_long(f[0])), k = std::size_t(parse_long(f[1]));
    if (fam >= sw.data.size() || k >= sw.data[fam].size() || seen[fam][k]) throw ConfigError("sweep CSV: bad data index");
    seen[fam][k] = 1;
    ScatteringDatum& d = sw.data[fam][k];
    d.v_minus = get_vec(f, 2);
    d.x_minus = get_vec(f, 5);
    d.a_sc = get_vec(f, 8);
    d.b_sc = get_vec(f, 11);
    d.v_plus = d.v_minus + d.a_sc;
    d.x_plus = d.x_minus + d.b_sc;
    d.energy_drift = parse_double(f[14]);
    d.fit_residual = parse_double(f[15]);
    d.max_angle = parse_double(f[16]);
    d.flagged = parse_long(f[17]) != 0;
    if (d.flagged) d.flag_reason = "flagged in cached sweep";
    ++rows;
  }
  std::size_t expected = 0;
  for (const auto& d : sw.data) expected += d.size();
  if (rows != expected) throw ConfigError("sweep CSV: wrong number of data rows");
  return sw;
}

// ---------------------------------------------------------------------------

std::size_t LimitEstimates::flagged() const {
  std::size_t n = 0;
  for (const auto& f : families)
    for (char c : f.flagged) n += c;
  return n;
}

double LimitEstimates::max_residual() const {
  double m = 0;
  for (const auto& f : families)
    for (double r : f.residual) m = std::max(m, r);
  return m;
}

TwoTermFit richardson_two_term(const std::vector<double>& s, const std::vector<Vec>& values) {
  if (s.size() < 2 || s.size() != values.size()) throw ConfigError("richardson_two_term: need >= 2 matching samples");
  std::vector<Vec> c1, c2;
  for (std::size_t e = 0; e + 1 < s.size(); ++e) {
    const Vec b = (values[e] - values[e + 1]) / (1 / s[e] - 1 / s[e + 1]);
    c2.push_back(b);
    c1.push_back(values[e + 1] - b / s[e + 1]);
  }
  TwoTermFit fit{c1.back(), c2.back(), 0};
  for (const Vec& c : c1) fit.spread = std::max(fit.spread, (c - fit.c1).norm());
  return fit;
}

namespace {

FamilyLimits empty_limits(const LineFamily& fam) {
  FamilyLimits fl;
  fl.family = fam;
  fl.W11 = fl.W12 = fl.W21 = fl.W22 = Sinogram(fam.J, fam.I, fam.Q, 3, fam.plane);
  fl.residual.assign(std::size_t(fam.J) * fam.I, 0.0);
  fl.flagged.assign(std::size_t(fam.J) * fam.I, 0);
  return fl;
}

void store(Sinogram& s, int j, int l, const Vec& v) {
  for (int c = 0; c < 3; ++c) s.at(j, l, c) = v[c];
}

Vec load(const Sinogram& s, int j, int l) { return Vec(s.at(j, l, 0), s.at(j, l, 1), s.at(j, l, 2)); }

}  // namespace

LimitEstimates extract_limits(const EnergySweep& sweep, const ExtrapolationOptions& opt) {
  validate_ladder(sweep.ladder);
  LimitEstimates out;
  out.dimension = sweep.lines.dimension;
  const std::size_t E = sweep.ladder.size();
  for (std::size_t f = 0; f < sweep.lines.families.size(); ++f) {
    const LineFamily& fam = sweep.lines.families[f];
    FamilyLimits fl = empty_limits(fam);
    for (int j = 0; j < fam.J; ++j)
      for (int l = 0; l < fam.I; ++l) {
        std::vector<Vec> a(E), sb(E);
        bool bad = false;
        double scale = 0;
        for (std::size_t e = 0; e < E; ++e) {
          const ScatteringDatum& d = sweep.at(f, e, j, l);
          bad = bad || d.flagged;
          a[e] = d.a_sc;
          sb[e] = sweep.ladder[e] * d.b_sc;
          scale = std::max({scale, sweep.ladder[e] * a[e].norm(), sweep.ladder[e] * sb[e].norm()});
        }
        const TwoTermFit fa = richardson_two_term(sweep.ladder, a);
        const TwoTermFit fb = richardson_two_term(sweep.ladder, sb);
        store(fl.W11, j, l, fa.c1);
        store(fl.W12, j, l, fa.c2);
        store(fl.W21, j, l, fb.c1);
        store(fl.W22, j, l, fb.c2);
        const std::size_t k = std::size_t(j) * fam.I + l;
        fl.residual[k] = std::max(fa.spread, fb.spread);
        fl.flagged[k] = bad || fl.residual[k] > opt.tolerance * scale + 1e-300 ||
                        !fa.c1.allFinite() || !fb.c1.allFinite();
      }
    out.families.push_back(std::move(fl));
  }
  return out;
}

LimitEstimates exact_limits(const Field& field, const LineSet& lines, const AsymptoticsOptions& opt, int threads) {
  LimitEstimates out;
  out.dimension = lines.dimension;
  for (const auto& fam : lines.families) {
    FamilyLimits fl = empty_limits(fam);
    parallel_for(
        std::size_t(fam.J) * fam.I,
        [&](std::size_t k) {
          const int j = int(k / fam.I), l = int(k % fam.I);
          const AsymptoticTerms t = limit_terms(field, fl.W11.line(j, l), opt);
          store(fl.W11, j, l, t.W11);
          store(fl.W12, j, l, t.W12);
          store(fl.W21, j, l, t.W21);
          store(fl.W22, j, l, t.W22);
        },
        threads);
    out.families.push_back(std::move(fl));
  }
  return out;
}

// ---------------------------------------------------------------------------

ErrorNorms error_report(const GridFunction& truth, const GridFunction& recon) {
  if (truth.dimension != recon.dimension || truth.N != recon.N || truth.arity != recon.arity ||
      std::abs(truth.L - recon.L) > 1e-12 * truth.L)
    throw ConfigError("error_report: grids do not match");
  ErrorNorms r;
  double dt = 0, tt = 0, dm = 0, tm = 0;
  for (int c = 0; c < truth.arity; ++c) {
    double d2 = 0, t2 = 0, dmax = 0, tmax = 0;
    for (std::size_t i = 0; i < truth.cells(); ++i) {
      const double t = truth.at(i, c), d = recon.at(i, c) - t;
      d2 += d * d;
      t2 += t * t;
      dmax = std::max(dmax, std::abs(d));
      tmax = std::max(tmax, std::abs(t));
    }
    r.relative_l2.push_back(t2 > 0 ? std::sqrt(d2 / t2) : std::sqrt(d2));
    r.relative_max.push_back(tmax > 0 ? dmax / tmax : dmax);
    dt += d2;
    tt += t2;
    dm = std::max(dm, dmax);
    tm = std::max(tm, tmax);
  }
  r.total_relative_l2 = tt > 0 ? std::sqrt(dt / tt) : std::sqrt(dt);
  r.total_relative_max = tm > 0 ? dm / tm : dm;
  return r;
}

namespace {

constexpr int kPairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};

GridFunction truth_grid(const Field& field, const FbpOptions& fbp, int arity,
                        const std::function<Eigen::VectorXd(const Vec&)>& f) {
  return sample_grid(field.dimension(), fbp.L, fbp.N, arity, f, fbp.threads);
}

// Families carrying the (0,1) plane: all of them in 2-D, the first N in 3-D.
std::vector<std::size_t> xy_families(const LimitEstimates& lim, int N) {
  std::vector<std::size_t> out;
  if (lim.dimension == 2) {
    out.push_back(0);
  } else {
    for (int m = 0; m < N; ++m) out.push_back(std::size_t(m));
  }
  return out;
}

void check_layout(const LimitEstimates& lim, const FbpOptions& fbp) {
  if (lim.dimension == 2 && lim.families.size() != 1) throw ConfigError("2-D reconstruction expects one line family");
  if (lim.dimension == 3) {
    if (lim.families.size() != std::size_t(3 * fbp.N))
      throw ConfigError("3-D reconstruction expects 3 N slab families matching the output grid");
    const GridFunction layout(3, fbp.L, fbp.N, 1);
    for (int p = 0; p < 3; ++p)
      for (int m = 0; m < fbp.N; ++m) {
        const PlaneFamily& pf = lim.families[std::size_t(p * fbp.N + m)].family.plane;
        if (pf.i != kPairs[p][0] || pf.k != kPairs[p][1] ||
            std::abs(pf.normal_offset - layout.coord(m)) > 1e-9 * (1 + fbp.L))
          throw ConfigError("3-D line families are not in slab order");
      }
  }
}

void check_quota(const LimitEstimates& lim, const ReconstructionOptions& opt, ReconstructionReport& rep) {
  std::size_t lines = 0;
  for (const auto& f : lim.families) lines += f.flagged.size();
  rep.flagged_lines = lim.flagged();
  rep.max_extrapolation_residual = lim.max_residual();
  if (lines && double(rep.flagged_lines) > opt.flagged_quota * double(lines))
    throw DomainError("coverage: " + std::to_string(rep.flagged_lines) + " of " + std::to_string(lines) +
                      " lines flagged (quota " + std::to_string(opt.flagged_quota) + ")");
}

// Stacks per-layer 2-D grids (arity m) into a 3-D grid along the normal axis of the (0,1) plane.
GridFunction stack_layers(const std::vector<GridFunction>& layers, const FbpOptions& fbp) {
  const int m = layers.front().arity;
  GridFunction out(3, fbp.L, fbp.N, m);
  for (int z = 0; z < fbp.N; ++z) {
    const GridFunction& g = layers[std::size_t(z)];
    if (g.undersampled) {
      out.undersampled = true;
      out.warning = g.warning;
    }
    for (int y = 0; y < fbp.N; ++y)
      for (int x = 0; x < fbp.N; ++x)
        for (int c = 0; c < m; ++c) out.at(out.index(x, y, z), c) = g.at(g.index(x, y), c);
  }
  return out;
}

FieldPtr non_owning(const Field& f) { return FieldPtr(FieldPtr{}, &f); }

}  // namespace

GridFunction magnetic_grid(const Field& field, const FbpOptions& fbp) {
  const int n = field.dimension();
  const int m = n == 2 ? 1 : 3;
  return truth_grid(field, fbp, m, [&](const Vec& x) {
    const Mat B = field.magnetic(x);
    Eigen::VectorXd v(m);
    for (int p = 0; p < m; ++p) v[p] = B(kPairs[p][0], kPairs[p][1]);
    return v;
  });
}

GridFunction gradient_grid(const Field& field, const FbpOptions& fbp) {
  const int n = field.dimension();
  return truth_grid(field, fbp, n, [&](const Vec& x) {
    const Vec g = field.potential_gradient(x);
    return Eigen::VectorXd(g.head(n));
  });
}

GridFunction potential_grid(const Field& field, const FbpOptions& fbp) {
  return truth_grid(field, fbp, 1, [&](const Vec& x) {
    Eigen::VectorXd v(1);
    v[0] = field.potential(x);
    return v;
  });
}

ReconstructionReport reconstruct_from_limits(const LimitEstimates& lim, const ReconstructionOptions& opt,
                                             const Field* truth) {
  check_layout(lim, opt.fbp);
  ReconstructionReport rep;
  check_quota(lim, opt, rep);
  const int n = lim.dimension, N = opt.fbp.N;

  // (1) B from W11 through the plane formula
  if (n == 2) {
    rep.B = recover_B_from_W11(lim.families[0].W11, opt.fbp);
  } else {
    std::array<std::vector<Sinogram>, 3> slices;
    for (int p = 0; p < 3; ++p)
      for (int m = 0; m < N; ++m) slices[p].push_back(lim.families[std::size_t(p * N + m)].W11);
    rep.B = recover_B_from_W11_3d(slices, opt.fbp);
  }
  rep.has_B = true;
  if (rep.B.undersampled) rep.notes.push_back("B: " + rep.B.warning);

  // (2)-(3) magnetic part of W12 on the reconstructed B, subtracted from W12
  const GridField gB(std::nullopt, rep.B);
  std::vector<GridFunction> layers;
  for (std::size_t f : xy_families(lim, N)) {
    const FamilyLimits& fl = lim.families[f];
    Sinogram pgrad(fl.family.J, fl.family.I, fl.family.Q, n, fl.family.plane);
    parallel_for(
        std::size_t(fl.family.J) * fl.family.I,
        [&](std::size_t k) {
          const int j = int(k / fl.family.I), l = int(k % fl.family.I);
          const Vec magnetic_part = limit_terms(gB, fl.W12.line(j, l), opt.asymptotics).W12;
          // W12 = -P(grad V) + magnetic part
          const Vec pg = magnetic_part - load(fl.W12, j, l);
          for (int c = 0; c < n; ++c) pgrad.at(j, l, c) = pg[c];
        },
        opt.fbp.threads);
    // (4) componentwise inversion
    layers.push_back(invert_fbp(pgrad, opt.fbp));
  }
  rep.gradV = n == 2 ? layers.front() : stack_layers(layers, opt.fbp);
  rep.has_gradV = true;
  if (n == 2) rep.notes.push_back("2-D: B and grad V recovered from the velocity limits");

  if (truth) {
    rep.B_truth = magnetic_grid(*truth, opt.fbp);
    rep.gradV_truth = gradient_grid(*truth, opt.fbp);
    rep.B_error = error_report(rep.B_truth, rep.B);
    rep.gradV_error = error_report(rep.gradV_truth, rep.gradV);
  }
  return rep;
}

ReconstructionReport reconstruct_from_a(const EnergySweep& sweep, const ReconstructionOptions& opt,
                                        const Field* truth, const ExtrapolationOptions& ext) {
  return reconstruct_from_limits(extract_limits(sweep, ext), opt, truth);
}

ReconstructionReport reconstruct_V_from_limits(const LimitEstimates& lim, const Field& known_B,
                                               const ReconstructionOptions& opt, const Field* truth) {
  check_layout(lim, opt.fbp);
  if (known_B.dimension() != lim.dimension) throw ConfigError("known B has the wrong dimension");
  ReconstructionReport rep;
  check_quota(lim, opt, rep);
  const int n = lim.dimension, N = opt.fbp.N;
  const ScaledField magnetic_only(non_owning(known_B), 0.0, 1.0);
  std::vector<GridFunction> layers;
  for (std::size_t f : xy_families(lim, N)) {
    const FamilyLimits& fl = lim.families[f];
    Sinogram mpv(fl.family.J, fl.family.I, fl.family.Q, 1, fl.family.plane);
    parallel_for(
        std::size_t(fl.family.J) * fl.family.I,
        [&](std::size_t k) {
          const int j = int(k / fl.family.I), l = int(k % fl.family.I);
          const Line line = fl.W22.line(j, l);
          const Vec w22B = limit_terms(magnetic_only, line, opt.asymptotics).W22;
          mpv.at(j, l) = (load(fl.W22, j, l) - w22B).dot(line.theta);
        },
        opt.fbp.threads);
    layers.push_back(recover_V(mpv, opt.fbp));
  }
  rep.V = n == 2 ? layers.front() : stack_layers(layers, opt.fbp);
  rep.has_V = true;
  if (n == 2)
    rep.notes.push_back("2-D: V from the position limits is unique only once B is known; B was supplied");
  if (truth) {
    rep.V_truth = potential_grid(*truth, opt.fbp);
    rep.V_error = error_report(rep.V_truth, rep.V);
  }
  return rep;
}

ReconstructionReport reconstruct_V_from_b(const EnergySweep& sweep, const Field& known_B,
                                          const ReconstructionOptions& opt, const Field* truth,
                                          const ExtrapolationOptions& ext) {
  return reconstruct_V_from_limits(extract_limits(sweep, ext), known_B, opt, truth);
}

}  // namespace emscat
