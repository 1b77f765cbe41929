// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "emscat/asymptotics.hpp"
#include "emscat/counterexample.hpp"
#include "emscat/dynamics.hpp"
#include "emscat/inversion.hpp"
#include "emscat/picard.hpp"
#include "emscat/xray.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace emscat;

namespace {

int failures = 0;

void report(int n, bool pass, const std::string& detail, double seconds) {
  std::printf("criterion %2d: %s  %s  (%.1f s)\n", n, pass ? "PASS" : "FAIL", detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

void run(int n, const std::function<std::pair<bool, std::string>()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  std::pair<bool, std::string> r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r = {false, std::string("exception: ") + e.what()};
  }
  report(n, r.first, r.second, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<Line> ten_lines() {
  std::vector<Line> lines;
  for (int k = 0; k < 10; ++k) lines.push_back(Line::planar(2 * std::numbers::pi * k / 10 + 0.1, -1.35 + 0.3 * k));
  return lines;
}

double rel_l2(const GridFunction& g, const std::function<double(const Vec&)>& truth) {
  double num = 0, den = 0;
  for (std::size_t k = 0; k < g.cells(); ++k) {
    const double t = truth(g.point(k));
    num += (g.at(k) - t) * (g.at(k) - t);
    den += t * t;
  }
  return std::sqrt(num / den);
}

// admissible configurations above every threshold
std::vector<std::pair<Vec, Vec>> admissible(int count) {
  std::vector<std::pair<Vec, Vec>> out;
  const double speeds[] = {2e4, 5e4, 2e5, 1e6, 3e6};
  const double offsets[] = {4, 4, 4, 1, 1};
  for (int k = 0; k < count; ++k) {
    const double phi = 0.7 * k + 0.2, s = speeds[k % 5], x = offsets[k % 5] * (k % 2 ? -1 : 1);
    const Line line = Line::planar(phi, x);
    out.emplace_back(s * line.theta, line.x);
  }
  return out;
}

}  // namespace

int main() {
  const FieldPtr A = field_a();

  run(1, [&] {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> phi(0, 2 * std::numbers::pi), q(-2.5, 2.5);
    const double speeds[] = {8, 16, 32, 64};
    double worst = 0;
    for (int k = 0; k < 50; ++k) {
      const Line line = Line::planar(phi(rng), q(rng));
      const Vec v = speeds[k % 4] * line.theta;
      const ScatteringDatum d = scattering_datum(*A, v, line.x);
      worst = std::max(worst, std::abs(d.v_plus.norm() - v.norm()) / v.norm());
    }
    return std::pair{worst <= 1e-8, fmt("max relative speed change %.2e over 50 data (tol 1e-8)", worst)};
  });

  const std::vector<double> ladder{16, 32, 64, 128};

  run(2, [&] {
    double lo = 1e9, hi = -1e9;
    for (const Line& line : ten_lines()) {
      const AsymptoticTerms W = limit_terms(*A, line);
      std::vector<double> r;
      for (double s : ladder) r.push_back((scattering_datum(*A, s * line.theta, line.x).a_sc - W.W11).norm());
      const double k = slope(ladder, r);
      lo = std::min(lo, k);
      hi = std::max(hi, k);
    }
    return std::pair{lo >= -1.15 && hi <= -0.85, fmt("slopes of |a_sc - W11| in [%.3f, %.3f] (need -1 +- 0.15)", lo, hi)};
  });

  run(3, [&] {
    double lo[3] = {1e9, 1e9, 1e9}, hi[3] = {-1e9, -1e9, -1e9};
    for (const Line& line : ten_lines()) {
      const AsymptoticTerms W = limit_terms(*A, line);
      std::vector<double> r12, r21, r22;
      for (double s : ladder) {
        const ScatteringDatum d = scattering_datum(*A, s * line.theta, line.x);
        r12.push_back((s * (d.a_sc - W.W11) - W.W12).norm());
        r21.push_back((s * d.b_sc - W.W21).norm());
        r22.push_back((s * (s * d.b_sc - W.W21) - W.W22).norm());
      }
      const double k[3] = {slope(ladder, r12), slope(ladder, r21), slope(ladder, r22)};
      for (int i = 0; i < 3; ++i) {
        lo[i] = std::min(lo[i], k[i]);
        hi[i] = std::max(hi[i], k[i]);
      }
    }
    bool ok = true;
    for (int i = 0; i < 3; ++i) ok = ok && lo[i] >= -1.25 && hi[i] <= -0.75;
    return std::pair{ok, fmt("slopes W12 [%.3f, %.3f], W21 [%.3f, %.3f], W22 [%.3f, %.3f] (need -1 +- 0.25)", lo[0],
                             hi[0], lo[1], hi[1], lo[2], hi[2])};
  });

  run(4, [&] {
    double worst = 0, worst_rel = 0;
    bool certified = true;
    for (const auto& [v, x] : admissible(5)) {
      const FixedPointResult fp = solve_fixed_point(*A, v, x);
      certified = certified && fp.certificate.has_value();
      const Trajectory tr = integrate_trajectory(*A, v, x);
      double gap = 0, size = 0;
      const auto& t = fp.path.grid.nodes();
      for (std::size_t j = 0; j < t.size(); ++j) {
        if (t[j] < tr.t0 || t[j] > tr.t1) continue;
        const Vec y = tr.deflection(t[j]).y;
        gap = std::max(gap, (fp.path.f[j] - y).norm());
        size = std::max(size, y.norm());
      }
      worst = std::max(worst, gap);
      worst_rel = std::max(worst_rel, gap / size);
    }
    return std::pair{certified && worst <= 1e-6,
                     fmt("sup |f - y| = %.2e (relative %.2e) on 5 certified configurations (tol 1e-6)", worst, worst_rel)};
  });

  run(5, [&] {
    int held = 0, total = 0;
    double max_angle = 0;
    bool ok = true;
    for (const auto& [v, x] : admissible(10)) {
      const SmallAngleReport r = verify_small_angle_estimates(*A, v, x);
      ok = ok && r.admissible;
      for (const InequalityCheck& c : r.checks) {
        ++total;
        if (c.holds && c.lhs < c.rhs) ++held;
      }
      max_angle = std::max(max_angle, scattering_datum(*A, v, x).max_angle);
    }
    ok = ok && held == total && max_angle < std::numbers::pi / 4;
    return std::pair{ok, fmt("%d/%d strict inequalities at 10 admissible data, max angle %.2e < pi/4", held, total, max_angle)};
  });

  run(6, [&] {
    const Envelope& e = A->envelope();
    double worst_root = 0;
    bool mono = true, below = true;
    for (double xo : {0.0, 1.0, 4.0}) {
      const Thresholds z = default_thresholds(*A, xo);
      BoundInputs in{2, e.alpha, e.beta1, e.beta2, z.z3, xo, z.R, z.r, 0};
      worst_root = std::max(worst_root, std::abs(bounds(in).lambda - 1));
      for (double f : {1.0001, 1.01, 2.0, 10.0, 1e3}) {
        in.speed = f * z.z3;
        below = below && bounds(in).lambda < 1;
      }
      BoundSet prev;
      for (int k = 0; k < 20; ++k) {
        in.speed = std::sqrt(2.0) * z.R * (1.01 + 0.5 * k) * std::pow(3.0, k);
        const BoundSet b = bounds(in);
        if (k > 0) mono = mono && b.rho1 < prev.rho1 && b.rho2 < prev.rho2 && b.lambda < prev.lambda;
        prev = b;
      }
    }
    return std::pair{worst_root <= 1e-10 && mono && below,
                     fmt("|lambda(z3) - 1| = %.1e, lambda < 1 above z3: %s, monotone on 20 points: %s", worst_root,
                         below ? "yes" : "no", mono ? "yes" : "no")};
  });

  run(7, [&] {
    const XrayTarget g = scalar_target(2, [](const Vec& x) { return std::exp(-x.squaredNorm()); }, 3.0, 1.0, 7.0);
    const GridFunction r = invert_fbp(build_sinogram(g, 256, 256, 6), {3.0, 128});
    const double err = rel_l2(r, [](const Vec& x) { return std::exp(-x.squaredNorm()); });
    return std::pair{err <= 0.02, fmt("Gaussian FBP relative L2 %.3e (tol 2e-2)", err)};
  });

  run(8, [&] {
    const EnergySweep sw = generate_sweep(*A, planar_line_set(256, 128, 5), {16, 32, 64});
    ReconstructionOptions o;
    o.fbp.L = 3;
    o.fbp.N = 128;
    const ReconstructionReport r = reconstruct_from_a(sw, o, A.get());
    const double eb = r.B_error.total_relative_l2, ev = r.gradV_error.total_relative_l2;
    return std::pair{eb <= 0.05 && ev <= 0.08,
                     fmt("B relative L2 %.3e (tol 5e-2), grad V relative L2 %.3e (tol 8e-2), %zu flagged lines", eb, ev,
                         r.flagged_lines)};
  });

  run(9, [&] {
    const CounterexampleBundle b = build_bundle();
    const EqualityReport r = verify_equality(b, 32, 64, 5.5);
    const bool ok = b.B_sup_difference > 0.1 * b.B1_sup && r.V_nonzero && r.max_residual <= 1e-6 &&
                    r.max_closed_form_gap <= 1e-6;
    return std::pair{ok, fmt("|B1-B2|sup %.3f vs 0.1|B1|sup %.3f, FF1-FF2 %.2e, W22 residual %.2e (tol 1e-6), "
                             "closed-form gap %.2e",
                             b.B_sup_difference, 0.1 * b.B1_sup, b.FF1 - b.FF2, r.max_residual, r.max_closed_form_gap)};
  });

  run(10, [&] {
    const Line line = Line::planar(1.1, 0.5);
    const double s = 4;
    std::vector<double> defect;
    for (double eps : {0.1, 0.05, 0.025}) {
      const ScaledField f(A, eps, eps);
      defect.push_back((scattering_datum(f, s * line.theta, line.x).a_sc - born_leading(f, s, line).w1).norm());
    }
    const double q1 = defect[0] / defect[1], q2 = defect[1] / defect[2];
    // symmetrization round trips
    double sym = 0;
    for (const Line& l : ten_lines()) {
      const SymmetrizedBorn z = symmetrize(born_leading(*A, 12, l), born_leading(*A, 12, l.reversed()));
      const AsymptoticTerms W = limit_terms(*A, l);
      sym = std::max({sym, (z.xray_gradV - W.xray_gradV).norm(), (z.magnetic_line - W.W11).norm(),
                      (z.magnetic_split - W.W21).norm(), (z.split_minus_gradV - W.split_minus_gradV).norm()});
    }
    const bool ok = std::abs(q1 - 4) <= 0.5 && std::abs(q2 - 4) <= 0.5 && sym <= 1e-10;
    return std::pair{ok, fmt("defect ratios per halving %.3f, %.3f (need 4 +- 0.5), symmetrization gap %.1e (tol 1e-10)",
                             q1, q2, sym)};
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
