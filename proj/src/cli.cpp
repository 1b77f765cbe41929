#include "emscat/cli.hpp"

#include "emscat/asymptotics.hpp"
#include "emscat/counterexample.hpp"
#include "emscat/dynamics.hpp"
#include "emscat/inversion.hpp"
#include "emscat/io.hpp"
#include "emscat/parallel.hpp"
#include "emscat/picard.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>

namespace emscat {

using nlohmann::json;
using std::numbers::pi;

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"simulate", "asymptotics", "bounds", "invert", "counterexample",
                                              "verify-small-angle"};
  return names;
}

namespace {

struct Context {
  const RunConfig& cfg;
  std::ostream& log;
  std::string hash;
  std::filesystem::path dir;

  std::ofstream open(const std::string& name) const {
    std::ofstream os(dir / name);
    if (!os) throw DomainError("cannot write " + (dir / name).string());
    os << "# config_hash=" << hash << " seed=" << cfg.seed << '\n';
    log << "wrote " << (dir / name).string() << '\n';
    return os;
  }
  void write_json(const std::string& name, json j) const {
    j["config_hash"] = hash;
    j["seed"] = cfg.seed;
    std::ofstream os(dir / name);
    if (!os) throw DomainError("cannot write " + (dir / name).string());
    os << j.dump(2) << '\n';
    log << "wrote " << (dir / name).string() << '\n';
  }
  void write_grid(const std::string& name, const GridFunction& g) const {
    std::ofstream os = open(name);
    write_grid_csv(os, g);
  }
};

IntegrationControls integration(const RunConfig& c) {
  IntegrationControls ic;
  ic.rtol = c.tolerances.rtol;
  ic.atol = c.tolerances.atol;
  return ic;
}

AsymptoticsOptions asymptotics(const RunConfig& c) {
  AsymptoticsOptions o;
  o.quadrature.panel_width = c.tolerances.panel_width;
  o.quadrature.order = c.tolerances.panel_order;
  return o;
}

FbpOptions fbp(const RunConfig& c) {
  return {c.grid.L, c.grid.N, c.grid.window == "none" ? Apodization::None : Apodization::Hann, c.threads};
}

// Lines of the simulate/asymptotics grid: phi_j = 2 pi j / J, q_l uniform on [-Q, Q].
std::vector<Line> grid_lines(const LineSpec& s) {
  std::vector<Line> out;
  for (int j = 0; j < s.angles; ++j)
    for (int l = 0; l < s.offsets; ++l) {
      const double q = s.offsets == 1 ? 0.0 : -s.max_offset + 2 * s.max_offset * l / (s.offsets - 1);
      out.push_back(Line::planar(2 * pi * j / s.angles, q));
    }
  return out;
}

std::string vec_header(const char* name, int n) {
  std::string h;
  for (int c = 0; c < n; ++c) h += std::string(",") + name + "_" + char('x' + c);
  return h;
}

void put(std::ostream& os, const Vec& v, int n) {
  for (int c = 0; c < n; ++c) os << ',' << format_double(v[c]);
}

json norms_json(const ErrorNorms& e) {
  return {{"relative_l2", e.relative_l2},
          {"relative_max", e.relative_max},
          {"total_relative_l2", e.total_relative_l2},
          {"total_relative_max", e.total_relative_max}};
}

// ---------------------------------------------------------------------------

int simulate(const Context& cx) {
  const RunConfig& c = cx.cfg;
  const FieldPtr field = make_field(c.field);
  const int n = field->dimension();
  const std::vector<Line> lines = grid_lines(c.lines);
  const std::size_t L = lines.size();
  std::vector<ScatteringDatum> data(c.lines.speeds.size() * L);
  parallel_for(data.size(), [&](std::size_t k) {
    const Line& line = lines[k % L];
    const Vec v = c.lines.speeds[k / L] * line.theta;
    try {
      data[k] = scattering_datum(*field, v, line.x, integration(c));
    } catch (const NumericError& e) {
      data[k].v_minus = v;
      data[k].x_minus = line.x;
      data[k].flagged = true;
      data[k].flag_reason = e.what();
    }
  });
  std::ofstream os = cx.open("scattering.csv");
  os << "s" << vec_header("theta", n) << vec_header("x", n) << vec_header("a_sc", n) << vec_header("b_sc", n)
     << ",energy_drift,fit_residual,max_angle,flagged\n";
  std::size_t flagged = 0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const ScatteringDatum& d = data[k];
    os << format_double(c.lines.speeds[k / L]);
    put(os, lines[k % L].theta, n);
    put(os, lines[k % L].x, n);
    put(os, d.a_sc, n);
    put(os, d.b_sc, n);
    os << ',' << format_double(d.energy_drift) << ',' << format_double(d.fit_residual) << ','
       << format_double(d.max_angle) << ',' << (d.flagged ? 1 : 0) << '\n';
    flagged += d.flagged;
  }
  cx.log << data.size() << " data, " << flagged << " flagged\n";
  return 0;
}

int asymptotics_cmd(const Context& cx) {
  const RunConfig& c = cx.cfg;
  const FieldPtr field = make_field(c.field);
  const int n = field->dimension();
  const std::vector<Line> lines = grid_lines(c.lines);
  const AsymptoticsOptions opt = asymptotics(c);
  std::vector<AsymptoticTerms> W(lines.size());
  parallel_for(lines.size(), [&](std::size_t k) { W[k] = limit_terms(*field, lines[k], opt); });
  {
    std::ofstream os = cx.open("asymptotics.csv");
    os << "phi_index" << vec_header("theta", n) << vec_header("x", n) << vec_header("W11", n)
       << vec_header("W12", n) << vec_header("W21", n) << vec_header("W22", n) << '\n';
    for (std::size_t k = 0; k < lines.size(); ++k) {
      os << k / c.lines.offsets;
      put(os, lines[k].theta, n);
      put(os, lines[k].x, n);
      put(os, W[k].W11, n);
      put(os, W[k].W12, n);
      put(os, W[k].W21, n);
      put(os, W[k].W22, n);
      os << '\n';
    }
  }
  const std::size_t L = lines.size();
  std::vector<FiniteEnergyTerms> w(c.lines.speeds.size() * L);
  parallel_for(w.size(), [&](std::size_t k) {
    const Line& line = lines[k % L];
    w[k] = finite_energy_terms(*field, c.lines.speeds[k / L] * line.theta, line.x, opt);
  });
  std::ofstream os = cx.open("finite_energy.csv");
  os << "s" << vec_header("theta", n) << vec_header("x", n) << vec_header("w1", n) << vec_header("w2", n)
     << vec_header("born1", n) << vec_header("born2", n) << '\n';
  for (std::size_t k = 0; k < w.size(); ++k) {
    os << format_double(w[k].s);
    put(os, lines[k % L].theta, n);
    put(os, lines[k % L].x, n);
    put(os, w[k].w1, n);
    put(os, w[k].w2, n);
    put(os, w[k].born1, n);
    put(os, w[k].born2, n);
    os << '\n';
  }
  return 0;
}

int bounds_cmd(const Context& cx) {
  const RunConfig& c = cx.cfg;
  const FieldPtr field = make_field(c.field);
  const Envelope& e = field->envelope();
  const int n = field->dimension();
  {
    std::ofstream os = cx.open("thresholds.csv");
    os << "offset,R,r,z1,z2,z3\n";
    for (double x : c.bounds.offsets) {
      const Thresholds t = default_thresholds(*field, x);
      os << format_double(x) << ',' << format_double(t.R) << ',' << format_double(t.r) << ','
         << format_double(t.z1) << ',' << format_double(t.z2) << ',' << format_double(t.z3) << '\n';
    }
  }
  std::ofstream os = cx.open("bounds.csv");
  os << "s,offset,R,r,rho1,rho2,lambda1,lambda2,lambda3,lambda4,lambda,delta11,delta12,delta21,delta22\n";
  for (double x : c.bounds.offsets)
    for (double s : c.bounds.speeds) {
      BoundInputs in;
      in.n = n;
      in.alpha = e.alpha;
      in.beta1 = e.beta1;
      in.beta2 = e.beta2;
      in.speed = s;
      in.offset = x;
      in.R = 2 * rho2_limit(n, e.alpha, e.beta1, x);
      in.r = 1;
      os << format_double(s) << ',' << format_double(x) << ',' << format_double(in.R) << ',' << format_double(in.r);
      // speeds at or below sqrt(2) R lie outside the formulas' domain
      if (!(s > std::sqrt(2.0) * in.R)) {
        for (int k = 0; k < 11; ++k) os << ",nan";
        os << '\n';
        continue;
      }
      const BoundSet b = bounds(in);
      for (double v : {b.rho1, b.rho2, b.lambda1, b.lambda2, b.lambda3, b.lambda4, b.lambda, b.delta11, b.delta12,
                       b.delta21, b.delta22})
        os << ',' << format_double(v);
      os << '\n';
    }
  return 0;
}

int invert_cmd(const Context& cx) {
  const RunConfig& c = cx.cfg;
  validate_ladder(c.ladder);
  const FieldPtr field = make_field(c.field);
  const int n = field->dimension();
  const LineSet lines = n == 2 ? planar_line_set(c.invert.angles, c.invert.offsets, c.invert.max_offset)
                               : slab_line_set(c.invert.angles, c.invert.offsets, c.invert.max_offset, c.grid.L, c.grid.N);
  ReconstructionOptions ro;
  ro.fbp = fbp(c);
  ro.flagged_quota = c.invert.flagged_quota;
  ro.asymptotics = asymptotics(c);
  ExtrapolationOptions ext;
  ext.tolerance = c.tolerances.extrapolation;

  auto sweep = [&] {
    if (!c.invert.sweep_file.empty()) {
      std::ifstream in(c.invert.sweep_file);
      if (!in) throw ConfigError("cannot read sweep file '" + c.invert.sweep_file + "'");
      EnergySweep sw = read_sweep_csv(in);
      if (sw.ladder != c.ladder) throw ConfigError("cached sweep ladder differs from the configured ladder");
      cx.log << "loaded sweep from " << c.invert.sweep_file << '\n';
      return sw;
    }
    EnergySweep sw = generate_sweep(*field, lines, c.ladder, integration(c), c.threads);
    std::ofstream os = cx.open("sweep.csv");
    write_sweep_csv(os, sw);
    return sw;
  };

  ReconstructionReport rep;
  if (c.invert.mode == "exact") {
    rep = reconstruct_from_limits(exact_limits(*field, lines, ro.asymptotics, c.threads), ro, field.get());
  } else if (c.invert.mode == "a") {
    rep = reconstruct_from_a(sweep(), ro, field.get(), ext);
  } else {
    const ScaledField known_B(field, 0, 1);
    rep = reconstruct_V_from_b(sweep(), known_B, ro, field.get(), ext);
  }
  json j{{"mode", c.invert.mode},
         {"dimension", n},
         {"flagged_lines", rep.flagged_lines},
         {"max_extrapolation_residual", rep.max_extrapolation_residual},
         {"notes", rep.notes}};
  if (rep.has_B) {
    j["B_error"] = norms_json(rep.B_error);
    cx.write_grid("B.csv", rep.B);
    cx.write_grid("B_truth.csv", rep.B_truth);
  }
  if (rep.has_gradV) {
    j["gradV_error"] = norms_json(rep.gradV_error);
    cx.write_grid("gradV.csv", rep.gradV);
    cx.write_grid("gradV_truth.csv", rep.gradV_truth);
  }
  if (rep.has_V) {
    j["V_error"] = norms_json(rep.V_error);
    cx.write_grid("V.csv", rep.V);
    cx.write_grid("V_truth.csv", rep.V_truth);
  }
  cx.write_json("report.json", j);
  if (rep.has_B) cx.log << "B relative L2 error " << rep.B_error.total_relative_l2 << '\n';
  if (rep.has_gradV) cx.log << "grad V relative L2 error " << rep.gradV_error.total_relative_l2 << '\n';
  if (rep.has_V) cx.log << "V relative L2 error " << rep.V_error.total_relative_l2 << '\n';
  return 0;
}

int counterexample_cmd(const Context& cx) {
  const RunConfig& c = cx.cfg;
  CounterexampleOptions opt;
  opt.fbp.threads = c.threads;
  const CounterexampleBundle b = build_bundle(opt);
  const EqualityReport r = verify_equality(b, c.counterexample.angles, c.counterexample.offsets,
                                           c.counterexample.max_offset, asymptotics(c), c.threads);
  {
    std::ofstream os = cx.open("profiles.csv");
    os << "s,f1,f2,F1,F2,V\n";
    const double h = b.f1->spacing();
    for (std::size_t k = 0; k < b.f1->node_count(); ++k) {
      const double s = h * double(k);
      os << format_double(s) << ',' << format_double(b.f1->node_values()[k]) << ','
         << format_double(b.f2->node_values()[k]) << ',' << format_double(tail_primitive(*b.f1, s)) << ','
         << format_double(tail_primitive(*b.f2, s)) << ',' << format_double(b.V_profile->node_values()[k]) << '\n';
    }
  }
  {
    std::ofstream os = cx.open("even_profiles.csv");
    os << "q,f_tilde1,f_tilde2,PV\n";
    for (int l = 0; l < b.PV.I; ++l) {
      const double q = b.PV.q(l);
      os << format_double(q) << ',' << format_double((*b.g1)(q)) << ',' << format_double((*b.g2)(q)) << ','
         << format_double(b.PV.at(0, l)) << '\n';
    }
  }
  cx.write_grid("V_grid.csv", b.V_fbp);
  const bool equal = r.max_residual <= 1e-6;
  cx.write_json("report.json", {{"angles", r.angles},
                                {"offsets", r.offsets},
                                {"max_residual", r.max_residual},
                                {"max_residual_theta", r.max_residual_theta},
                                {"max_residual_perp", r.max_residual_perp},
                                {"W22_scale", r.scale},
                                {"max_closed_form_gap", r.max_closed_form_gap},
                                {"max_W21", r.max_W21},
                                {"B_sup_difference", b.B_sup_difference},
                                {"B1_sup", b.B1_sup},
                                {"V_sup", b.V_sup},
                                {"integral_f1", b.integral_f1},
                                {"integral_f2", b.integral_f2},
                                {"FF1", b.FF1},
                                {"FF2", b.FF2},
                                {"abel_residual1", b.abel_residual1},
                                {"abel_residual2", b.abel_residual2},
                                {"PV_closed_form_gap", b.PV_closed_form_gap},
                                {"V_fbp_relative_l2", b.V_fbp_error},
                                {"B_differ", r.B_differ},
                                {"V_nonzero", r.V_nonzero},
                                {"W22_equal", equal}});
  cx.log << "W22 residual " << r.max_residual << ", closed form gap " << r.max_closed_form_gap << '\n';
  if (!r.V_nonzero) throw NumericError("counterexample: V is not certified nonzero");
  if (!r.B_differ) throw NumericError("counterexample: B_1 and B_2 do not differ");
  return 0;
}

int small_angle_cmd(const Context& cx) {
  const RunConfig& c = cx.cfg;
  const FieldPtr field = make_field(c.field);
  struct Case {
    double s, offset, phi;
  };
  std::vector<Case> cases;
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> angle(0.0, 2 * pi);
  for (double s : c.small_angle.speeds)
    for (double x : c.small_angle.offsets)
      for (int d = 0; d < c.small_angle.directions; ++d) cases.push_back({s, x, angle(rng)});
  std::vector<SmallAngleReport> reps(cases.size());
  parallel_for(cases.size(), [&](std::size_t k) {
    const Line line = Line::planar(cases[k].phi, cases[k].offset);
    reps[k] = verify_small_angle_estimates(*field, cases[k].s * line.theta, line.x);
  });
  std::ofstream os = cx.open("small_angle.csv");
  os << "s,offset,phi,admissible,check,lhs,rhs,holds\n";
  bool admissible = true, hold = true;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const std::string head = format_double(cases[k].s) + ',' + format_double(cases[k].offset) + ',' +
                             format_double(cases[k].phi) + ',' + (reps[k].admissible ? "1" : "0");
    admissible = admissible && reps[k].admissible;
    if (reps[k].checks.empty()) os << head << ",,,,0\n";
    for (const InequalityCheck& ch : reps[k].checks) {
      os << head << ',' << ch.name << ',' << format_double(ch.lhs) << ',' << format_double(ch.rhs) << ','
         << (ch.holds ? 1 : 0) << '\n';
      hold = hold && ch.holds;
    }
  }
  if (!admissible)
    throw DomainError("speed below the small-angle thresholds for at least one case; see small_angle.csv");
  if (!hold) throw NumericError("a small-angle inequality failed; see small_angle.csv");
  cx.log << cases.size() << " cases, all inequalities hold\n";
  return 0;
}

}  // namespace

int run_command(const std::string& command, const RunConfig& cfg, std::ostream& log, std::ostream& err) {
  try {
    cfg.validate();
    set_default_threads(cfg.threads);
    Context cx{cfg, log, config_hash(cfg), std::filesystem::path(cfg.out)};
    std::error_code ec;
    std::filesystem::create_directories(cx.dir, ec);
    if (ec) throw DomainError("cannot create output directory '" + cfg.out + "': " + ec.message());
    if (command == "simulate") return simulate(cx);
    if (command == "asymptotics") return asymptotics_cmd(cx);
    if (command == "bounds") return bounds_cmd(cx);
    if (command == "invert") return invert_cmd(cx);
    if (command == "counterexample") return counterexample_cmd(cx);
    if (command == "verify-small-angle") return small_angle_cmd(cx);
    throw ConfigError("unknown command '" + command + "'");
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace emscat
