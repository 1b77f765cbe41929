#pragma once

#include "emscat/asymptotics.hpp"
#include "emscat/dynamics.hpp"
#include "emscat/xray.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace emscat {

// Sinogram geometry of one planar line family.
struct LineFamily {
  int J = 256;
  int I = 128;
  double Q = 5;
  PlaneFamily plane;
};

// n = 2: one family covering T S^1. n = 3: for each coordinate pair (0,1), (0,2),
// (1,2) one family per layer of the output grid (normal offsets = grid coordinates).
struct LineSet {
  int dimension = 2;
  std::vector<LineFamily> families;
  std::size_t lines() const;
};

LineSet planar_line_set(int J, int I, double Q);
LineSet slab_line_set(int J, int I, double Q, double L, int N);

// Scattering data on every line of the set for every energy of a geometric ladder.
struct EnergySweep {
  LineSet lines;
  std::vector<double> ladder;
  // Indexed [family][(e * J + j) * I + l].
  std::vector<std::vector<ScatteringDatum>> data;

  const ScatteringDatum& at(std::size_t f, std::size_t e, int j, int l) const;
  std::size_t flagged() const;
};

// Ladder must have >= 3 positive, strictly geometric increasing entries.
void validate_ladder(const std::vector<double>& ladder);

EnergySweep generate_sweep(const Field& field, const LineSet& lines, const std::vector<double>& ladder,
                           const IntegrationControls& controls = {}, int threads = 0);

// Per family: W11, W12, W21, W22 as arity-3 sinograms over the family's lines.
struct FamilyLimits {
  LineFamily family;
  Sinogram W11, W12, W21, W22;
  std::vector<double> residual;   // spread of pair estimates, per line
  std::vector<char> flagged;      // residual above tolerance or flagged input data
};

struct LimitEstimates {
  int dimension = 2;
  std::vector<FamilyLimits> families;
  std::size_t flagged() const;
  double max_residual() const;
};

struct ExtrapolationOptions {
  // Relative tolerance on the spread of two-term estimates across ladder pairs;
  // lines above it are flagged.
  double tolerance = 0.05;
};

// Two-term Richardson model a(s) = c1 + c2/s (and s b(s) likewise) solved on
// consecutive ladder pairs. The estimate comes from the highest pair; the spread
// across pairs is the residual.
struct TwoTermFit {
  Vec c1 = Vec::Zero();
  Vec c2 = Vec::Zero();
  double spread = 0;
};
TwoTermFit richardson_two_term(const std::vector<double>& s, const std::vector<Vec>& values);

// Sweep cache. Line geometry, ladder and every datum, doubles in shortest
// round-trip form; read_sweep_csv(write_sweep_csv(s)) reproduces s.
void write_sweep_csv(std::ostream& os, const EnergySweep& sweep);
EnergySweep read_sweep_csv(std::istream& is);

LimitEstimates extract_limits(const EnergySweep& sweep, const ExtrapolationOptions& opt = {});

// Same layout from the asymptotics module directly (no dynamics, no extrapolation).
LimitEstimates exact_limits(const Field& field, const LineSet& lines, const AsymptoticsOptions& opt = {},
                            int threads = 0);

struct ErrorNorms {
  std::vector<double> relative_l2;   // per component
  std::vector<double> relative_max;  // per component
  double total_relative_l2 = 0;      // all components together
  double total_relative_max = 0;
};

// Compares matching grids. Relative to the truth norms.
ErrorNorms error_report(const GridFunction& truth, const GridFunction& recon);

struct ReconstructionOptions {
  FbpOptions fbp;
  double flagged_quota = 0.02;  // abort when a larger fraction of lines is flagged
  AsymptoticsOptions asymptotics;
};

struct ReconstructionReport {
  GridFunction B;             // arity 1 (n = 2) or 3 (n = 3)
  GridFunction gradV;         // arity n
  GridFunction V;             // scalar
  GridFunction B_truth, gradV_truth, V_truth;
  ErrorNorms B_error, gradV_error, V_error;
  bool has_B = false, has_gradV = false, has_V = false;
  std::size_t flagged_lines = 0;
  double max_extrapolation_residual = 0;
  std::vector<std::string> notes;
};

// Truth grids of B (pair components), grad V and V.
GridFunction magnetic_grid(const Field& field, const FbpOptions& fbp);
GridFunction gradient_grid(const Field& field, const FbpOptions& fbp);
GridFunction potential_grid(const Field& field, const FbpOptions& fbp);

// B from W11 by the plane formula, then -P(grad V) = W12 - (magnetic part of W12
// evaluated on the reconstructed B), inverted componentwise.
ReconstructionReport reconstruct_from_limits(const LimitEstimates& limits, const ReconstructionOptions& opt,
                                             const Field* truth = nullptr);
ReconstructionReport reconstruct_from_a(const EnergySweep& sweep, const ReconstructionOptions& opt,
                                        const Field* truth = nullptr, const ExtrapolationOptions& ext = {});

// V from W22 with B known: -PV = (W22 - W22(0, B)) . theta.
ReconstructionReport reconstruct_V_from_limits(const LimitEstimates& limits, const Field& known_B,
                                               const ReconstructionOptions& opt, const Field* truth = nullptr);
ReconstructionReport reconstruct_V_from_b(const EnergySweep& sweep, const Field& known_B,
                                          const ReconstructionOptions& opt, const Field* truth = nullptr,
                                          const ExtrapolationOptions& ext = {});

}  // namespace emscat
