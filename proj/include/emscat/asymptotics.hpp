#pragma once

#include "emscat/fields.hpp"
#include "emscat/line.hpp"

#include <vector>

namespace emscat {

// High-energy limit functionals on one line, with the separate contributions
// kept for diagnostics. "split" means the split double integral
//   int_{-inf}^0 int_{-inf}^tau g - int_0^inf int_tau^inf g.
struct AsymptoticTerms {
  Line line;
  Vec W11 = Vec::Zero();
  Vec W12 = Vec::Zero();
  Vec W21 = Vec::Zero();
  Vec W22 = Vec::Zero();

  Vec xray_gradV = Vec::Zero();        // P(grad V)
  Vec magnetic_full = Vec::Zero();     // int B(tau) C(tau), C = int_{-inf}^tau B theta
  Vec omega1 = Vec::Zero();            // sum_k theta_k Omega_{1,.,k}
  Vec split_minus_gradV = Vec::Zero(); // split of -grad V
  Vec magnetic_split = Vec::Zero();    // split of B(tau) C(tau)
  Vec omega2 = Vec::Zero();            // sum_k theta_k Omega_{2,.,k}

  double error_estimate = 0;  // change under panel refinement (when requested)
  double tail_estimate = 0;
};

struct FiniteEnergyTerms {
  double s = 0;
  Line line;  // (v_hat, x)
  Vec w1 = Vec::Zero();
  Vec w2 = Vec::Zero();
  Vec born1 = Vec::Zero();
  Vec born2 = Vec::Zero();
  Vec omega3 = Vec::Zero();  // sum_k v_hat_k Omega_{3,.,k}
  Vec omega4 = Vec::Zero();  // sum_k v_hat_k Omega_{4,.,k}
  double error_estimate = 0;
};

struct BornTerms {
  double s = 0;
  Line line;
  Vec w1 = Vec::Zero();
  Vec w2 = Vec::Zero();
};

struct SymmetrizedBorn {
  Vec xray_gradV = Vec::Zero();        // P(grad V)(theta, x)
  Vec magnetic_line = Vec::Zero();     // int B(tau theta + x) theta
  Vec magnetic_split = Vec::Zero();    // split of B theta
  Vec split_minus_gradV = Vec::Zero(); // split of -grad V
};

struct AsymptoticsOptions {
  QuadratureControls quadrature;
  bool estimate_error = false;  // rerun at half the panel width and report the change
  int epsilon_nodes = 8;        // Gauss-Legendre nodes for the displacement average
};

AsymptoticTerms limit_terms(const Field& field, const Line& line, const AsymptoticsOptions& opt = {});

struct VelocityLimits {
  Vec W11, W12;
};
struct PositionLimits {
  Vec W21, W22;
};
VelocityLimits limit_terms_velocity(const Field& field, const Line& line,
                                    const AsymptoticsOptions& opt = {});
PositionLimits limit_terms_position(const Field& field, const Line& line,
                                    const AsymptoticsOptions& opt = {});

// v_minus != 0, v_minus . x_minus = 0.
FiniteEnergyTerms finite_energy_terms(const Field& field, const Vec& v_minus, const Vec& x_minus,
                                      const AsymptoticsOptions& opt = {});

BornTerms born_leading(const Field& field, double s, const Line& line,
                       const AsymptoticsOptions& opt = {});

// plus evaluated at (s, theta, x), minus at (s, -theta, x).
SymmetrizedBorn symmetrize(const BornTerms& plus, const BornTerms& minus);

}  // namespace emscat
