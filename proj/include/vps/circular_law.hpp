// Circular-law detection for block fully indecomposable profiles.
#pragma once

#include "vps/measures.hpp"
#include "vps/mesolver.hpp"
#include "vps/profiles.hpp"

#include <numbers>

namespace vps {

struct CircularLawReport {
  bool circular = false;
  double max_deviation = 0.0;       // max_i |rho(V) q_i(0) q~_i(0) - 1|
  double density_zero_ratio = 0.0;  // f(0) pi rho(V); >= 1, with equality iff circular
  double density_zero = 0.0;
  double rho = 0.0;
};

/// The profile yields the circular law iff rho(V) q_i(0) q~_i(0) = 1 for
/// all i, i.e. V = D^-1 S D with S a multiple of a doubly stochastic matrix.
/// For rho(V) = 1 this is q_i(0) q~_i(0) = 1.
inline CircularLawReport circular_law_test(const VarianceProfile& p, double tol, const SolverConfig& cfg = {}) {
  CircularLawReport rep;
  rep.rho = spectral_radius(p);
  const DensityAtZero f0 = density_at_zero(p, cfg);
  const Vector qq = f0.solution.q.cwiseProduct(f0.solution.q_tilde);
  rep.max_deviation = (rep.rho * qq.array() - 1.0).abs().maxCoeff();
  rep.circular = rep.max_deviation <= tol;
  rep.density_zero = f0.value;
  rep.density_zero_ratio = f0.value * std::numbers::pi * rep.rho;
  return rep;
}

}  // namespace vps
