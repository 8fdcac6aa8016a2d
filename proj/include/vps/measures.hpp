// Deterministic equivalent measure from a solved curve: CDF, density (exact
// or finite-difference), atom and density at zero, lower-bound diagnostics.
#pragma once

#include "vps/core.hpp"
#include "vps/mesolver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace vps {

enum class DensityMode { exact, finite_difference };

inline DensityMode parse_density_mode(const std::string& s) {
  if (s == "exact") return DensityMode::exact;
  if (s == "fd") return DensityMode::finite_difference;
  throw Error(Errc::Parse, "density mode must be 'exact' or 'fd', got '" + s + "'");
}

struct GridSpec {
  double start = 0.0;
  double stop = 0.0;
  int count = 0;

  std::vector<double> points() const {
    if (count < 1 || !(start > 0.0) || !(stop >= start))
      throw Error(Errc::BadParameter, "grid needs 0 < start <= stop and count >= 1");
    std::vector<double> g(count);
    for (int k = 0; k < count; ++k)
      g[k] = count == 1 ? start : start + (stop - start) * static_cast<double>(k) / (count - 1);
    return g;
  }
};

/// "start:stop:count".
inline GridSpec parse_grid(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw Error(Errc::Parse, "grid must be start:stop:count, got '" + text + "'");
  GridSpec g{parse_double(parts[0]), parse_double(parts[1]), static_cast<int>(parse_double(parts[2]))};
  g.points();
  return g;
}

/// count uniform points on (0, 1.05 sqrt(rho)].
inline std::vector<double> default_grid(double rho, int count = 200) {
  std::vector<double> g(count);
  const double top = 1.05 * std::sqrt(rho);
  for (int k = 0; k < count; ++k) g[k] = top * (k + 1) / count;
  return g;
}

/// F(s) = 1 - <q(s), V q~(s)> / n, clamped to [0, 1]; NaN at failed points.
inline std::vector<double> cdf(const MECurve& curve) {
  std::vector<double> F(curve.s_grid.size());
  for (std::size_t k = 0; k < F.size(); ++k) {
    if (!curve.converged(k)) {
      F[k] = std::numeric_limits<double>::quiet_NaN();
    } else if (curve.solutions[k].is_trivial()) {
      F[k] = 1.0;
    } else {
      F[k] = std::clamp(1.0 - curve.inner(k), 0.0, 1.0);
    }
  }
  return F;
}

/// f = -(1 / (pi n)) [<dq, V q~> + <q, V dq~>] at a nontrivial solution.
inline double density_from_solution(const VarianceProfile& p, const MESolution& sol) {
  if (sol.is_trivial()) return 0.0;
  const DerivativeS2 d = derivative_s2(p, sol, sol.s);
  const Matrix& v = p.normalized();
  const double dinner = d.dq.dot(v * sol.q_tilde) + sol.q.dot(v * d.dq_tilde);
  return -dinner / (std::numbers::pi * p.n());
}

namespace detail {
inline std::optional<MESolution> nearest_nontrivial(const MECurve& curve, double s) {
  std::optional<MESolution> best;
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < curve.s_grid.size(); ++k) {
    if (!curve.converged(k) || curve.solutions[k].is_trivial()) continue;
    const double g = std::abs(curve.s_grid[k] - s);
    if (g < gap) {
      gap = g;
      best = curve.solutions[k];
    }
  }
  return best;
}
}  // namespace detail

/// Density at |z| in (0, sqrt(rho)). Exact mode solves at |z| (seeded from
/// the nearest curve point) and uses the s^2-derivative system; fd mode
/// takes a central difference of F over +-h, h = 1e-4 sqrt(rho).
inline double density(const MECurve& curve, double z, DensityMode mode, const SolverConfig& cfg = {}) {
  const double edge = std::sqrt(curve.rho);
  if (!(z > 0.0) || !(z < edge))
    throw Error(Errc::OutsideSupport, "|z| = " + format_double(z) + " outside (0, " + format_double(edge) + ")");
  const auto warm = detail::nearest_nontrivial(curve, z);
  if (mode == DensityMode::exact) {
    const MESolution sol = anneal_to_limit(curve.profile, z, cfg, warm, curve.rho);
    return density_from_solution(curve.profile, sol);
  }
  const double h = std::min({1e-4 * edge, 0.5 * z, 0.5 * (edge - z)});
  auto F = [&](double s) {
    const MESolution sol = anneal_to_limit(curve.profile, s, cfg, warm, curve.rho);
    return sol.is_trivial() ? 1.0 : 1.0 - inner_product(curve.profile, sol);
  };
  return (F(z + h) - F(z - h)) / (2.0 * h) / (2.0 * std::numbers::pi * z);
}

/// Exact-mode density at every grid point; 0 in the trivial regime.
inline std::vector<double> density_exact_grid(const MECurve& curve) {
  std::vector<double> f(curve.s_grid.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (!curve.converged(k)) {
      f[k] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    try {
      f[k] = std::max(0.0, density_from_solution(curve.profile, curve.solutions[k]));
    } catch (const Error& e) {
      if (e.code() != Errc::RankDeficient) throw;
      f[k] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return f;
}

/// f = (1 / pi) dF/d(s^2) from a three-point Lagrange stencil in s^2
/// (shifted inward at the ends); 0 at and beyond edge.
inline std::vector<double> fd_radial_density(const std::vector<double>& s, const std::vector<double>& F, double edge) {
  const std::size_t m = s.size();
  std::vector<double> f(m, 0.0);
  if (m < 2) return f;
  for (std::size_t k = 0; k < m; ++k) {
    if (s[k] >= edge) continue;
    const double x = s[k] * s[k];
    double dF;
    if (m == 2) {
      dF = (F[1] - F[0]) / (s[1] * s[1] - s[0] * s[0]);
    } else {
      const std::size_t i = std::clamp<std::size_t>(k, 1, m - 2) - 1;
      const double a = s[i] * s[i], b = s[i + 1] * s[i + 1], c = s[i + 2] * s[i + 2];
      dF = F[i] * (2 * x - b - c) / ((a - b) * (a - c)) + F[i + 1] * (2 * x - a - c) / ((b - a) * (b - c)) +
           F[i + 2] * (2 * x - a - b) / ((c - a) * (c - b));
    }
    f[k] = std::max(0.0, dF / std::numbers::pi);
  }
  return f;
}

inline std::vector<double> density_fd_grid(const MECurve& curve) {
  return fd_radial_density(curve.s_grid, cdf(curve), std::sqrt(curve.rho));
}

/// lim_{s -> 0} F(s), extrapolated linearly in s^2 from the two smallest
/// converged grid points.
inline double atom_at_zero(const MECurve& curve) {
  const auto F = cdf(curve);
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < F.size() && idx.size() < 2; ++k)
    if (curve.converged(k)) idx.push_back(k);
  if (idx.size() < 2) throw Error(Errc::InsufficientGrid, "need two converged grid points near zero");
  const double a = curve.s_grid[idx[0]] * curve.s_grid[idx[0]];
  const double b = curve.s_grid[idx[1]] * curve.s_grid[idx[1]];
  const double atom = F[idx[0]] - a * (F[idx[1]] - F[idx[0]]) / (b - a);
  return std::clamp(atom, 0.0, 1.0);
}

struct DensityAtZero {
  double value = 0.0;        // (1 / (pi n)) sum_i q_i(0) q~_i(0)
  double cross_check = 0.0;  // (1 / (pi n)) sum_i 1 / ((V^T q(0))_i (V q~(0))_i)
  MESolution solution;
};

inline DensityAtZero density_at_zero(const VarianceProfile& p, const SolverConfig& cfg = {}) {
  DensityAtZero out;
  out.solution = solve_at_zero(p, cfg);
  const Matrix& v = p.normalized();
  const Vector a = v.transpose() * out.solution.q;
  const Vector b = v * out.solution.q_tilde;
  const double n = p.n();
  out.value = out.solution.q.dot(out.solution.q_tilde) / (std::numbers::pi * n);
  out.cross_check = (a.cwiseProduct(b)).cwiseInverse().sum() / (std::numbers::pi * n);
  return out;
}

/// Raw lower-bound ratio (sum Psi^-1 q q~) / (sum Psi q^2 q~^2), Psi at t = 0.
inline double density_lower_bound(const VarianceProfile& p, const MESolution& sol, double s) {
  if (sol.is_trivial()) throw Error(Errc::BadParameter, "lower bound requires the nontrivial solution");
  const Vector ps = psi(p, sol.q, sol.q_tilde, s, 0.0);
  const Vector qq = sol.q.cwiseProduct(sol.q_tilde);
  const double num = qq.cwiseQuotient(ps).sum();
  const double den = ps.cwiseProduct(qq).cwiseProduct(qq).sum();
  return num / den;
}

/// Left limit of the density at the support edge sqrt(rho); the density
/// itself is 0 there by convention. Quadratic extrapolation from exact
/// densities at sqrt(rho) (1 - j delta), j = 1, 2, 3.
inline double edge_density(const VarianceProfile& p, const SolverConfig& cfg = {}, double delta = 1e-2) {
  const double rho = spectral_radius(p);
  const double edge = std::sqrt(rho);
  double f[3];
  std::optional<MESolution> warm;
  for (int j = 0; j < 3; ++j) {
    const MESolution sol = anneal_to_limit(p, edge * (1.0 - (j + 1) * delta), cfg, warm, rho);
    f[j] = density_from_solution(p, sol);
    warm = sol;
  }
  return 3.0 * f[0] - 3.0 * f[1] + f[2];
}

/// Assembles grid, CDF, exact density and atom into one measure.
inline RadialMeasure build_measure(const VarianceProfile& p, const std::optional<GridSpec>& grid,
                                   const SolverConfig& cfg = {}) {
  const double rho = spectral_radius(p);
  const auto s_grid = grid ? grid->points() : default_grid(rho);
  const MECurve curve = solve_curve(p, s_grid, cfg);
  for (std::size_t k = 0; k < s_grid.size(); ++k)
    if (!curve.converged(k)) throw Error(Errc::NoConvergence, curve.failures[k]);
  RadialMeasure m;
  m.s_grid = s_grid;
  m.F = cdf(curve);
  m.f = density_exact_grid(curve);
  m.support_radius = std::sqrt(rho);
  m.atom_at_zero = s_grid.size() >= 2 ? atom_at_zero(curve) : 0.0;
  for (std::size_t k = 0; k < s_grid.size(); ++k) {
    if (s_grid[k] >= m.support_radius) {
      m.F[k] = 1.0;
      m.f[k] = 0.0;
    }
  }
  return m;
}

/// 2 pi int f(s) s ds (trapezoid from s = 0) plus the atom.
inline double total_mass(const RadialMeasure& m) {
  double mass = 0.0, s0 = 0.0, g0 = 0.0;
  for (std::size_t k = 0; k < m.s_grid.size(); ++k) {
    const double g = m.f[k] * m.s_grid[k];
    mass += 0.5 * (g + g0) * (m.s_grid[k] - s0);
    s0 = m.s_grid[k];
    g0 = g;
  }
  return 2.0 * std::numbers::pi * mass + m.atom_at_zero;
}

// ---------------------------------------------------------------------------
// Density CSV: s,F,f_exact,f_fd,lower_bound_ratio

struct DensityTable {
  std::vector<double> s;
  std::vector<double> F;
  std::vector<double> f_exact;
  std::vector<double> f_fd;
  std::vector<double> lower_bound_ratio;

  std::size_t size() const { return s.size(); }
};

/// Table for a solved curve. f_exact is NaN in fd mode; the lower-bound
/// ratio is NaN where the solution is trivial or failed.
inline DensityTable density_table(const MECurve& curve, DensityMode mode) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::size_t m = curve.s_grid.size();
  DensityTable t;
  t.s = curve.s_grid;
  t.F = cdf(curve);
  t.f_fd = density_fd_grid(curve);
  t.f_exact = mode == DensityMode::exact ? density_exact_grid(curve) : std::vector<double>(m, nan);
  t.lower_bound_ratio.assign(m, nan);
  for (std::size_t k = 0; k < m; ++k) {
    if (!curve.converged(k)) t.f_fd[k] = nan;
    if (curve.converged(k) && !curve.solutions[k].is_trivial())
      t.lower_bound_ratio[k] = density_lower_bound(curve.profile, curve.solutions[k], curve.s_grid[k]);
  }
  return t;
}

inline void write_density_csv(std::ostream& out, const DensityTable& t) {
  out << "s,F,f_exact,f_fd,lower_bound_ratio\n";
  for (std::size_t k = 0; k < t.size(); ++k)
    out << format_double(t.s[k]) << ',' << format_double(t.F[k]) << ',' << format_double(t.f_exact[k]) << ','
        << format_double(t.f_fd[k]) << ',' << format_double(t.lower_bound_ratio[k]) << '\n';
}

inline DensityTable read_density_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "s,F,f_exact,f_fd,lower_bound_ratio")
    throw Error(Errc::Parse, "unexpected density CSV header");
  DensityTable t;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto c = split(line, ',');
    if (c.size() != 5) throw Error(Errc::Parse, "density CSV row needs 5 columns");
    t.s.push_back(parse_double(c[0]));
    t.F.push_back(parse_double(c[1]));
    t.f_exact.push_back(parse_double(c[2]));
    t.f_fd.push_back(parse_double(c[3]));
    t.lower_bound_ratio.push_back(parse_double(c[4]));
  }
  return t;
}

/// Radial measure from a density table. Without a known atom it is
/// extrapolated linearly in s^2; without a known support the CDF is held at
/// its last grid value beyond the grid.
inline RadialMeasure measure_from_table(const DensityTable& t, std::optional<double> atom = std::nullopt,
                                        std::optional<double> support = std::nullopt) {
  if (t.size() < 2) throw Error(Errc::InsufficientGrid, "density table needs at least two rows");
  RadialMeasure m;
  m.s_grid = t.s;
  m.F = t.F;
  m.f = t.f_exact;
  for (std::size_t k = 0; k < t.size(); ++k)
    if (std::isnan(m.f[k])) m.f[k] = t.f_fd[k];
  if (atom) {
    m.atom_at_zero = *atom;
  } else {
    const double a = t.s[0] * t.s[0], b = t.s[1] * t.s[1];
    m.atom_at_zero = std::clamp(t.F[0] - a * (t.F[1] - t.F[0]) / (b - a), 0.0, 1.0);
  }
  m.support_radius = support ? *support : std::numeric_limits<double>::infinity();
  return m;
}

}  // namespace vps
