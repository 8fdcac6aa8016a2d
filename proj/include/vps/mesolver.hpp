// Master Equation solver: annealed, averaged fixed-point iteration on the
// regularized system, its t -> 0 limit, the s = 0 boundary solution and the
// exact derivative with respect to s^2.
#pragma once

#include "vps/core.hpp"
#include "vps/profiles.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace vps {

/// Called with every converged solution produced by the solver. Used by test
/// harnesses to audit invariants across a whole run; must be thread-safe when
/// curves are solved in cold-start parallel mode.
using SolveObserver = std::function<void(const VarianceProfile&, const MESolution&)>;

inline SolveObserver& solve_observer() {
  static SolveObserver observer;
  return observer;
}

namespace detail {
inline void notify(const VarianceProfile& p, const MESolution& sol) {
  if (const auto& obs = solve_observer()) obs(p, sol);
}
}  // namespace detail

/// Psi_i = 1 / (s^2 + ((V q~)_i + t)((V^T q)_i + t)).
inline Vector psi(const VarianceProfile& p, const Vector& q, const Vector& q_tilde, double s, double t) {
  const Matrix& v = p.normalized();
  const Vector a = (v.transpose() * q).array() + t;
  const Vector b = (v * q_tilde).array() + t;
  const Vector denom = (s * s + (a.array() * b.array())).matrix();
  if (!(denom.minCoeff() > 0.0)) throw Error(Errc::DivisionByZero, "s^2 + (Vq~+t)(V^T q+t) vanishes");
  return denom.cwiseInverse();
}

namespace detail {

struct StageResult {
  long iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

inline void balance(Vector& r, Vector& rt) {
  const double sr = r.sum(), srt = rt.sum();
  if (sr > 0.0 && srt > 0.0) {
    const double c = std::sqrt(srt / sr);
    r *= c;
    rt /= c;
  }
}

// Averaged iteration r <- (1 - w) r + w I(r, s, t) at fixed (s, t). After each
// step the pair is rebalanced to sum(r) == sum(r~): the fixed point satisfies
// this identity, and at t = 0 it removes the neutral direction r -> c r,
// r~ -> r~ / c of the map. Convergence is measured on the unbalanced map.
inline StageResult run_stage(const Matrix& v, double s, double t, const SolverConfig& cfg, Vector& r, Vector& rt) {
  const Eigen::Index n = v.rows();
  Vector a(n), b(n), gr(n), grt(n);
  const double w = cfg.averaging_weight;
  const double s2 = s * s;
  StageResult out;
  balance(r, rt);
  for (long it = 0; it < cfg.max_iters; ++it) {
    a.noalias() = v.transpose() * r;
    b.noalias() = v * rt;
    a.array() += t;
    b.array() += t;
    const auto denom = s2 + a.array() * b.array();
    gr = (a.array() / denom).matrix();
    grt = (b.array() / denom).matrix();
    const double res = std::max((gr - r).cwiseAbs().maxCoeff(), (grt - rt).cwiseAbs().maxCoeff());
    const double scale = std::max({1.0, r.cwiseAbs().maxCoeff(), rt.cwiseAbs().maxCoeff()});
    out.iterations = it;
    out.residual = res;
    if (!std::isfinite(res)) return out;
    if (res <= cfg.fixed_point_tol * scale) {
      out.converged = true;
      return out;
    }
    r = (1.0 - w) * r + w * gr;
    rt = (1.0 - w) * rt + w * grt;
    balance(r, rt);
  }
  out.iterations = cfg.max_iters;
  return out;
}

inline MESolution zero_solution(int n, double s) {
  MESolution sol;
  sol.s = s;
  sol.t = 0.0;
  sol.q = Vector::Zero(n);
  sol.q_tilde = Vector::Zero(n);
  return sol;
}

inline std::vector<double> schedule(const SolverConfig& cfg) {
  std::vector<double> ts;
  for (double t = cfg.t_initial; t > cfg.t_min; t *= cfg.t_decay) ts.push_back(t);
  ts.push_back(cfg.t_min);
  return ts;
}

}  // namespace detail

/// Fixed point of the regularized Master Equations at (s, t), t > 0.
inline MESolution solve_regularized(const VarianceProfile& p, double s, double t, const SolverConfig& cfg,
                                    const std::optional<MESolution>& warm_start = std::nullopt) {
  cfg.validate();
  if (!(t > 0.0)) throw Error(Errc::BadParameter, "regularization t must be > 0");
  if (!(s >= 0.0)) throw Error(Errc::BadParameter, "s must be >= 0");
  const int n = p.n();
  Vector r = Vector::Ones(n), rt = Vector::Ones(n);
  if (warm_start && !warm_start->is_trivial() && warm_start->q.size() == n) {
    r = warm_start->q;
    rt = warm_start->q_tilde;
  }
  const auto stage = detail::run_stage(p.normalized(), s, t, cfg, r, rt);
  if (!stage.converged)
    throw Error(Errc::NoConvergence, "s=" + format_double(s) + " t=" + format_double(t) + " residual " +
                                         format_double(stage.residual) + " after " +
                                         std::to_string(stage.iterations) + " iterations");
  MESolution sol{s, t, std::move(r), std::move(rt), stage.iterations, stage.residual};
  detail::notify(p, sol);
  return sol;
}

/// q(s) = lim_{t -> 0} r(s, t). Anneals t geometrically from t_initial to
/// t_min (or runs the t_min stage only when warm-started from a nontrivial
/// solution), declares the trivial solution when ||r||_inf < zero_threshold
/// and otherwise polishes at t = 0. If the t = 0 polish fails to converge the
/// t_min solution is returned with t = t_min.
/// `rho` is the spectral radius of V when already known; s >= sqrt(rho)
/// returns the trivial solution directly.
inline MESolution anneal_to_limit(const VarianceProfile& p, double s, const SolverConfig& cfg,
                                  const std::optional<MESolution>& warm_start = std::nullopt,
                                  std::optional<double> rho = std::nullopt) {
  cfg.validate();
  if (!(s > 0.0)) throw Error(Errc::BadParameter, "anneal_to_limit requires s > 0");
  const int n = p.n();
  const double radius2 = rho ? *rho : spectral_radius(p);
  if (s * s >= radius2) {
    MESolution sol = detail::zero_solution(n, s);
    detail::notify(p, sol);
    return sol;
  }
  const Matrix& v = p.normalized();
  Vector r = Vector::Ones(n), rt = Vector::Ones(n);
  std::vector<double> ts;
  if (warm_start && !warm_start->is_trivial() && warm_start->q.size() == n) {
    r = warm_start->q;
    rt = warm_start->q_tilde;
    ts = {cfg.t_min};
  } else {
    ts = detail::schedule(cfg);
  }
  long total = 0;
  detail::StageResult stage;
  for (double t : ts) {
    stage = detail::run_stage(v, s, t, cfg, r, rt);
    total += stage.iterations;
    if (!stage.converged)
      throw Error(Errc::NoConvergence, "annealing stage s=" + format_double(s) + " t=" + format_double(t) +
                                           " residual " + format_double(stage.residual));
  }
  if (std::max(r.cwiseAbs().maxCoeff(), rt.cwiseAbs().maxCoeff()) < cfg.zero_threshold) {
    MESolution sol = detail::zero_solution(n, s);
    sol.iterations = total;
    detail::notify(p, sol);
    return sol;
  }
  Vector r0 = r, rt0 = rt;
  const auto polish = detail::run_stage(v, s, 0.0, cfg, r0, rt0);
  total += polish.iterations;
  MESolution sol;
  sol.s = s;
  sol.iterations = total;
  if (polish.converged) {
    sol.t = 0.0;
    sol.q = std::move(r0);
    sol.q_tilde = std::move(rt0);
    sol.residual = polish.residual;
  } else {
    sol.t = ts.back();
    sol.q = std::move(r);
    sol.q_tilde = std::move(rt);
    sol.residual = stage.residual;
  }
  if (std::max(sol.q.cwiseAbs().maxCoeff(), sol.q_tilde.cwiseAbs().maxCoeff()) < cfg.zero_threshold) {
    sol.q.setZero();
    sol.q_tilde.setZero();
  }
  detail::notify(p, sol);
  return sol;
}

/// Boundary solution q(0), q~(0): anneal at s = 0 and solve the t = 0 system
/// q_i (V q~)_i = 1, q~_i (V^T q)_i = 1 with sum q = sum q~. Profiles with an
/// atom at zero have no such solution and fail with NoConvergence.
inline MESolution solve_at_zero(const VarianceProfile& p, const SolverConfig& cfg) {
  cfg.validate();
  const int n = p.n();
  const Matrix& v = p.normalized();
  Vector r = Vector::Ones(n), rt = Vector::Ones(n);
  long total = 0;
  for (double t : detail::schedule(cfg)) {
    const auto stage = detail::run_stage(v, 0.0, t, cfg, r, rt);
    total += stage.iterations;
    if (!stage.converged)
      throw Error(Errc::NoConvergence, "s=0 annealing stage t=" + format_double(t) + " did not converge");
  }
  const auto polish = detail::run_stage(v, 0.0, 0.0, cfg, r, rt);
  total += polish.iterations;
  if (!polish.converged)
    throw Error(Errc::NoConvergence, "s=0, t=0 system did not converge (residual " +
                                         format_double(polish.residual) + ")");
  const double sink_err = std::max((r.cwiseProduct(v * rt).array() - 1.0).abs().maxCoeff(),
                                   (rt.cwiseProduct(v.transpose() * r).array() - 1.0).abs().maxCoeff());
  if (!(sink_err <= 1e-6))
    throw Error(Errc::NoConvergence, "boundary equations violated by " + format_double(sink_err));
  MESolution sol{0.0, 0.0, std::move(r), std::move(rt), total, polish.residual};
  detail::notify(p, sol);
  return sol;
}

struct DerivativeS2 {
  Vector dq;
  Vector dq_tilde;
  double residual = 0.0;
};

/// d q / d(s^2) from the (2n+1) x 2n system A(s) x = b(s), with
/// A = [I - M(s); (1^T, -1^T)], b = -[Psi q; Psi q~; 0] and
/// M = [[s^2 Psi^2 V^T, -diag(q)^2 V], [-diag(q~)^2 V^T, s^2 Psi^2 V]],
/// solved in the least-squares sense.
inline DerivativeS2 derivative_s2(const VarianceProfile& p, const MESolution& sol, double s) {
  if (sol.is_trivial()) throw Error(Errc::BadParameter, "derivative requires the nontrivial solution");
  if (!(s >= 0.0)) throw Error(Errc::BadParameter, "s must be >= 0");
  const int n = p.n();
  const Matrix& v = p.normalized();
  const Vector ps = psi(p, sol.q, sol.q_tilde, s, 0.0);
  const Vector ps2s2 = (s * s) * ps.cwiseProduct(ps);
  const Vector q2 = sol.q.cwiseProduct(sol.q);
  const Vector qt2 = sol.q_tilde.cwiseProduct(sol.q_tilde);

  Matrix a = Matrix::Zero(2 * n + 1, 2 * n);
  const Matrix vt = v.transpose();
  a.block(0, 0, n, n) = -(ps2s2.asDiagonal() * vt);
  a.block(0, n, n, n) = q2.asDiagonal() * v;
  a.block(n, 0, n, n) = qt2.asDiagonal() * vt;
  a.block(n, n, n, n) = -(ps2s2.asDiagonal() * v);
  a.topRows(2 * n).diagonal().array() += 1.0;
  a.block(2 * n, 0, 1, n).setOnes();
  a.block(2 * n, n, 1, n).setConstant(-1.0);

  Vector b = Vector::Zero(2 * n + 1);
  b.head(n) = -ps.cwiseProduct(sol.q);
  b.segment(n, n) = -ps.cwiseProduct(sol.q_tilde);

  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  const auto& rdiag = qr.matrixR().diagonal();
  const double rmax = std::abs(rdiag[0]);
  const double rmin = std::abs(rdiag[2 * n - 1]);
  if (!(rmin > 1e-13 * rmax))
    throw Error(Errc::RankDeficient, "derivative system is numerically rank deficient at s=" + format_double(s));
  const Vector x = qr.solve(b);
  DerivativeS2 out;
  out.dq = x.head(n);
  out.dq_tilde = x.tail(n);
  out.residual = (a * x - b).norm();
  return out;
}

struct MECurve {
  VarianceProfile profile;
  std::vector<double> s_grid;
  std::vector<MESolution> solutions;
  std::vector<std::string> failures;  // empty string when the point converged
  double rho = 0.0;
  std::optional<MESolution> q0;

  bool converged(std::size_t k) const { return failures[k].empty(); }
  double inner(std::size_t k) const {
    return converged(k) ? inner_product(profile, solutions[k]) : std::numeric_limits<double>::quiet_NaN();
  }
};

struct CurveOptions {
  bool warm_start = true;
  bool with_q0 = false;
  int threads = 0;  // cold-start mode only; 0 means VPS_THREADS or hardware concurrency
};

inline int worker_count(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("VPS_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return std::max(n, 1);
}

/// Solves q(s) on an increasing positive grid. Warm-start mode sweeps from
/// the largest s down, seeding each point with its neighbor; per-point
/// failures are recorded rather than thrown.
inline MECurve solve_curve(const VarianceProfile& p, const std::vector<double>& s_grid, const SolverConfig& cfg,
                           const CurveOptions& opts = {}) {
  cfg.validate();
  for (std::size_t k = 0; k < s_grid.size(); ++k) {
    if (!(s_grid[k] > 0.0)) throw Error(Errc::BadParameter, "grid points must be positive");
    if (k && !(s_grid[k] > s_grid[k - 1])) throw Error(Errc::BadParameter, "grid must be increasing");
  }
  MECurve curve{p, s_grid, {}, {}, spectral_radius(p), std::nullopt};
  const std::size_t m = s_grid.size();
  curve.solutions.resize(m);
  curve.failures.assign(m, std::string());

  auto solve_point = [&](std::size_t k, const std::optional<MESolution>& warm) {
    try {
      curve.solutions[k] = anneal_to_limit(p, s_grid[k], cfg, warm, curve.rho);
    } catch (const Error& e) {
      curve.failures[k] = e.what();
      curve.solutions[k] = detail::zero_solution(p.n(), s_grid[k]);
    }
  };

  if (opts.warm_start) {
    std::optional<MESolution> warm;
    for (std::size_t k = m; k-- > 0;) {
      solve_point(k, warm);
      if (curve.converged(k) && !curve.solutions[k].is_trivial()) warm = curve.solutions[k];
    }
  } else {
    const int workers = std::min<int>(worker_count(opts.threads), static_cast<int>(std::max<std::size_t>(m, 1)));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < m; k += workers) solve_point(k, std::nullopt);
      });
    }
    for (auto& th : pool) th.join();
  }

  if (opts.with_q0) {
    try {
      curve.q0 = solve_at_zero(p, cfg);
    } catch (const Error&) {
      curve.q0.reset();
    }
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Curve CSV: s,t_final,sum_q,sum_qtilde,inner,residual,iterations

struct CurveRecord {
  double s = 0.0;
  double t_final = 0.0;
  double sum_q = 0.0;
  double sum_qtilde = 0.0;
  double inner = 0.0;
  double residual = 0.0;
  long iterations = 0;
};

inline std::vector<CurveRecord> curve_records(const MECurve& curve) {
  std::vector<CurveRecord> rows(curve.s_grid.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const MESolution& sol = curve.solutions[k];
    const bool ok = curve.converged(k);
    rows[k] = {curve.s_grid[k], ok ? sol.t : nan, ok ? sol.q.sum() : nan, ok ? sol.q_tilde.sum() : nan,
               curve.inner(k), ok ? sol.residual : nan, sol.iterations};
  }
  return rows;
}

inline void write_curve_csv(std::ostream& out, const std::vector<CurveRecord>& rows) {
  out << "s,t_final,sum_q,sum_qtilde,inner,residual,iterations\n";
  for (const auto& r : rows)
    out << format_double(r.s) << ',' << format_double(r.t_final) << ',' << format_double(r.sum_q) << ','
        << format_double(r.sum_qtilde) << ',' << format_double(r.inner) << ',' << format_double(r.residual) << ','
        << r.iterations << '\n';
}

inline std::vector<CurveRecord> read_curve_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "s,t_final,sum_q,sum_qtilde,inner,residual,iterations")
    throw Error(Errc::Parse, "unexpected curve CSV header");
  std::vector<CurveRecord> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto c = split(line, ',');
    if (c.size() != 7) throw Error(Errc::Parse, "curve CSV row needs 7 columns");
    rows.push_back({parse_double(c[0]), parse_double(c[1]), parse_double(c[2]), parse_double(c[3]),
                    parse_double(c[4]), parse_double(c[5]), static_cast<long>(parse_double(c[6]))});
  }
  return rows;
}

}  // namespace vps
