// Shared fixtures and independent oracles for the test programs.
#pragma once

#include "vps/vps.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <vector>

namespace vps::testkit {

inline Matrix random_matrix(int n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) m(i, j) = u(gen);
  return m;
}

inline Vector random_vector(int n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = u(gen);
  return v;
}

/// Fixed corpus of ten 8x8 profiles with entries in [0.5, 1.5].
inline std::vector<VarianceProfile> derivative_corpus() {
  std::vector<VarianceProfile> out;
  for (std::uint64_t k = 0; k < 10; ++k) out.push_back(VarianceProfile::from_matrix(random_matrix(8, 0.5, 1.5, 1000 + k)));
  return out;
}

/// Doubly stochastic S as a random convex combination of permutation matrices.
inline Matrix random_doubly_stochastic(int n, int terms, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<int> perm(n);
  Matrix s = Matrix::Zero(n, n);
  double total = 0.0;
  for (int t = 0; t < terms; ++t) {
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), gen);
    const double w = u(gen);
    total += w;
    for (int i = 0; i < n; ++i) s(i, perm[i]) += w;
  }
  return s / total;
}

/// Profile whose normalized V equals D^-1 S D.
inline VarianceProfile balanced_profile(int n, std::uint64_t seed) {
  const Matrix s = 0.9 * random_doubly_stochastic(n, 2 * n, seed) + Matrix::Constant(n, n, 0.1 / n);
  const Vector d = random_vector(n, 0.5, 2.0, seed + 77);
  Matrix v = d.cwiseInverse().asDiagonal() * s * d.asDiagonal();
  return VarianceProfile::from_matrix(v * n);
}

/// Exhaustive check of the definition: every I x J submatrix with
/// |I| + |J| >= K (I, J nonempty) has a nonzero entry.
inline bool brute_force_fully_indecomposable(const Pattern& p) {
  const int k = static_cast<int>(p.rows());
  for (unsigned rows = 1; rows < (1u << k); ++rows) {
    for (unsigned cols = 1; cols < (1u << k); ++cols) {
      if (std::popcount(rows) + std::popcount(cols) < k) continue;
      bool nonzero = false;
      for (int i = 0; i < k && !nonzero; ++i)
        for (int j = 0; j < k && !nonzero; ++j)
          if ((rows >> i & 1u) && (cols >> j & 1u) && p(i, j) != 0) nonzero = true;
      if (!nonzero) return false;
    }
  }
  return true;
}

/// Root of the increasing-minus-decreasing scalar function g on [lo, hi].
inline double bisect(const std::function<double(double)>& g, double lo, double hi, int iters = 200) {
  double glo = g(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if ((gm > 0.0) == (glo > 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Watches every solution returned by the solver and records violations of
/// the trace identity and of q = q~ for symmetric profiles.
class InvariantAudit {
 public:
  InvariantAudit() {
    solve_observer() = [this](const VarianceProfile& p, const MESolution& sol) { observe(p, sol); };
  }
  ~InvariantAudit() { solve_observer() = nullptr; }
  InvariantAudit(const InvariantAudit&) = delete;
  InvariantAudit& operator=(const InvariantAudit&) = delete;

  long checked() const { return checked_; }
  long violations() const { return violations_; }
  double worst_trace() const { return worst_trace_; }
  double worst_symmetry() const { return worst_symmetry_; }
  std::string first_violation() const {
    std::lock_guard lock(mu_);
    return first_;
  }

 private:
  void observe(const VarianceProfile& p, const MESolution& sol) {
    std::lock_guard lock(mu_);
    ++checked_;
    const double n = p.n();
    const double trace = std::abs(sol.q.sum() - sol.q_tilde.sum());
    double sym = 0.0;
    if (p.is_symmetric() && sol.q.size() > 0) sym = (sol.q - sol.q_tilde).cwiseAbs().maxCoeff();
    worst_trace_ = std::max(worst_trace_, trace / n);
    worst_symmetry_ = std::max(worst_symmetry_, sym);
    if (trace > n * 1e-10 || sym > 1e-10) {
      if (violations_++ == 0)
        first_ = "n=" + std::to_string(p.n()) + " s=" + format_double(sol.s) + " t=" + format_double(sol.t) +
                 " trace=" + format_double(trace) + " sym=" + format_double(sym);
    }
  }

  mutable std::mutex mu_;
  long checked_ = 0;
  long violations_ = 0;
  double worst_trace_ = 0.0;
  double worst_symmetry_ = 0.0;
  std::string first_;
};

}  // namespace vps::testkit
