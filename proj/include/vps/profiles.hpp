// Named variance-profile families and structural analysis of a profile:
// spectral radius, irreducibility, (block) full indecomposability and
// Sinkhorn scaling.
#pragma once

#include "vps/core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace vps {

using Pattern = Eigen::MatrixXi;

/// sigma^2_ij = sigma2(i/n, j/n) for i, j = 1..n.
inline VarianceProfile build_sampled(const std::function<double(double, double)>& sigma2, int n) {
  if (n < 1) throw Error(Errc::BadParameter, "n must be >= 1");
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = sigma2(static_cast<double>(i + 1) / n, static_cast<double>(j + 1) / n);
      if (v < 0.0)
        throw Error(Errc::NegativeFunctionValue,
                    "sigma^2(" + std::to_string(i + 1) + "/n, " + std::to_string(j + 1) + "/n) < 0");
      m(i, j) = v;
    }
  }
  return VarianceProfile::from_matrix(std::move(m));
}

namespace detail {
// Band indicators are evaluated on i/n - j/n; the slack absorbs the rounding
// of the subtraction so that |i - j| * 20 == n is inside the band.
constexpr double band_slack = 1e-12;
}  // namespace detail

/// Band Model A: sigma^2(x, y) = 1{|x - y| <= 1/20}.
inline double model_a_sigma2(double x, double y) {
  return std::abs(x - y) <= 1.0 / 20.0 + detail::band_slack ? 1.0 : 0.0;
}

/// Band Model B: sigma^2(x, y) = (x + 2y)^2 1{|x - y| <= 1/10}.
inline double model_b_sigma2(double x, double y) {
  return std::abs(x - y) <= 1.0 / 10.0 + detail::band_slack ? (x + 2.0 * y) * (x + 2.0 * y) : 0.0;
}

inline VarianceProfile build_model_a(int n) { return build_sampled(model_a_sigma2, n); }
inline VarianceProfile build_model_b(int n) { return build_sampled(model_b_sigma2, n); }

inline VarianceProfile build_constant(double variance, int n) {
  if (n < 1) throw Error(Errc::BadParameter, "n must be >= 1");
  return VarianceProfile::from_matrix(Matrix::Constant(n, n, variance));
}

struct SeparableProfile {
  Vector d;
  Vector d_tilde;

  int n() const { return static_cast<int>(d.size()); }
  // rho(V) = <d, d~> / n for V = d d~^T / n.
  double spectral_radius() const { return d.dot(d_tilde) / n(); }
};

inline SeparableProfile make_separable(Vector d, Vector d_tilde,
                                       double d_max = std::numeric_limits<double>::infinity()) {
  if (d.size() != d_tilde.size())
    throw Error(Errc::LengthMismatch,
                "d has " + std::to_string(d.size()) + " entries, d~ has " + std::to_string(d_tilde.size()));
  if (d.size() == 0) throw Error(Errc::LengthMismatch, "empty vectors");
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d[i]) || !std::isfinite(d_tilde[i]))
      throw Error(Errc::NonFinite, "entry " + std::to_string(i));
    if (!(d[i] > 0.0) || !(d_tilde[i] > 0.0))
      throw Error(Errc::NonPositiveEntry, "entry " + std::to_string(i));
    if (d[i] > d_max || d_tilde[i] > d_max)
      throw Error(Errc::BadParameter, "entry " + std::to_string(i) + " exceeds d_max");
  }
  return SeparableProfile{std::move(d), std::move(d_tilde)};
}

struct SeparableBuild {
  VarianceProfile profile;
  SeparableProfile separable;
};

/// sigma^2_ij = d_i * d~_j.
inline SeparableBuild build_separable(const Vector& d, const Vector& d_tilde,
                                      double d_max = std::numeric_limits<double>::infinity()) {
  SeparableProfile sep = make_separable(d, d_tilde, d_max);
  Matrix m = sep.d * sep.d_tilde.transpose();
  return SeparableBuild{VarianceProfile::from_matrix(std::move(m)), std::move(sep)};
}

/// Two-level profile: the first round(alpha n) rows have variance a, the
/// rest b (d~ = 1).
inline SeparableBuild build_two_level(double a, double b, double alpha, int n) {
  if (n < 1 || !(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::BadParameter, "need n >= 1, alpha in (0,1)");
  const int k = static_cast<int>(std::lround(alpha * n));
  Vector d(n);
  for (int i = 0; i < n; ++i) d[i] = i < k ? a : b;
  return build_separable(d, Vector::Ones(n));
}

/// Block matrix with J_m blocks on the first block row and column (except
/// the corner) and zeros elsewhere; n = k m.
inline VarianceProfile build_block_atom(int k, int m) {
  if (k < 2 || m < 1) throw Error(Errc::BadParameter, "block atom requires k >= 2 and m >= 1");
  const int n = k * m;
  Matrix a = Matrix::Zero(n, n);
  a.block(0, m, m, n - m).setOnes();
  a.block(m, 0, n - m, m).setOnes();
  return VarianceProfile::from_matrix(a.cwiseProduct(a));
}

// ---------------------------------------------------------------------------
// Spectral radius

/// Perron root of a nonnegative matrix by power iteration on the shifted
/// matrix M + cI (c = max row sum), started from the all-ones vector.
/// Stops when the Collatz-Wielandt bounds agree to relative tolerance tol,
/// or when the norm estimate has stagnated at that level.
inline double spectral_radius(const Matrix& m, double tol = 1e-12, long max_iters = 1000000) {
  const Eigen::Index n = m.rows();
  const double shift = m.rowwise().sum().maxCoeff();
  if (shift == 0.0) return 0.0;
  Vector x = Vector::Ones(n);
  Vector y(n);
  double prev_estimate = -1.0;
  int stagnant = 0;
  for (long it = 0; it < max_iters; ++it) {
    y.noalias() = m * x;
    y += shift * x;
    const Vector ratio = y.cwiseQuotient(x);
    const double lo = ratio.minCoeff() - shift;
    const double hi = ratio.maxCoeff() - shift;
    if (hi <= 0.0) return 0.0;
    if (lo > 0.0 && hi - lo <= tol * lo) return 0.5 * (lo + hi);
    const double scale = y.maxCoeff();
    x = y / scale;
    const double estimate = scale - shift;
    if (prev_estimate >= 0.0 && std::abs(estimate - prev_estimate) <= 1e-3 * tol * std::abs(estimate)) {
      if (++stagnant >= 50) return estimate;
    } else {
      stagnant = 0;
    }
    prev_estimate = estimate;
    // Components of reducible matrices may decay below the representable range.
    if (x.minCoeff() < 1e-280) x.array() += 1e-280;
  }
  throw Error(Errc::NoConvergence, "power iteration hit the iteration cap");
}

inline double spectral_radius(const VarianceProfile& p, double tol = 1e-12, long max_iters = 1000000) {
  return spectral_radius(p.normalized(), tol, max_iters);
}

/// Largest eigenvalue modulus from a dense nonsymmetric eigensolver.
inline double spectral_radius_dense(const Matrix& m) {
  Eigen::EigenSolver<Matrix> es(m, false);
  if (es.info() != Eigen::Success) throw Error(Errc::EigFailure, "dense eigensolver failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Structure

inline Pattern support_pattern(const Matrix& m) { return (m.array() > 0.0).cast<int>().matrix(); }

/// Strong connectivity of the digraph with edge i -> j when sigma^2_ij > 0.
inline bool is_irreducible(const Pattern& pattern) {
  const Eigen::Index n = pattern.rows();
  if (n <= 1) return true;
  auto reaches_all = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::vector<Eigen::Index> stack{0};
    seen[0] = 1;
    Eigen::Index count = 1;
    while (!stack.empty()) {
      const Eigen::Index u = stack.back();
      stack.pop_back();
      for (Eigen::Index v = 0; v < n; ++v) {
        const int edge = transpose ? pattern(v, u) : pattern(u, v);
        if (edge != 0 && !seen[v]) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == n;
  };
  return reaches_all(false) && reaches_all(true);
}

inline bool is_irreducible(const VarianceProfile& p) { return is_irreducible(support_pattern(p.variances())); }

constexpr int max_indecomposable_size = 20;

/// Full indecomposability: every submatrix on nonempty I x J with
/// |I| + |J| >= K has a nonzero entry. Equivalently, every nonempty row set I
/// reaches at least |I| + 1 columns (all K columns when I is everything).
/// Exhaustive over the 2^K row subsets.
inline bool is_fully_indecomposable(const Pattern& pattern) {
  const Eigen::Index k = pattern.rows();
  if (pattern.cols() != k) throw Error(Errc::NonSquare, "pattern must be square");
  if (k == 0) throw Error(Errc::BadParameter, "empty pattern");
  if (k > max_indecomposable_size)
    throw Error(Errc::TooLarge, "exhaustive check limited to K <= " + std::to_string(max_indecomposable_size));
  std::vector<std::uint32_t> row_mask(k, 0);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      if (pattern(i, j) != 0) row_mask[i] |= (1u << j);

  const std::uint32_t full = (k == 32) ? ~0u : ((1u << k) - 1u);
  std::vector<std::uint32_t> reach(std::size_t{1} << k, 0);
  for (std::uint32_t set = 1; set <= full; ++set) {
    const int low = std::countr_zero(set);
    reach[set] = reach[set & (set - 1)] | row_mask[low];
    const int rows = std::popcount(set);
    const int cols = std::popcount(reach[set]);
    if (set == full) {
      if (cols < k) return false;
    } else if (cols < rows + 1) {
      return false;
    }
  }
  return true;
}

/// K x K pattern z_ij = 1 iff min over the block I_i x I_j of V is >= phi / n,
/// for the equal partition into consecutive blocks of size n / K.
inline Pattern block_pattern(const VarianceProfile& p, int blocks, double phi) {
  const int n = p.n();
  if (blocks < 1 || n % blocks != 0)
    throw Error(Errc::BadPartition, "K = " + std::to_string(blocks) + " does not divide n = " + std::to_string(n));
  if (!(phi > 0.0)) throw Error(Errc::BadParameter, "phi must be > 0");
  const int m = n / blocks;
  const double threshold = phi / n;
  Pattern z(blocks, blocks);
  for (int bi = 0; bi < blocks; ++bi)
    for (int bj = 0; bj < blocks; ++bj)
      z(bi, bj) = p.normalized().block(bi * m, bj * m, m, m).minCoeff() >= threshold ? 1 : 0;
  return z;
}

inline bool is_block_fully_indecomposable(const VarianceProfile& p, int blocks, double phi) {
  return is_fully_indecomposable(block_pattern(p, blocks, phi));
}

// ---------------------------------------------------------------------------
// Sinkhorn scaling

struct SinkhornResult {
  Vector d1;
  Vector d2;
  Matrix scaled;
  long iterations = 0;
  bool converged = false;
};

/// Alternating row/column normalization of a nonnegative matrix. The gauge
/// d1 -> c d1, d2 -> d2 / c is fixed by equal geometric means. Never throws
/// on non-convergence; inspect `converged`.
inline SinkhornResult try_sinkhorn_scale(const Matrix& m, double tol, long max_iters,
                                         std::optional<Vector> initial_d2 = std::nullopt) {
  const Eigen::Index n = m.rows();
  SinkhornResult res;
  res.d2 = initial_d2 ? *initial_d2 : Vector::Ones(n);
  res.d1 = Vector::Ones(n);
  for (long it = 1; it <= max_iters; ++it) {
    const Vector r = m * res.d2;
    if (!(r.minCoeff() > 0.0)) break;
    res.d1 = r.cwiseInverse();
    const Vector c = m.transpose() * res.d1;
    if (!(c.minCoeff() > 0.0)) break;
    res.d2 = c.cwiseInverse();
    res.iterations = it;
    // Columns are exact after the d2 update; rows carry the error.
    const Vector rows = res.d1.cwiseProduct(m * res.d2);
    if (!rows.allFinite() || !res.d1.allFinite() || !res.d2.allFinite()) break;
    if ((rows.array() - 1.0).abs().maxCoeff() <= tol) {
      res.converged = true;
      break;
    }
  }
  if (res.d1.size() == n && res.d1.allFinite() && res.d2.allFinite() && res.d1.minCoeff() > 0.0 &&
      res.d2.minCoeff() > 0.0) {
    const double log_gap = (res.d2.array().log().mean() - res.d1.array().log().mean()) / 2.0;
    const double c = std::exp(log_gap);
    res.d1 *= c;
    res.d2 /= c;
  }
  res.scaled = res.d1.asDiagonal() * m * res.d2.asDiagonal();
  if (res.converged) {
    const double row_err = (res.scaled.rowwise().sum().array() - 1.0).abs().maxCoeff();
    const double col_err = (res.scaled.colwise().sum().array() - 1.0).abs().maxCoeff();
    res.converged = row_err <= tol && col_err <= tol;
  }
  return res;
}

inline SinkhornResult sinkhorn_scale(const Matrix& m, double tol, long max_iters) {
  SinkhornResult res = try_sinkhorn_scale(m, tol, max_iters);
  if (!res.converged)
    throw Error(Errc::NoConvergence, "Sinkhorn scaling did not converge in " + std::to_string(max_iters) +
                                         " iterations");
  return res;
}

inline SinkhornResult sinkhorn_scale(const VarianceProfile& p, double tol, long max_iters) {
  return sinkhorn_scale(p.normalized(), tol, max_iters);
}

/// Conjugate a profile by a permutation: (P V P^T)_{ij} = V_{perm[i], perm[j]}.
inline VarianceProfile permute(const VarianceProfile& p, const std::vector<int>& perm) {
  const int n = p.n();
  if (static_cast<int>(perm.size()) != n) throw Error(Errc::LengthMismatch, "permutation length");
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = p.variances()(perm[i], perm[j]);
  return VarianceProfile::from_matrix(std::move(m));
}

}  // namespace vps
