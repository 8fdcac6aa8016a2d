// Closed-form reference measures. No solver dependency.
#pragma once

#include "vps/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vps::reference {

/// Uniform law on the disk of radius sqrt(variance): F(s) = min(s^2 / V, 1).
inline double circular_F(double variance, double s) {
  if (!(variance > 0.0)) throw Error(Errc::BadParameter, "variance must be > 0");
  if (!(s >= 0.0)) throw Error(Errc::BadParameter, "s must be >= 0");
  return std::min(s * s / variance, 1.0);
}

inline double circular_density(double variance, double z) {
  if (!(variance > 0.0)) throw Error(Errc::BadParameter, "variance must be > 0");
  return z * z < variance ? 1.0 / (std::numbers::pi * variance) : 0.0;
}

/// Edge of the block atom support, (k - 1)^{1/4} / sqrt(k).
inline double block_atom_edge(int k) {
  if (k < 2) throw Error(Errc::BadParameter, "k must be >= 2");
  return std::pow(k - 1.0, 0.25) / std::sqrt(static_cast<double>(k));
}

/// (1/k) sqrt((k - 2)^2 + 4 k^2 s^4) below the edge, 1 beyond.
inline double block_atom_F(int k, double s) {
  if (!(s >= 0.0)) throw Error(Errc::BadParameter, "s must be >= 0");
  if (s > block_atom_edge(k)) return 1.0;
  const double kk = k;
  return std::min(1.0, std::sqrt((kk - 2.0) * (kk - 2.0) + 4.0 * kk * kk * std::pow(s, 4)) / kk);
}

/// (4k / pi) |z|^2 / sqrt((k - 2)^2 + 4 k^2 |z|^4) on the closed disk.
inline double block_atom_density(int k, double z) {
  if (z > block_atom_edge(k)) return 0.0;
  if (k == 2) return 2.0 / std::numbers::pi;
  const double kk = k;
  const double z2 = z * z;
  return 4.0 * kk / std::numbers::pi * z2 / std::sqrt((kk - 2.0) * (kk - 2.0) + 4.0 * kk * kk * z2 * z2);
}

/// Dimension m (k - 2) of the deterministic kernel of a block atom sample.
inline int rank_deficiency_bound(int k, int m) {
  if (k < 2 || m < 1) throw Error(Errc::BadParameter, "need k >= 2, m >= 1");
  return m * (k - 2);
}

}  // namespace vps::reference
