// Monte Carlo side: random matrices with a variance profile, their spectra,
// empirical radial CDFs and Kolmogorov distances to a deterministic measure.
#pragma once

#include "vps/core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#if defined(VPS_HAVE_LAPACKE)
#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>
#endif

namespace vps {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

enum class EntryKind { real_gaussian, complex_gaussian, rademacher, complex_bernoulli };

struct EntryLaw {
  EntryKind kind = EntryKind::complex_bernoulli;
  std::uint64_t seed = 0;
};

inline EntryKind parse_entry_kind(const std::string& name) {
  if (name == "real-gaussian") return EntryKind::real_gaussian;
  if (name == "complex-gaussian") return EntryKind::complex_gaussian;
  if (name == "rademacher") return EntryKind::rademacher;
  if (name == "complex-bernoulli") return EntryKind::complex_bernoulli;
  throw Error(Errc::Parse, "unknown entry law '" + name + "'");
}

inline const char* entry_kind_name(EntryKind k) {
  switch (k) {
    case EntryKind::real_gaussian: return "real-gaussian";
    case EntryKind::complex_gaussian: return "complex-gaussian";
    case EntryKind::rademacher: return "rademacher";
    case EntryKind::complex_bernoulli: return "complex-bernoulli";
  }
  return "unknown";
}

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based: the draw for (seed, i, j, stream) does not depend on the
// order in which entries are generated.
inline std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t i, std::uint64_t j, std::uint64_t stream) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ i);
  h = mix64(h ^ (j + 0x632be59bd9b4e019ULL));
  return mix64(h ^ (stream + 0x85ebca77c2b2ae63ULL));
}

// Uniform on the open interval (0, 1).
inline double counter_uniform(std::uint64_t seed, std::uint64_t i, std::uint64_t j, std::uint64_t stream) {
  return (static_cast<double>(counter_bits(seed, i, j, stream) >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace detail

/// Standardized entry X_ij: mean 0, E|X|^2 = 1.
inline Complex draw_entry(const EntryLaw& law, std::uint64_t i, std::uint64_t j) {
  switch (law.kind) {
    case EntryKind::real_gaussian: {
      const double u1 = detail::counter_uniform(law.seed, i, j, 0);
      const double u2 = detail::counter_uniform(law.seed, i, j, 1);
      return {std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2), 0.0};
    }
    case EntryKind::complex_gaussian: {
      const double u1 = detail::counter_uniform(law.seed, i, j, 0);
      const double u2 = detail::counter_uniform(law.seed, i, j, 1);
      const double r = std::sqrt(-std::log(u1));  // modulus of (g1 + i g2) / sqrt(2)
      return std::polar(r, 2.0 * std::numbers::pi * u2);
    }
    case EntryKind::rademacher:
      return {(detail::counter_bits(law.seed, i, j, 0) >> 63) ? 1.0 : -1.0, 0.0};
    case EntryKind::complex_bernoulli: {
      const std::uint64_t bits = detail::counter_bits(law.seed, i, j, 0);
      const double re = (bits >> 63) ? std::numbers::sqrt2 / 2 : -std::numbers::sqrt2 / 2;
      const double im = ((bits >> 62) & 1u) ? std::numbers::sqrt2 / 2 : -std::numbers::sqrt2 / 2;
      return {re, im};
    }
  }
  return {};
}

/// Y_ij = sigma_ij X_ij / sqrt(n).
inline ComplexMatrix sample_matrix(const VarianceProfile& p, const EntryLaw& law) {
  const int n = p.n();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  ComplexMatrix y(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double sigma2 = p.variances()(i, j);
      y(i, j) = sigma2 == 0.0 ? Complex(0.0, 0.0) : std::sqrt(sigma2) * scale * draw_entry(law, i, j);
    }
  }
  return y;
}

enum class SpectrumSource { sampled, ingested };

struct SpectrumSample {
  std::vector<Complex> eigenvalues;
  SpectrumSource source = SpectrumSource::sampled;

  std::vector<double> sorted_moduli() const {
    std::vector<double> r(eigenvalues.size());
    std::transform(eigenvalues.begin(), eigenvalues.end(), r.begin(), [](Complex c) { return std::abs(c); });
    std::sort(r.begin(), r.end());
    return r;
  }
};

inline const char* spectrum_backend() {
#if defined(VPS_INGEST_ONLY)
  return "none";
#elif defined(VPS_HAVE_LAPACKE)
  return "lapacke-zgeev";
#else
  return "eigen";
#endif
}

inline bool has_spectrum_backend() {
#if defined(VPS_INGEST_ONLY)
  return false;
#else
  return true;
#endif
}

/// All eigenvalues of a square complex matrix, with multiplicity.
inline SpectrumSample spectrum(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw Error(Errc::NonSquare, "spectrum of a non-square matrix");
  SpectrumSample out;
  out.source = SpectrumSource::sampled;
#if defined(VPS_INGEST_ONLY)
  (void)m;
  throw Error(Errc::BackendUnavailable, "built without an eigenvalue backend; ingest an eigenvalue CSV instead");
#elif defined(VPS_HAVE_LAPACKE)
  const lapack_int n = static_cast<lapack_int>(m.rows());
  ComplexMatrix a = m;
  std::vector<Complex> w(n);
  const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, w.data(), nullptr, 1, nullptr, 1);
  if (info != 0) throw Error(Errc::EigFailure, "zgeev returned " + std::to_string(info));
  out.eigenvalues = std::move(w);
#else
  Eigen::ComplexEigenSolver<ComplexMatrix> es(m, false);
  if (es.info() != Eigen::Success) throw Error(Errc::EigFailure, "ComplexEigenSolver failed");
  out.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
#endif
  return out;
}

/// F^(s) = #{i : |lambda_i| <= s} / n.
inline std::vector<double> empirical_radial_cdf(const SpectrumSample& sample, const std::vector<double>& s_grid) {
  if (sample.eigenvalues.empty()) throw Error(Errc::BadParameter, "empty spectrum sample");
  const auto r = sample.sorted_moduli();
  const double n = static_cast<double>(r.size());
  std::vector<double> out(s_grid.size());
  for (std::size_t k = 0; k < s_grid.size(); ++k)
    out[k] = static_cast<double>(std::upper_bound(r.begin(), r.end(), s_grid[k]) - r.begin()) / n;
  return out;
}

/// sup |F^(s) - F(s)| over the eigenvalue moduli (both one-sided limits of
/// the empirical step function) and the model's grid points.
inline double kolmogorov_distance(const RadialMeasure& model, const SpectrumSample& sample) {
  if (sample.eigenvalues.empty()) throw Error(Errc::BadParameter, "empty spectrum sample");
  const auto r = sample.sorted_moduli();
  const double n = static_cast<double>(r.size());
  double d = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double F = model.cdf_at(r[i]);
    const auto below = std::lower_bound(r.begin(), r.end(), r[i]) - r.begin();
    const auto upto = std::upper_bound(r.begin(), r.end(), r[i]) - r.begin();
    d = std::max({d, std::abs(static_cast<double>(below) / n - F), std::abs(static_cast<double>(upto) / n - F)});
  }
  for (double s : model.s_grid) {
    const auto upto = std::upper_bound(r.begin(), r.end(), s) - r.begin();
    d = std::max(d, std::abs(static_cast<double>(upto) / n - model.cdf_at(s)));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Eigenvalue CSV: header "re,im", one eigenvalue per row.

inline void write_eigenvalue_csv(std::ostream& out, const SpectrumSample& sample) {
  out << "re,im\n";
  for (const Complex& c : sample.eigenvalues) out << format_double(c.real()) << ',' << format_double(c.imag()) << '\n';
}

inline SpectrumSample read_eigenvalue_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "re,im")
    throw Error(Errc::Parse, "eigenvalue CSV must start with the header 're,im'");
  SpectrumSample out;
  out.source = SpectrumSource::ingested;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 2) throw Error(Errc::Parse, "eigenvalue CSV line " + std::to_string(lineno) + ": expected 2 columns");
    out.eigenvalues.emplace_back(parse_double(cells[0]), parse_double(cells[1]));
  }
  return out;
}

inline SpectrumSample read_eigenvalue_csv(const std::string& path) {
  auto in = open_input(path);
  return read_eigenvalue_csv(in);
}

inline void write_eigenvalue_csv(const std::string& path, const SpectrumSample& sample) {
  auto out = open_output(path);
  write_eigenvalue_csv(out, sample);
}

}  // namespace vps
