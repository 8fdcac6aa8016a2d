#include "../support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace vps;

namespace {
const EntryKind all_kinds[] = {EntryKind::real_gaussian, EntryKind::complex_gaussian, EntryKind::rademacher,
                               EntryKind::complex_bernoulli};
}

TEST(EntryLaw, NamesRoundTrip) {
  for (EntryKind k : all_kinds) EXPECT_EQ(parse_entry_kind(entry_kind_name(k)), k);
  EXPECT_THROW(parse_entry_kind("cauchy"), Error);
}

TEST(EntryLaw, StandardizedMoments) {
  for (EntryKind k : all_kinds) {
    const EntryLaw law{k, 99};
    Complex mean = 0.0;
    double second = 0.0;
    const int count = 200000;
    for (int i = 0; i < count; ++i) {
      const Complex x = draw_entry(law, i / 400, i % 400);
      mean += x;
      second += std::norm(x);
    }
    EXPECT_LT(std::abs(mean / static_cast<double>(count)), 0.01) << entry_kind_name(k);
    EXPECT_NEAR(second / count, 1.0, 0.015) << entry_kind_name(k);
  }
}

TEST(EntryLaw, RealLawsAreReal) {
  for (EntryKind k : {EntryKind::real_gaussian, EntryKind::rademacher})
    for (int i = 0; i < 50; ++i) EXPECT_EQ(draw_entry(EntryLaw{k, 3}, i, 2 * i).imag(), 0.0);
}

TEST(SampleMatrix, ZeroVarianceGivesExactZero) {
  const VarianceProfile p = build_block_atom(3, 20);
  for (EntryKind k : all_kinds) {
    const ComplexMatrix y = sample_matrix(p, EntryLaw{k, 5});
    for (int j = 0; j < p.n(); ++j)
      for (int i = 0; i < p.n(); ++i)
        if (p.variances()(i, j) == 0.0) EXPECT_EQ(y(i, j), Complex(0.0, 0.0));
  }
}

TEST(SampleMatrix, DeterministicInSeed) {
  const VarianceProfile p = build_model_b(30);
  const EntryLaw law{EntryKind::complex_gaussian, 42};
  const ComplexMatrix a = sample_matrix(p, law);
  EXPECT_TRUE((a.array() == sample_matrix(p, law).array()).all());
  EXPECT_FALSE((a.array() == sample_matrix(p, EntryLaw{EntryKind::complex_gaussian, 43}).array()).all());
  const double scale = 1.0 / std::sqrt(30.0);
  EXPECT_EQ(a(7, 11), std::sqrt(p.variances()(7, 11)) * scale * draw_entry(law, 7, 11));
}

TEST(SampleMatrix, EntryVarianceMatchesProfile) {
  const int n = 200, draws = 50;
  const VarianceProfile p = build_constant(1.0, n);
  for (EntryKind k : all_kinds) {
    double total = 0.0;
    for (int d = 0; d < draws; ++d) total += sample_matrix(p, EntryLaw{k, 1000u + d}).squaredNorm();
    EXPECT_NEAR(total / (draws * double(n)), 1.0, 0.05) << entry_kind_name(k);
  }
}

TEST(SampleMatrix, PerEntrySecondMomentWithinStandardError) {
  const int n = 12, draws = 400;
  const VarianceProfile p = VarianceProfile::from_matrix(testkit::random_matrix(n, 0.2, 3.0, 17));
  Matrix sum = Matrix::Zero(n, n), sum2 = Matrix::Zero(n, n);
  for (int d = 0; d < draws; ++d) {
    const Matrix a = sample_matrix(p, EntryLaw{EntryKind::complex_gaussian, 5000u + d}).cwiseAbs2();
    sum += a;
    sum2 += a.cwiseAbs2();
  }
  int within3 = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double mean = sum(i, j) / draws;
      const double var = sum2(i, j) / draws - mean * mean;
      const double se = std::sqrt(var / draws);
      const double target = p.variances()(i, j) / n;
      EXPECT_LT(std::abs(mean - target), 5.0 * se);
      within3 += std::abs(mean - target) <= 3.0 * se;
    }
  }
  EXPECT_GE(within3, static_cast<int>(0.98 * n * n));
}

TEST(Spectrum, SmallExamples) {
  if (!has_spectrum_backend()) GTEST_SKIP() << "no eigenvalue backend";
  ComplexMatrix swap(2, 2);
  swap << 0, 1, 1, 0;
  auto r = spectrum(swap).sorted_moduli();
  EXPECT_NEAR(r[0], 1.0, 1e-14);
  EXPECT_NEAR(r[1], 1.0, 1e-14);
  auto ev = spectrum(swap).eigenvalues;
  EXPECT_NEAR(std::abs(ev[0] + ev[1]), 0.0, 1e-14);
  ComplexMatrix diag = ComplexMatrix::Zero(3, 3);
  diag.diagonal() << Complex(1, 2), Complex(-3, 0), Complex(0, 0.5);
  r = spectrum(diag).sorted_moduli();
  EXPECT_NEAR(r[0], 0.5, 1e-14);
  EXPECT_NEAR(r[1], std::sqrt(5.0), 1e-14);
  EXPECT_NEAR(r[2], 3.0, 1e-14);
  EXPECT_THROW(spectrum(ComplexMatrix::Zero(2, 3)), Error);
}

TEST(Spectrum, BlockAtomHasKernel) {
  if (!has_spectrum_backend()) GTEST_SKIP() << "no eigenvalue backend";
  const int k = 3, m = 50;
  const auto r = spectrum(sample_matrix(build_block_atom(k, m), EntryLaw{EntryKind::complex_gaussian, 8})).sorted_moduli();
  EXPECT_GE(std::count_if(r.begin(), r.end(), [](double x) { return x < 1e-8; }), reference::rank_deficiency_bound(k, m));
}

TEST(Spectrum, CircularLawAtHalfRadius) {
  if (!has_spectrum_backend()) GTEST_SKIP() << "no eigenvalue backend";
  const auto sample = spectrum(sample_matrix(build_constant(1.0, 2000), EntryLaw{EntryKind::complex_gaussian, 2024}));
  EXPECT_NEAR(empirical_radial_cdf(sample, {0.5})[0], 0.25, 0.03);
}

TEST(EmpiricalCdf, CountsWithMultiplicity) {
  SpectrumSample s;
  s.eigenvalues = {0.0, 0.0, Complex(0.6, 0.8)};
  const auto F = empirical_radial_cdf(s, {0.0, 0.5, 1.0, 2.0});
  EXPECT_DOUBLE_EQ(F[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(F[1], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(F[2], 1.0);
  EXPECT_DOUBLE_EQ(F[3], 1.0);
  EXPECT_TRUE(empirical_radial_cdf(s, {}).empty());
  EXPECT_THROW(empirical_radial_cdf(SpectrumSample{}, {0.5}), Error);
}

namespace {
RadialMeasure disc_measure() {
  RadialMeasure m;
  for (int k = 0; k <= 100; ++k) {
    const double s = k / 100.0;
    m.s_grid.push_back(s);
    m.F.push_back(s * s);
    m.f.push_back(1.0 / std::numbers::pi);
  }
  m.atom_at_zero = 0.0;
  m.support_radius = 1.0;
  return m;
}
}  // namespace

TEST(Kolmogorov, QuantileSampleIsClose) {
  const int n = 500;
  SpectrumSample s;
  for (int i = 0; i < n; ++i) s.eigenvalues.push_back(std::polar(std::sqrt((i + 0.5) / n), 0.1 * i));
  EXPECT_LE(kolmogorov_distance(disc_measure(), s), 1.0 / n + 1e-12);
}

TEST(Kolmogorov, PointMassAtEdge) {
  SpectrumSample s;
  s.eigenvalues = {Complex(1.0, 0.0)};
  EXPECT_NEAR(kolmogorov_distance(disc_measure(), s), 1.0, 1e-12);
}

TEST(EigenvalueCsv, RoundTripIsBitExact) {
  SpectrumSample s;
  for (int i = 0; i < 40; ++i) s.eigenvalues.emplace_back(std::sin(i * 1.7) / 3.0, std::exp(-i * 0.37) * 1e-5);
  s.eigenvalues.emplace_back(0.0, -0.0);
  std::stringstream buf;
  write_eigenvalue_csv(buf, s);
  const SpectrumSample back = read_eigenvalue_csv(buf);
  EXPECT_EQ(back.source, SpectrumSource::ingested);
  ASSERT_EQ(back.eigenvalues.size(), s.eigenvalues.size());
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) EXPECT_EQ(back.eigenvalues[i], s.eigenvalues[i]);
}

TEST(EigenvalueCsv, RejectsMalformedInput) {
  std::stringstream noheader("1,2\n");
  EXPECT_THROW(read_eigenvalue_csv(noheader), Error);
  std::stringstream cols("re,im\n1,2,3\n");
  EXPECT_THROW(read_eigenvalue_csv(cols), Error);
  std::stringstream junk("re,im\n1,abc\n");
  EXPECT_THROW(read_eigenvalue_csv(junk), Error);
}

TEST(EigenvalueCsv, ShippedSamplesParse) {
  for (const char* name : {"eigs_constant_n2000.csv", "eigs_block_atom_k3_m667.csv"}) {
    const std::string path = std::string(VPS_TEST_DATA_DIR) + "/" + name;
    if (!std::filesystem::exists(path)) GTEST_SKIP() << path << " not present";
    EXPECT_GE(read_eigenvalue_csv(path).eigenvalues.size(), 2000u);
  }
}
