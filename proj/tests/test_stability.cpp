#include <gtest/gtest.h>

#include <random>

#include "attstab/model.hpp"
#include "attstab/stability.hpp"
#include "oracles.hpp"

namespace attstab {
namespace {

constexpr SpacecraftInertia kStable{100.0, 120.0, 80.0};
constexpr SpacecraftInertia kNearSymmetric{100.0, 95.0, 99.0};
constexpr SpacecraftInertia kPitchUnstable{80.0, 120.0, 100.0};
constexpr SpacecraftInertia kSymmetric{1.0, 1.0, 1.0};

TEST(Phis, Examples) {
  const PhiPair a = phis(sigmas_from_inertia(kStable));
  EXPECT_NEAR(a.phi1, 0.1, 1e-15);
  EXPECT_NEAR(a.phi2, 2.3, 1e-15);
  EXPECT_NEAR(a.delta, 3.69, 1e-14);

  const PhiPair z = phis({0.0, 0.0, 0.0});
  EXPECT_EQ(z.phi1, 0.0);
  EXPECT_EQ(z.phi2, 1.0);
  EXPECT_EQ(z.delta, 1.0);

  const PhiPair b = phis(sigmas_from_inertia(kNearSymmetric));
  EXPECT_NEAR(b.phi1, 0.2 / 99.0, 1e-15);
  EXPECT_NEAR(b.phi2, 1.0 - 0.12 + 0.2 / 99.0, 1e-15);
  EXPECT_NEAR(b.delta, 0.7456364044485257, 1e-12);
}

TEST(Predicates, PolynomialStability) {
  EXPECT_TRUE(is_polynomially_stable(sigmas_from_inertia(kStable), 0.0));
  EXPECT_TRUE(is_polynomially_stable({0.0, 0.0, 0.0}, 0.0));
  const SigmaTriple s = sigmas_from_inertia(kPitchUnstable);
  EXPECT_NEAR(s.s2, -1.0 / 6.0, 1e-15);
  EXPECT_FALSE(is_polynomially_stable(s, 0.0));
}

TEST(Predicates, LyapunovStability) {
  EXPECT_TRUE(is_lyapunov_stable(sigmas_from_inertia(kStable), 0.0));
  EXPECT_FALSE(is_lyapunov_stable({0.0, 0.0, 0.0}, 0.0));
  EXPECT_TRUE(is_lyapunov_stable(sigmas_from_inertia(kNearSymmetric), 0.0));
}

TEST(Predicates, ToleranceBand) {
  // sigma2 slightly negative but inside the band still counts as >= 0.
  const SigmaTriple s{0.4, -1e-12, 0.25};
  EXPECT_TRUE(is_polynomially_stable(s, 1e-9));
  EXPECT_FALSE(is_polynomially_stable(s, 0.0));
  EXPECT_FALSE(is_lyapunov_stable({0.4, 1e-10, 0.25}, 1e-9));
}

TEST(Classify, Examples) {
  const StabilityClass a = classify(sigmas_from_inertia(kStable));
  EXPECT_EQ(a.verdict, Verdict::LyapunovStable);
  EXPECT_FALSE(a.boundary);
  const StabilityClass b = classify(sigmas_from_inertia(kSymmetric));
  EXPECT_EQ(b.verdict, Verdict::PolynomiallyStableOnly);
  EXPECT_TRUE(b.boundary);
  EXPECT_EQ(classify(sigmas_from_inertia(kPitchUnstable)).verdict, Verdict::Unstable);
  EXPECT_THROW(classify({}, -1.0), DomainError);
}

TEST(Classify, VerdictStringsRoundTrip) {
  for (Verdict v : {Verdict::Unstable, Verdict::PolynomiallyStableOnly, Verdict::LyapunovStable}) {
    EXPECT_EQ(verdict_from_string(to_string(v)), v);
  }
  EXPECT_THROW(verdict_from_string("Stable"), DomainError);
}

TEST(Classify, ScaleInvariant) {
  oracle::InertiaSampler sample(41);
  for (int k = 0; k < 2000; ++k) {
    const auto [jx, jy, jz] = sample();
    const auto base = classify(sigmas_from_inertia({jx, jy, jz}));
    for (double c : {1e-2, 1.0, 1e2}) {
      EXPECT_EQ(classify(sigmas_from_inertia({c * jx, c * jy, c * jz})).verdict, base.verdict);
    }
  }
}

TEST(ClosedForm, StableExample) {
  const EigenSet e = closed_form_eigenvalues(sigmas_from_inertia(kStable), OrbitalRate(1.0));
  const std::vector<Complex> want{{0, 0.70710678}, {0, -0.70710678}, {0, 1.45274521},
                                  {0, -1.45274521}, {0, 0.43535200}, {0, -0.43535200}};
  EXPECT_LT(oracle::multiset_distance({e.begin(), e.end()}, want), 1e-8);
  EXPECT_NEAR(e[0].imag(), std::sqrt(0.5), 1e-15);
}

TEST(ClosedForm, ZeroRatios) {
  const EigenSet e = closed_form_eigenvalues({0.0, 0.0, 0.0}, OrbitalRate(1.0));
  const std::vector<Complex> want{0.0, 0.0, {0.0, 1.0}, {0.0, -1.0}, 0.0, 0.0};
  EXPECT_LT(oracle::multiset_distance({e.begin(), e.end()}, want), 1e-15);
}

TEST(ClosedForm, LinearInRate) {
  const SigmaTriple s = sigmas_from_inertia(kNearSymmetric);
  const EigenSet e1 = closed_form_eigenvalues(s, OrbitalRate(0.3));
  const EigenSet e2 = closed_form_eigenvalues(s, OrbitalRate(0.6));
  for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(std::abs(e2[k] - 2.0 * e1[k]), 0.0, 1e-15);
}

TEST(ClosedForm, OutsideRegionThrows) {
  EXPECT_THROW(closed_form_eigenvalues(sigmas_from_inertia(kPitchUnstable), OrbitalRate(1.0)),
               NotApplicableError);
}

TEST(ClosedForm, MatchesRootOracleForStableSamples) {
  oracle::InertiaSampler sample(43);
  int checked = 0;
  while (checked < 300) {
    const auto [jx, jy, jz] = sample();
    const SpacecraftInertia j{jx, jy, jz};
    const SigmaTriple s = sigmas_from_inertia(j);
    if (!is_polynomially_stable(s, 0.0)) continue;
    ++checked;
    const double w = checked % 3 == 0 ? 1e-3 : 1.0;
    const EigenSet e = closed_form_eigenvalues(s, OrbitalRate(w));
    const auto roots = poly_roots(char_poly_coeffs(build_system(j, OrbitalRate(w)).a));
    EXPECT_LE(oracle::multiset_distance({e.begin(), e.end()}, roots), 1e-8 * w);
    EXPECT_LE(oracle::multiset_distance({e.begin(), e.end()}, oracle::factor_roots(s.s1, s.s2, s.s3, w)),
              1e-12 * w);
  }
}

TEST(FactoredCharPoly, Examples) {
  const auto f = factored_char_poly(sigmas_from_inertia(kStable));
  EXPECT_NEAR(f.pitch[0], 0.5, 1e-15);
  EXPECT_EQ(f.pitch[1], 0.0);
  EXPECT_NEAR(f.roll_yaw[0], 0.4, 1e-15);
  EXPECT_NEAR(f.roll_yaw[2], 2.3, 1e-15);
  EXPECT_EQ(f.roll_yaw[4], 1.0);

  const auto z = factored_char_poly({0.0, 0.0, 0.0});
  EXPECT_EQ(z.pitch, (PolyCoeffs{0.0, 0.0, 1.0}));
  EXPECT_EQ(z.roll_yaw, (PolyCoeffs{0.0, 0.0, 1.0, 0.0, 1.0}));
}

TEST(FactoredCharPoly, ProductMatchesFaddeevLeVerrier) {
  oracle::InertiaSampler sample(47);
  for (int k = 0; k < 50; ++k) {
    const auto [jx, jy, jz] = sample();
    const SpacecraftInertia j{jx, jy, jz};
    const auto f = factored_char_poly(sigmas_from_inertia(j));
    const PolyCoeffs product = f.pitch * f.roll_yaw;
    const PolyCoeffs direct = char_poly_coeffs(block_decompose(j).a0);
    ASSERT_EQ(product.degree(), 6u);
    const double bound = 1e-12 * std::max(1.0, direct.max_abs_coefficient());
    for (std::size_t i = 0; i <= 6; ++i) EXPECT_NEAR(product[i], direct[i], bound) << i;
  }
}

TEST(FactoredCharPoly, TraceAndDeterminantOfRollYawProduct) {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (int k = 0; k < 1000; ++k) {
    const double s1 = d(rng);
    const double s3 = d(rng);
    const Matrix a1{{0.0, 1.0}, {-4.0 * s1, 1.0 - s1}};
    const Matrix a3{{0.0, 1.0}, {-s3, s3 - 1.0}};
    const Matrix p = mat_mul(a1, a3);
    const PhiPair ph = phis({s1, 0.0, s3});
    EXPECT_NEAR(p(0, 0) + p(1, 1), -ph.phi2, 1e-12);
    EXPECT_NEAR(p(0, 0) * p(1, 1) - p(0, 1) * p(1, 0), 4.0 * ph.phi1, 1e-12);
  }
}

TEST(ClassifyNumeric, Examples) {
  const auto a = classify_numeric_detail(build_system(kStable, OrbitalRate(1.0)));
  EXPECT_EQ(a.cls.verdict, Verdict::LyapunovStable);
  EXPECT_EQ(a.imaginary_axis.size(), 6u);

  // sigma = 0: zero has algebraic multiplicity 4 but rank(A) = 3, so only a
  // three-dimensional eigenspace.
  const auto b = classify_numeric_detail(build_system(kSymmetric, OrbitalRate(1.0)));
  EXPECT_EQ(b.cls.verdict, Verdict::PolynomiallyStableOnly);
  bool saw_zero = false;
  for (const EigenCluster& c : b.imaginary_axis) {
    if (std::abs(c.center) < 1e-12) {
      saw_zero = true;
      EXPECT_EQ(c.algebraic, 4u);
      EXPECT_EQ(c.geometric, 3u);
    }
  }
  EXPECT_TRUE(saw_zero);

  const auto u = classify_numeric_detail(build_system(kPitchUnstable, OrbitalRate(1.0)));
  EXPECT_EQ(u.cls.verdict, Verdict::Unstable);
  double max_real = 0.0;
  for (const Complex& z : u.eigenvalues) max_real = std::max(max_real, z.real());
  EXPECT_NEAR(max_real, std::sqrt(0.5), 1e-10);
}

TEST(ClassifyNumeric, JordanBlockInRollYawModes) {
  // s1 = 0 with s3 != 0: zero is a double root of the roll/yaw block with a
  // one-dimensional eigenspace.
  const SpacecraftInertia j{2.0, 1.0, 1.0};  // s1 = 0, s2 = 1, s3 = -1
  const SigmaTriple s = sigmas_from_inertia(j);
  EXPECT_EQ(s.s1, 0.0);
  EXPECT_EQ(s.s3, -1.0);
  EXPECT_EQ(classify_numeric(build_system(j, OrbitalRate(1.0))).verdict,
            Verdict::PolynomiallyStableOnly);
  EXPECT_EQ(classify(s).verdict, Verdict::PolynomiallyStableOnly);
}

TEST(ClassifyNumeric, AgreesWithPredicatesAwayFromBoundaries) {
  oracle::InertiaSampler sample(59);
  int checked = 0;
  int stable = 0;
  while (checked < 1000) {
    const auto [jx, jy, jz] = sample();
    const SpacecraftInertia j{jx, jy, jz};
    const SigmaTriple s = sigmas_from_inertia(j);
    const PhiPair p = phis(s);
    if (std::min({std::abs(s.s2), std::abs(p.phi1), std::abs(p.phi2), std::abs(p.delta)}) <= 1e-6) {
      continue;
    }
    ++checked;
    const Verdict want = classify(s).verdict;
    stable += want == Verdict::LyapunovStable;
    EXPECT_EQ(classify_numeric(build_system(j, OrbitalRate(1.0))).verdict, want)
        << jx << " " << jy << " " << jz;
  }
  EXPECT_GT(stable, 50);
}

TEST(ClassifyNumeric, VerdictIndependentOfRate) {
  oracle::InertiaSampler sample(61);
  for (int k = 0; k < 200; ++k) {
    const auto [jx, jy, jz] = sample();
    const SpacecraftInertia j{jx, jy, jz};
    const SigmaTriple s = sigmas_from_inertia(j);
    const PhiPair p = phis(s);
    if (std::min({std::abs(s.s2), std::abs(p.phi1), std::abs(p.phi2), std::abs(p.delta)}) <= 1e-6) {
      continue;
    }
    const Verdict base = classify_numeric(build_system(j, OrbitalRate(1.0))).verdict;
    for (double w : {1e-3, 1e3}) {
      EXPECT_EQ(classify_numeric(build_system(j, OrbitalRate(w))).verdict, base)
          << jx << " " << jy << " " << jz << " w=" << w;
    }
  }
}

TEST(ClassifyNumeric, RollYawSpectrumClosedUnderNegation) {
  oracle::InertiaSampler sample(67);
  for (int k = 0; k < 200; ++k) {
    const auto [jx, jy, jz] = sample();
    const Matrix a0 = block_decompose({jx, jy, jz}).a0;
    const Matrix a13 = a0.block(2, 2, 4, 4);
    const auto roots = poly_roots(char_poly_coeffs(a13));
    std::vector<Complex> negated;
    for (const Complex& z : roots) negated.push_back(-z);
    EXPECT_LE(oracle::multiset_distance(roots, negated), 1e-8);
  }
}

}  // namespace
}  // namespace attstab
