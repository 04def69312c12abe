#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cubesect/montecarlo.hpp"
#include "cubesect/quadrature.hpp"
#include "oracles.hpp"

using namespace cubesect;

namespace {

McConfig small(std::uint64_t samples, unsigned threads = 1) {
    McConfig c;
    c.samples = samples;
    c.threads = threads;
    return c;
}

}  // namespace

TEST(Welford, MatchesTwoPassAndMergeIsAssociative) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(2.0, 3.0);
    std::vector<double> xs(1000);
    for (double& x : xs) x = g(rng);
    Welford all, a, b;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        all.add(xs[i]);
        (i < 400 ? a : b).add(xs[i]);
    }
    a.merge(b);
    double m = 0.0;
    for (double x : xs) m += x;
    m /= xs.size();
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    v /= xs.size() - 1;
    EXPECT_NEAR(all.mean, m, 1e-12);
    EXPECT_NEAR(a.mean, m, 1e-12);
    EXPECT_NEAR(all.m2 / 999.0, v, 1e-9);
    EXPECT_NEAR(a.m2 / 999.0, v, 1e-9);
}

TEST(Rng, BoostEngineMatchesStd) {
    std::mt19937_64 s(42);
    Rng b(42);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(s(), b());
}

TEST(SampleSphere, UnitNormAndSecondMoment) {
    Rng rng(1);
    for (int k : {2, 3, 4, 7}) {
        double m2 = 0.0;
        const int N = 200000;
        for (int i = 0; i < N; ++i) {
            const auto u = sample_sphere(k, rng);
            double s = 0.0;
            for (double x : u) s += x * x;
            ASSERT_NEAR(s, 1.0, 1e-12);
            m2 += u[0] * u[0];
        }
        m2 /= N;
        // E u1^2 = 1/k, Var(u1^2) <= 1/k
        EXPECT_NEAR(m2, 1.0 / k, 5.0 / std::sqrt(N));
    }
}

TEST(MonteCarlo, SubgaussMomentCheck) {
    for (int k : {3, 4})
        for (int p : {1, 2, 3}) {
            const auto c = subgauss_moment_check(k, p, small(400000));
            EXPECT_LE(c.lhs, c.rhs + 1e-15);
            EXPECT_NEAR(c.empirical.value, c.lhs, 5.0 * c.empirical.std_error);
        }
    // E u1^2 = 1/k exactly
    EXPECT_NEAR(subgauss_moment_check(5, 1, small(1)).lhs, 0.2, 1e-15);
}

TEST(MonteCarlo, DeterministicAcrossThreadCounts) {
    const SectionQuery q(normalize_direction({3.0, 2.0, 1.0}), 0.6, field_params(Field::Complex));
    McConfig c1 = small(300000, 1);
    c1.chunk = 10000;
    McConfig c4 = c1;
    c4.threads = 4;
    const auto a = estimate_section_volume(q, c1);
    const auto b = estimate_section_volume(q, c4);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.std_error, b.std_error);
    EXPECT_EQ(a.samples, 300000u);
    const auto again = estimate_section_volume(q, c1);
    EXPECT_EQ(a.value, again.value);
    McConfig other = c1;
    other.seed += 1;
    EXPECT_NE(estimate_section_volume(q, other).value, a.value);
}

TEST(MonteCarlo, AgreesWithQuadrature) {
    for (auto f : {Field::Real, Field::Complex}) {
        const SectionQuery q(normalize_direction({1.0, 0.7, 0.4}), 0.5, field_params(f));
        const auto e = estimate_section_volume(q, small(1000000));
        EXPECT_NEAR(e.value, section_volume(q), 4.0 * e.std_error + 1e-6);
    }
}

TEST(MonteCarlo, SingleCoordinateAnalytic) {
    const SectionQuery q(normalize_direction({0.0, 2.0}), 0.4, field_params(Field::Real));
    const auto e = estimate_section_volume(q, small(10));
    EXPECT_EQ(e.value, 1.0);
    EXPECT_EQ(e.std_error, 0.0);
}

TEST(MonteCarlo, ExceedProbability) {
    const auto d = diagonal_direction(4);
    EXPECT_EQ(estimate_exceed_prob(d, 0.0, 3, small(10)).value, 1.0);
    const auto e = estimate_exceed_prob(normalize_direction({1.0}), 0.9, 3, small(1000));
    EXPECT_EQ(e.value, 1.0);
    EXPECT_THROW(estimate_exceed_prob(d, 1.0, 1, small(10)), domain_error);
}

TEST(MonteCarlo, ConfigValidation) {
    const SectionQuery q(diagonal_direction(2), 0.4, field_params(Field::Real));
    EXPECT_THROW(estimate_section_volume(q, small(0)), invalid_input);
}

TEST(SStatistic, ExplicitDraws) {
    const auto d = normalize_direction({1.0, 1.0});
    const std::vector<std::vector<double>> same{{1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
    EXPECT_NEAR(s_statistic(d, same), 0.5, 1e-15);  // a1 a2 <U1,U2> = 1/2
    const std::vector<std::vector<double>> orth{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
    EXPECT_NEAR(s_statistic(d, orth), 0.0, 1e-15);
    const std::vector<std::vector<double>> bad{{1.0, 0.0, 0.0}};
    EXPECT_THROW(s_statistic(d, bad), invalid_input);
}

TEST(SStatistic, IdentityWithPairSum) {
    Rng rng(17);
    std::mt19937_64 g(8);
    for (int trial = 0; trial < 200; ++trial) {
        const auto a = oracle::random_direction(2 + trial % 6, g);
        const auto d = normalize_direction(a);
        std::vector<std::vector<double>> u;
        for (std::size_t j = 0; j < d.n(); ++j) u.push_back(sample_sphere(3, rng));
        double pair = 0.0;
        for (std::size_t i = 0; i < d.n(); ++i)
            for (std::size_t j = i + 1; j < d.n(); ++j)
                pair += d[i] * d[j] * (u[i][0] * u[j][0] + u[i][1] * u[j][1] + u[i][2] * u[j][2]);
        EXPECT_NEAR(s_statistic(d, u), pair, 1e-14);
    }
}

TEST(Moments, DiagonalTwoClosedForm) {
    // S = <U1,U2>/2: E S^2 = 1/(4k), E S^4 = 3/(16 k (k+2))
    const auto d = diagonal_direction(2);
    for (int k : {3, 4}) {
        EXPECT_NEAR(moment_s2_exact(d, k), 0.25 / k, 1e-16);
        EXPECT_NEAR(moment_s4_exact(d, k), 3.0 / (16.0 * k * (k + 2)), 1e-16);
    }
}

TEST(MomentsProperty, MatchBruteForceEnumeration) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        const auto a = oracle::random_direction(2 + trial % 7, rng);
        const auto d = normalize_direction(a);
        for (int k : {3, 4}) {
            const auto b = oracle::brute_force_moments(std::vector<double>(d.coords().begin(), d.coords().end()), k);
            EXPECT_NEAR(moment_s2_exact(d, k), b.s2, 1e-13);
            EXPECT_NEAR(moment_s4_exact(d, k), b.s4, 1e-13);
        }
    }
}

TEST(Moments, MatchMonteCarlo) {
    const auto d = normalize_direction({1.0, 0.9, 0.5, 0.3});
    for (int k : {3, 4}) {
        const auto m2 = estimate_s_functional(d, k, small(400000), [](double s) { return s * s; });
        const auto m4 = estimate_s_functional(d, k, small(400000), [](double s) { return s * s * s * s; });
        EXPECT_NEAR(m2.value, moment_s2_exact(d, k), 4.0 * m2.std_error);
        EXPECT_NEAR(m4.value, moment_s4_exact(d, k), 4.0 * m4.std_error);
    }
}

TEST(Moments, FourthMomentComparisonFailsOnLongDiagonals) {
    EXPECT_TRUE(moment_ratio_claim(diagonal_direction(2), 3).holds);
    const auto c = moment_ratio_claim(diagonal_direction(8), 3);
    EXPECT_FALSE(c.holds);
    EXPECT_NEAR(c.rhs, 0.10846, 1e-4);
}
