#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cubesect/bounds.hpp"
#include "oracles.hpp"

using namespace cubesect;

TEST(Bounds, GammaK) {
    EXPECT_NEAR(gamma_k(3), (2 * std::sqrt(3.0) - 3) / (3 + 4.0 / 3), 1e-15);
    EXPECT_NEAR(gamma_k(3), 0.107, 1e-3);
}

TEST(Bounds, VeraarOnDiagonalTwo) {
    // (2 sqrt3 - 3) (1/(4k))^2 / (3/(16 k (k+2))) = (2 sqrt3 - 3) (k+2) / (3k)
    const auto b = veraar_bound(diagonal_direction(2), 3);
    EXPECT_NEAR(b.value, (2 * std::sqrt(3.0) - 3) * 5.0 / 9.0, 1e-14);
    EXPECT_NEAR(b.value, 0.25783423, 1e-8);
    EXPECT_THROW(veraar_bound(normalize_direction({1.0}), 3), domain_error);
}

TEST(Bounds, MgfFactors) {
    EXPECT_NEAR(plus_mgf_bound(0.7111, 3), 1.25 * std::pow(1 - 2 * 0.7111 * 0.7111 / 3, -1.5), 1e-14);
    EXPECT_NEAR(plus_mgf_bound(0.7111, 3), 2.316043, 1e-5);
    EXPECT_THROW(laplace_mgf_bound(1.3, 3), domain_error);
    EXPECT_THROW(plus_mgf_bound(0.0, 3), domain_error);
}

TEST(Bounds, OptimizedRealCase) {
    const auto b = optimize_probability_bound(3);
    EXPECT_GE(b.value, 0.1268);
    EXPECT_NEAR(*b.lambda_star, 0.7111, 0.01);
    EXPECT_EQ(b.method, BoundMethod::OrliczDual);
    EXPECT_NEAR(solve_threshold(3, b.value), 1.9182, 1e-3);
}

TEST(Bounds, OptimizedComplexCase) {
    const auto b = optimize_probability_bound(4);
    EXPECT_GE(b.value, 0.1407);
    EXPECT_NEAR(*b.lambda_star, 0.7508, 0.01);
    EXPECT_NEAR(solve_threshold(4, b.value), 1.7657, 1e-3);
}

TEST(Bounds, LargeKLimit) {
    const auto b = optimize_probability_bound_limit();
    EXPECT_GT(b.value, 0.205475);
    EXPECT_NEAR(*b.q_used, 1.0 / (2.0 * std::sqrt(3.0)), 1e-15);
}

TEST(Bounds, OptimumIsAGridMaximum) {
    const auto b = optimize_probability_bound(3);
    const double q = q_lower(3);
    for (double l = 0.01; l < std::sqrt(1.5); l += 0.01) {
        try {
            const double s = max_orlicz_scale(plus_mgf_bound(l, 3), l, q);
            EXPECT_LE(orlicz_probability_bound(l, q, s), b.raw_value + 1e-12) << l;
        } catch (const infeasible_parameters&) {
        }
    }
}

TEST(BoundsProperty, OrliczBoundIncreasesInScale) {
    for (double l : {0.3, 0.7, 1.0})
        for (double q : {0.1, 0.2}) {
            double prev = 0.0;
            for (double s = 0.05; s < 5.0; s *= 1.3) {
                const double v = orlicz_probability_bound(l, q, s);
                if (prev > 0.0) EXPECT_GT(v, prev);
                prev = v;
            }
        }
}

TEST(Bounds, InfeasibleScale) {
    EXPECT_THROW(max_orlicz_scale(1.0, 0.5, 0.2), infeasible_parameters);
}

TEST(Bounds, TailBound) {
    EXPECT_NEAR(tail_bound(2.0, 3), 8.0 * std::exp(-4.5), 1e-15);
    EXPECT_NEAR(tail_bound(2.0, 3), 0.088872, 1e-6);
    EXPECT_THROW(tail_bound(1.0, 3), domain_error);
}

TEST(BoundsProperty, TailBoundIsOptimizedChernoff) {
    for (int k : {3, 4, 10})
        for (double t : {1.1, 1.5, 2.0, 3.0}) {
            const double c = tail_optimal_c(t, k);
            EXPECT_NEAR(tail_g(c, t, k), tail_bound(t, k), 1e-13 * tail_bound(t, k) + 1e-300);
            for (double dc : {-0.05, 0.05}) {
                const double c2 = c + dc;
                if (c2 > 0.0 && c2 < 0.5 * k) EXPECT_GE(tail_g(c2, t, k), tail_bound(t, k) * (1 - 1e-13));
            }
        }
}

TEST(BoundsProperty, TailBoundDecreasingPastOne) {
    for (int k : {3, 4})
        for (double t = 1.05; t < 5.0; t += 0.05) EXPECT_LT(tail_bound(t + 0.05, k), tail_bound(t, k));
}

TEST(Bounds, ThresholdSolvesEquation) {
    for (double p : {0.05, 0.1268, 0.5})
        for (int k : {3, 4}) EXPECT_NEAR(tail_bound(solve_threshold(k, p), k), p, 1e-10);
    EXPECT_THROW(solve_threshold(3, 0.0), domain_error);
}

TEST(Bounds, FinalConstants) {
    EXPECT_GT(final_bound_from_probability(Field::Real, optimize_probability_bound(3).value), 0.06011);
    EXPECT_GT(final_bound_from_probability(Field::Complex, optimize_probability_bound(4).value), 0.03789);
}

TEST(BoundsProperty, GammaSubstitutionGivesWeakerConstant) {
    for (Field f : {Field::Real, Field::Complex}) {
        const int k = field_params(f).k;
        EXPECT_LT(final_bound_from_probability(f, gamma_k(k)),
                  final_bound_from_probability(f, optimize_probability_bound(k).value));
    }
}

TEST(BoundsProperty, FinalBoundIncreasingInP) {
    for (Field f : {Field::Real, Field::Complex}) {
        double prev = 0.0;
        for (double p = 0.02; p < 0.6; p += 0.02) {
            const double v = final_bound_from_probability(f, p);
            EXPECT_GT(v, prev);
            prev = v;
        }
    }
}

TEST(Certificate, ValidChains) {
    for (Field f : {Field::Real, Field::Complex}) {
        const auto c = theorem1_certificate(field_params(f));
        EXPECT_TRUE(c.valid());
        EXPECT_EQ(c.chain.size(), 12u);
        for (const auto& l : c.chain) EXPECT_TRUE(l.holds()) << l.name;
    }
    const auto r = theorem1_certificate(field_params(Field::Real));
    EXPECT_NEAR(r.final_bound, 0.06014398, 1e-7);
    EXPECT_NEAR(r.threshold, 1.91811099, 1e-7);
    const auto c = theorem1_certificate(field_params(Field::Complex));
    EXPECT_NEAR(c.final_bound, 0.03789834, 1e-7);
    EXPECT_NEAR(c.threshold, 1.76565622, 1e-7);
}

TEST(Certificate, TamperedLinkIsReported) {
    auto c = theorem1_certificate(field_params(Field::Real));
    c.chain[8].value = 0.5;  // threshold > 1
    ASSERT_FALSE(c.valid());
    EXPECT_EQ(*c.broken_link(), "threshold");
}
