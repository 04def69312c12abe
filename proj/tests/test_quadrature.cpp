#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "cubesect/integrate.hpp"
#include "cubesect/quadrature.hpp"
#include "oracles.hpp"

using namespace cubesect;

namespace {

const FieldCase real_case = field_params(Field::Real);
const FieldCase complex_case = field_params(Field::Complex);

double vol(const std::vector<double>& a, double t, const FieldCase& f, const QuadratureConfig& cfg = {}) {
    return section_volume(SectionQuery(normalize_direction(a), t, f), cfg);
}

double diag(std::size_t n, double t, const FieldCase& f) {
    return section_volume(SectionQuery(diagonal_direction(n), t, f));
}

}  // namespace

TEST(Integrate, Polynomial) {
    const auto r = integrate_adaptive([](double x) { return x * x * x; }, 0.0, 2.0, 1e-12);
    EXPECT_NEAR(r.value, 4.0, 1e-13);
    EXPECT_TRUE(r.converged);
}

TEST(Integrate, ToInfinity) {
    const auto r = integrate_to_infinity([](double x) { return std::exp(-x); }, 1.0, 1e-12);
    EXPECT_NEAR(r.value, std::exp(-1.0), 1e-11);
}

TEST(Quadrature, ClosedFormDiagonals) {
    EXPECT_NEAR(diag(2, 1.0, real_case), std::sqrt(2.0) - 1.0, 1e-9);
    EXPECT_NEAR(diag(3, 1.0, real_case), (6.0 * std::sqrt(3.0) - 9.0) / 4.0, 1e-9);
    EXPECT_NEAR(diag(2, 0.0, real_case), std::sqrt(2.0), 1e-9);
}

TEST(Quadrature, CentralCubeSectionsInVaalerBallRange) {
    EXPECT_NEAR(vol({1.0, 1.0, 1.0}, 0.0, real_case), oracle::cube_section_exact({1, 1, 1}, 0.0), 1e-9);
    std::mt19937_64 rng(11);
    for (int i = 0; i < 30; ++i) {
        const auto a = oracle::random_direction(2 + i % 8, rng);
        const double v = vol(a, 0.0, real_case);
        EXPECT_GE(v, 1.0 - 1e-9);
        EXPECT_LE(v, std::sqrt(2.0) + 1e-9);
    }
}

TEST(Quadrature, SingleCoordinate) {
    EXPECT_EQ(vol({0.0, 1.0}, 0.5, real_case), 1.0);
    EXPECT_EQ(vol({1.0}, 1.5, complex_case), 0.0);
    EXPECT_THROW(vol({1.0, 0.0}, 1.0, real_case), discontinuity_error);
    const auto r = section_volume_report(SectionQuery(normalize_direction({1.0}), 0.2, real_case));
    EXPECT_EQ(r.tail, TailMethod::Analytic);
}

TEST(Quadrature, CubeMatchesBSplineOracle) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> tt(0.0, 1.6);
    double worst = 0.0;
    for (int i = 0; i < 80; ++i) {
        const auto a = oracle::random_direction(2 + i % 9, rng);
        const double t = tt(rng);
        worst = std::max(worst, std::abs(vol(a, t, real_case) - oracle::cube_section_exact(a, t)));
    }
    EXPECT_LT(worst, 1e-8);
}

TEST(Quadrature, PolydiscMatchesLensOracle) {
    for (double r : {1.0, 0.8, 0.5, 0.2})
        for (double t : {0.0, 0.01, 0.3, 0.6, 0.9, 1.0, 1.2, 1.5}) {
            const double a2 = r, a1 = 1.0;
            EXPECT_NEAR(vol({a1, a2}, t, complex_case), oracle::polydisc_section_two(a1, a2, t), 1e-8)
                << r << " " << t;
        }
}

TEST(Quadrature, ConvolutionOracleAtTheOrigin) {
    // A(a,t) is the density of sum a_j xi_j at t/2
    for (double x : {0.0, 0.1, 0.3, 0.5})
        EXPECT_NEAR(diag(2, 2.0 * x, real_case), oracle::convolution_density_diag2(x), 2e-5);
}

TEST(Quadrature, DiagonalLimits) {
    EXPECT_NEAR(diagonal_limit(real_case), std::sqrt(6.0 / (std::numbers::pi * std::pow(std::numbers::e, 3))), 1e-12);
    EXPECT_NEAR(diagonal_limit(complex_case), 2.0 / (std::numbers::e * std::numbers::e), 1e-12);
}

TEST(Quadrature, DiagonalSequenceDecreasesTowardLimit) {
    double prev = 1.0;
    for (std::size_t n = 2; n <= 20; ++n) {
        const double v = diag(n, 1.0, real_case);
        EXPECT_LT(v, prev) << n;
        prev = v;
    }
    EXPECT_NEAR(diag(200, 1.0, real_case), diagonal_limit(real_case), 0.01);
    EXPECT_NEAR(diag(200, 1.0, complex_case), diagonal_limit(complex_case), 0.01);
}

TEST(QuadratureProperty, MonotoneInTAndBelowKKBound) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 12; ++i) {
        const auto a = oracle::random_direction(2 + i % 6, rng);
        for (const auto* f : {&real_case, &complex_case}) {
            double prev = 1e300;
            for (double t = 0.05; t <= 1.5; t += 0.1) {
                const double v = vol(a, t, *f);
                EXPECT_LE(v, prev + 1e-8);
                EXPECT_LE(v, kk_upper_bound(t, *f) + 1e-8);
                EXPECT_GE(v, -1e-9);
                prev = v;
            }
        }
    }
}

TEST(QuadratureProperty, PermutationAndSignInvariance) {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 10; ++i) {
        auto a = oracle::random_direction(3 + i % 4, rng);
        const double ref = vol(a, 0.7, real_case);
        std::shuffle(a.begin(), a.end(), rng);
        a[0] = -a[0];
        EXPECT_EQ(vol(a, 0.7, real_case), ref);
    }
}

TEST(QuadratureProperty, ScaleInvariance) {
    EXPECT_NEAR(vol({3.0, 2.0, 1.0}, 0.8, complex_case), vol({30.0, 20.0, 10.0}, 0.8, complex_case), 1e-12);
}

TEST(Quadrature, ReportsTailMethod) {
    const auto r = section_volume_report(SectionQuery(diagonal_direction(2), 1.0, real_case));
    EXPECT_GT(r.upper_limit, 0.0);
    EXPECT_GT(r.panels, 0);
    EXPECT_LT(r.error_estimate, 1e-9);
}

TEST(Quadrature, BudgetExhaustionRaisesWithPartialValue) {
    QuadratureConfig cfg;
    cfg.contour_tail = false;
    cfg.max_panels = 5;
    try {
        vol({1.0, 1.0}, 1.0, real_case, cfg);
        FAIL() << "expected convergence_error";
    } catch (const convergence_error& e) {
        EXPECT_TRUE(std::isfinite(e.partial_value));
    }
}

TEST(Quadrature, ConfigValidation) {
    QuadratureConfig cfg;
    cfg.abs_tol = 1e-15;
    EXPECT_THROW(vol({1.0, 1.0}, 0.3, real_case, cfg), invalid_input);
    cfg = {};
    cfg.max_panels = 0;
    EXPECT_THROW(vol({1.0, 1.0}, 0.3, real_case, cfg), invalid_input);
}

TEST(Quadrature, KKBoundValues) {
    EXPECT_NEAR(kk_upper_bound(1.0, real_case), 1.0, 1e-15);
    EXPECT_NEAR(kk_upper_bound(0.0, real_case), std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(kk_upper_bound(0.0, complex_case), 2.0, 1e-15);
    EXPECT_THROW(kk_upper_bound(-1.0, real_case), invalid_input);
}
