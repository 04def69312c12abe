#pragma once

// Special functions used by the volume formulas and the bound chain.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "cubesect/core.hpp"

namespace cubesect {

enum class BesselKind { J0, J1, j1_normalized };

/// sin(x)/x with the removable singularity filled in.
inline double sinc(double x) {
    const double ax = std::abs(x);
    if (ax < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0);
    }
    return std::sin(x) / x;
}

namespace detail {

inline constexpr double bessel_series_cutoff = 13.0;

// Coefficient a_k(nu) of the Hankel asymptotic expansion.
inline double hankel_coefficient_step(int nu, int k) {
    const double two_k_minus_1 = 2.0 * k - 1.0;
    return (4.0 * nu * nu - two_k_minus_1 * two_k_minus_1) / (8.0 * k);
}

inline double bessel_series(int nu, double x) {
    const double h = 0.5 * x;
    double term = (nu == 0) ? 1.0 : h;
    double sum = term;
    const double h2 = h * h;
    for (int k = 1; k < 200; ++k) {
        term *= -h2 / (static_cast<double>(k) * (k + nu));
        sum += term;
        if (std::abs(term) < 1e-18 * std::max(1.0, std::abs(sum))) break;
    }
    return sum;
}

// x > 0, large: sqrt(2/(pi x)) (P cos chi - Q sin chi)
inline double bessel_asymptotic(int nu, double x) {
    double p = 1.0, q = 0.0;
    double a = 1.0;
    double xk = 1.0;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 80; ++k) {
        a *= hankel_coefficient_step(nu, k);
        xk *= x;
        const double term = a / xk;
        if (std::abs(term) >= prev) break;
        prev = std::abs(term);
        // i^k: k=1 -> +Q, k=2 -> -P, k=3 -> -Q, k=4 -> +P
        switch (k % 4) {
            case 1: q += term; break;
            case 2: p -= term; break;
            case 3: q -= term; break;
            default: p += term; break;
        }
        if (std::abs(term) < 1e-17) break;
    }
    const double chi = x - (0.5 * nu + 0.25) * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace detail

inline double bessel_j0(double x) {
    if (!std::isfinite(x)) throw invalid_input("bessel_j0: non-finite argument");
    x = std::abs(x);
    return x <= detail::bessel_series_cutoff ? detail::bessel_series(0, x)
                                              : detail::bessel_asymptotic(0, x);
}

inline double bessel_j1(double x) {
    if (!std::isfinite(x)) throw invalid_input("bessel_j1: non-finite argument");
    const double s = x < 0.0 ? -1.0 : 1.0;
    x = std::abs(x);
    return s * (x <= detail::bessel_series_cutoff ? detail::bessel_series(1, x)
                                                   : detail::bessel_asymptotic(1, x));
}

/// 2 J1(x) / x, equal to 1 at the origin.
inline double j1_normalized(double x) {
    if (!std::isfinite(x)) throw invalid_input("j1_normalized: non-finite argument");
    x = std::abs(x);
    if (x <= detail::bessel_series_cutoff) {
        // 2 J1(x)/x = sum (-1)^k (x/2)^{2k} / (k! (k+1)!)
        const double h2 = 0.25 * x * x;
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 200; ++k) {
            term *= -h2 / (static_cast<double>(k) * (k + 1));
            sum += term;
            if (std::abs(term) < 1e-18) break;
        }
        return sum;
    }
    return 2.0 * detail::bessel_asymptotic(1, x) / x;
}

inline double bessel(BesselKind kind, double x) {
    switch (kind) {
        case BesselKind::J0: return bessel_j0(x);
        case BesselKind::J1: return bessel_j1(x);
        case BesselKind::j1_normalized: return j1_normalized(x);
    }
    throw invalid_input("unknown Bessel kind");
}

/// Truncated series  sum_k (sign*i)^k a_k(nu) w^{-k}  of the Hankel function
/// H^(1) (sign = +1) or H^(2) (sign = -1) with the oscillating and
/// sqrt(2/(pi w)) factors stripped. Accurate to ~1e-15 for |w| >= 25 with
/// -pi/2 <= arg w <= pi/2.
inline std::complex<double> hankel_amplitude_series(int nu, std::complex<double> w, int sign) {
    const std::complex<double> step(0.0, static_cast<double>(sign));
    std::complex<double> sum = 1.0;
    std::complex<double> term = 1.0;
    const std::complex<double> inv_w = 1.0 / w;
    double prev = 1.0;
    for (int k = 1; k < 40; ++k) {
        term *= step * detail::hankel_coefficient_step(nu, k) * inv_w;
        const double mag = std::abs(term);
        if (mag >= prev) break;
        sum += term;
        prev = mag;
        if (mag < 1e-17) break;
    }
    return sum;
}

/// sqrt(2/k) (Gamma((p+k)/2) / Gamma(k/2))^{1/p}: the sharp L_p Khintchine
/// constant for vectors uniform on S^{k-1}.
inline double khintchine_b(double p, int k) {
    if (!(p >= 2.0)) throw domain_error("khintchine_b: p must be >= 2");
    if (k < 2) throw domain_error("khintchine_b: k must be >= 2");
    const double half_k = 0.5 * k;
    if (p == std::floor(p) && static_cast<long>(p) % 2 == 0 && p <= 200.0) {
        // Gamma(m + k/2) / Gamma(k/2) = prod_{i<m} (k/2 + i) for p = 2m
        double ratio = 1.0;
        for (int i = 0; i < static_cast<int>(p) / 2; ++i) ratio *= half_k + i;
        return std::sqrt(2.0 * std::pow(ratio, 2.0 / p) / k);
    }
    const double log_ratio = std::lgamma(0.5 * p + half_k) - std::lgamma(half_k);
    return std::sqrt(2.0 / k) * std::exp(log_ratio / p);
}

/// f_k(c) = (1 - 2c/k)^{-k/2}, the closed form of sum_m c^m b_{2m,k}^{2m} / m!.
inline double mgf_closed_form(double c, int k) {
    if (k < 2) throw domain_error("mgf_closed_form: k must be >= 2");
    if (!(c >= 0.0) || c >= 0.5 * k) throw domain_error("mgf_closed_form: need 0 <= c < k/2");
    return std::pow(1.0 - 2.0 * c / k, -0.5 * k);
}

struct SeriesValue {
    double sum;
    double remainder_bound;
};

/// Partial sum of the f_k series with terms m = 0..terms-1 and a geometric
/// bound on the remainder.
inline SeriesValue mgf_series(double c, int k, int terms) {
    if (k < 2 || terms < 1) throw domain_error("mgf_series: need k >= 2 and terms >= 1");
    if (!(c >= 0.0) || c >= 0.5 * k) throw domain_error("mgf_series: need 0 <= c < k/2");
    // term_m = (2c/k)^m Gamma(m + k/2) / (Gamma(k/2) m!)
    const double x = 2.0 * c / k;
    const double h = 0.5 * k;
    double term = 1.0, sum = 0.0;
    for (int m = 0; m < terms; ++m) {
        sum += term;
        term *= x * (m + h) / (m + 1.0);
    }
    // term now holds term_{terms}; successive ratios x (m+h)/(m+1) are
    // bounded by x * max(1, (terms+h)/(terms+1))
    const double r = x * std::max(1.0, (terms + h) / (terms + 1.0));
    const double rem = r < 1.0 ? term / (1.0 - r) : std::numeric_limits<double>::infinity();
    return {sum, rem};
}

namespace detail {

inline double gamma_p_series(double a, double x) {
    double ap = a, del = 1.0 / a, sum = del;
    for (int n = 0; n < 10000; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-17) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
inline double gamma_q_fraction(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

/// Regularized upper incomplete gamma Q(a, x).
inline double gamma_q(double a, double x) {
    if (!(a > 0.0) || !(x >= 0.0)) throw domain_error("gamma_q: need a > 0 and x >= 0");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
    return detail::gamma_q_fraction(a, x);
}

/// Large-n limit of P(|sum a_j U_j| >= 1) along the diagonal: Q(k/2, k/2).
inline double gaussian_limit_phi(int k) {
    if (k < 2) throw domain_error("gaussian_limit_phi: k must be >= 2");
    return gamma_q(0.5 * k, 0.5 * k);
}

/// Conjugate Orlicz pair L(x) = s(e^x - x - 1), M(x) = (s+x) log(1 + x/s) - x.
struct OrliczPair {
    explicit OrliczPair(double s) : scale(s) {
        if (!(s > 0.0) || !std::isfinite(s)) throw domain_error("OrliczPair: scale must be positive");
    }
    double scale;
};

inline double orlicz_L(const OrliczPair& pair, double x) {
    if (!(x >= 0.0)) throw domain_error("orlicz_L: x must be >= 0");
    return pair.scale * (std::expm1(x) - x);
}

inline double orlicz_M(const OrliczPair& pair, double x) {
    if (!(x >= 0.0)) throw domain_error("orlicz_M: x must be >= 0");
    return (pair.scale + x) * std::log1p(x / pair.scale) - x;
}

}  // namespace cubesect
