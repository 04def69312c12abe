#pragma once

// Section volumes as oscillatory integrals
//   real:    A(a,t) = 2/pi  int_0^inf  prod sinc(a_j s) cos(t s) ds
//   complex: A(a,t) = 1/2   int_0^inf  prod j1(a_j s) J0(t s) s ds
// The head [0, S] is integrated panel by panel; the tail [S, inf) is either
// bounded by the product decay estimate or evaluated exactly by rotating the
// contour after splitting every factor into outgoing/incoming exponentials.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "cubesect/core.hpp"
#include "cubesect/integrate.hpp"
#include "cubesect/specfun.hpp"

namespace cubesect {

struct QuadratureConfig {
    double abs_tol = 1e-10;
    int max_panels = 200000;
    double truncation_tail_tol = 1e-11;
    bool contour_tail = true;  // allow the exact rotated-contour tail

    void validate() const {
        if (!(abs_tol >= 1e-12) || !std::isfinite(abs_tol)) throw invalid_input("abs_tol must be >= 1e-12");
        if (max_panels < 1) throw invalid_input("max_panels must be >= 1");
        if (!(truncation_tail_tol > 0.0)) throw invalid_input("truncation_tail_tol must be positive");
    }
};

enum class TailMethod { Analytic, DecayBound, ContourRotation };

inline const char* to_string(TailMethod m) {
    switch (m) {
        case TailMethod::Analytic: return "analytic";
        case TailMethod::DecayBound: return "decay-bound";
        case TailMethod::ContourRotation: return "contour";
    }
    return "?";
}

struct QuadratureReport {
    double value = 0.0;
    double error_estimate = 0.0;
    double upper_limit = 0.0;
    long panels = 0;
    TailMethod tail = TailMethod::Analytic;
};

namespace detail {

inline constexpr double sinc_second_lobe = 0.21723362821122166;   // max |sinc| on [pi, inf)
inline constexpr double j1_second_lobe = 0.13246;                 // max |2J1(x)/x| past its first zero (upper)
inline constexpr double j1_first_zero = 3.8317059702075123;
inline constexpr double sqrt_x_j1_sup = 0.8251;                   // sup sqrt(x)|J1(x)| = 0.82503...
inline const double sqrt_x_j0_sup = std::sqrt(2.0 / std::numbers::pi);

// s^p K(w s) prod F(b_j s) with (F, K) = (sinc, cos) for the cube and
// (2 J1(x)/x, J0) for the polydisc.
struct ProductIntegrand {
    Field kind;
    std::span<const double> b;
    double w;
    int p;

    double operator()(double s) const {
        double v = p == 0 ? 1.0 : std::pow(s, p);
        if (kind == Field::Real) {
            v *= std::cos(w * s);
            for (double bj : b) v *= sinc(bj * s);
            return v;
        }
        if (w > 0.0) v *= bessel_j0(w * s);
        for (double bj : b) {
            v *= j1_normalized(bj * s);
            if (v == 0.0) break;
        }
        return v;
    }
};

struct FactorEnvelope {
    double log_const;  // log sup_{s >= S} |factor|
    double log_decay;  // log of C in |factor(s)| <= C (S/s)^beta
    double beta;
};

// Rigorous bound on int_S^inf |integrand| ds.
inline double tail_decay_bound(Field kind, std::span<const double> b, double w, int p, double S) {
    std::vector<FactorEnvelope> env;
    env.reserve(b.size() + 1);
    for (double bj : b) {
        const double x0 = bj * S;
        if (kind == Field::Real) {
            const double c = x0 <= std::numbers::pi ? std::max(sinc(x0), sinc_second_lobe)
                                                    : std::min(1.0 / x0, sinc_second_lobe);
            env.push_back({std::log(c), -std::log(x0), 1.0});
        } else {
            const double d = 2.0 * sqrt_x_j1_sup * std::pow(x0, -1.5);
            const double c = x0 <= j1_first_zero ? std::max(j1_normalized(x0), j1_second_lobe)
                                                 : std::min(d, j1_second_lobe);
            env.push_back({std::log(std::min(c, 1.0)), std::log(d), 1.5});
        }
    }
    if (kind == Field::Complex && w > 0.0) {
        const double d = sqrt_x_j0_sup / std::sqrt(w * S);
        env.push_back({std::log(std::min(1.0, d)), std::log(d), 0.5});
    }
    std::sort(env.begin(), env.end(), [](const FactorEnvelope& x, const FactorEnvelope& y) {
        return (x.log_decay - x.log_const) / x.beta < (y.log_decay - y.log_const) / y.beta;
    });
    double log_mix = 0.0;
    for (const auto& e : env) log_mix += e.log_const;

    double best = std::numeric_limits<double>::infinity();
    double beta = 0.0;
    for (const auto& e : env) {
        log_mix += e.log_decay - e.log_const;
        beta += e.beta;
        if (beta > p + 1.0) best = std::min(best, std::exp(log_mix + (p + 1.0) * std::log(S)) / (beta - p - 1.0));
    }
    return best;
}

inline std::optional<long> panels_for_decay_bound(Field kind, std::span<const double> b, double w, int p,
                                                  double h, double tail_tol, long max_panels) {
    long n = 1;
    for (;;) {
        if (tail_decay_bound(kind, b, w, p, n * h) <= tail_tol) return n;
        if (n >= max_panels) return std::nullopt;
        n = std::min(max_panels, std::max(n + 1, static_cast<long>(std::ceil(n * 1.15))));
    }
}

inline double real_amplification(std::span<const double> b, double S) {
    double amp = 1.0;
    for (double bj : b) amp *= std::max(1.0, 1.0 / (bj * S));
    return amp;
}

struct Wave {
    double omega;
    std::complex<double> coef;
};

// Keeps the outgoing half of the conjugate-symmetric spectrum: omega > 0 with
// weight 2, omega = 0 with weight 1.
inline std::vector<Wave> fold_spectrum(std::vector<Wave> waves, double zero_tol) {
    std::vector<Wave> kept;
    kept.reserve(waves.size() / 2 + 1);
    for (auto w : waves) {
        if (std::abs(w.omega) <= zero_tol) {
            kept.push_back({0.0, w.coef});
        } else if (w.omega > 0.0) {
            kept.push_back({w.omega, 2.0 * w.coef});
        }
    }
    std::sort(kept.begin(), kept.end(), [](const Wave& x, const Wave& y) { return x.omega < y.omega; });
    std::vector<Wave> merged;
    for (const auto& w : kept) {
        if (!merged.empty() && std::abs(w.omega - merged.back().omega) <= zero_tol)
            merged.back().coef += w.coef;
        else
            merged.push_back(w);
    }
    return merged;
}

// int_S^inf s^p cos(w s) prod sinc(b_j s) ds; exact because
// sin x / x = (e^{ix} - e^{-ix}) / (2ix). Needs b.size() >= p + 2.
inline IntegrationResult real_contour_tail(std::span<const double> b, double w, int p, double S, double tol) {
    using cd = std::complex<double>;
    const std::size_t m = b.size();
    double scale = w;
    for (double bj : b) scale += bj;
    const double zero_tol = 1e-13 * scale;

    const std::vector<std::pair<double, double>> kernel =
        w > 0.0 ? std::vector<std::pair<double, double>>{{w, 0.5}, {-w, 0.5}}
                : std::vector<std::pair<double, double>>{{0.0, 1.0}};
    // 1/(2i)^m; the 1/(b_j z) factors are applied per node
    const cd pre = std::pow(cd(0.0, -0.5), static_cast<int>(m));
    const std::uint64_t combos = std::uint64_t{1} << m;
    std::vector<Wave> waves;
    waves.reserve(combos * kernel.size());
    for (std::uint64_t mask = 0; mask < combos; ++mask) {
        double om = 0.0, sign = 1.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (mask >> j & 1U) {
                om -= b[j];
                sign = -sign;
            } else {
                om += b[j];
            }
        }
        for (const auto& [k0, kc] : kernel) waves.push_back({om + k0, pre * (sign * kc)});
    }
    auto spectrum = fold_spectrum(std::move(waves), zero_tol);
    for (auto& wv : spectrum) wv.coef *= std::exp(cd(0.0, wv.omega * S));

    auto f = [&](double y) {
        const cd z(S, y);
        cd amp = p == 0 ? cd(1.0) : std::pow(z, p);
        for (double bj : b) amp /= bj * z;
        cd sum = 0.0;
        for (const auto& wv : spectrum) sum += wv.coef * std::exp(-wv.omega * y);
        return (cd(0.0, 1.0) * amp * sum).real();
    };
    return integrate_to_infinity(f, 0.0, tol, 4000);
}

// int_S^inf s J0(w s) prod j1(b_j s) ds via the Hankel expansions of J0 and
// J1; requires b_j S >= 25 and (w = 0 or w S >= 25).
inline IntegrationResult complex_contour_tail(std::span<const double> b, double w, double S, double tol) {
    using cd = std::complex<double>;
    const std::size_t kernel_parts = w > 0.0 ? 2 : 1;
    double scale = w;
    for (double bj : b) scale += bj;
    const double zero_tol = 1e-13 * scale;

    // enumeration order: kernel sign outermost, then factors in order
    std::vector<double> omega{w > 0.0 ? w : 0.0};
    if (kernel_parts == 2) omega.push_back(-w);
    for (double bj : b) {
        std::vector<double> next;
        next.reserve(omega.size() * 2);
        for (double om : omega) {
            next.push_back(om + bj);
            next.push_back(om - bj);
        }
        omega = std::move(next);
    }
    std::vector<double> weight(omega.size(), 0.0);
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < omega.size(); ++i) {
        if (std::abs(omega[i]) <= zero_tol) {
            omega[i] = 0.0;
            weight[i] = 1.0;
        } else if (omega[i] > 0.0) {
            weight[i] = 2.0;
        }
        if (weight[i] != 0.0) active.push_back(i);
    }
    std::vector<cd> phase(omega.size());
    for (std::size_t i : active) phase[i] = weight[i] * std::exp(cd(0.0, omega[i] * S));

    const double phi0 = 0.25 * std::numbers::pi;
    const double phi1 = 0.75 * std::numbers::pi;
    std::vector<cd> amps, next;
    auto f = [&](double y) {
        const cd z(S, y);
        amps.assign(1, z);
        if (kernel_parts == 2) {
            const cd x = w * z;
            const cd env = 0.5 * std::sqrt(2.0 / (std::numbers::pi * x));
            const cd base = amps[0];
            amps = {base * env * hankel_amplitude_series(0, x, +1) * std::exp(cd(0.0, -phi0)),
                    base * env * hankel_amplitude_series(0, x, -1) * std::exp(cd(0.0, phi0))};
        }
        for (double bj : b) {
            const cd x = bj * z;
            const cd env = (1.0 / x) * std::sqrt(2.0 / (std::numbers::pi * x));
            const cd plus = env * hankel_amplitude_series(1, x, +1) * std::exp(cd(0.0, -phi1));
            const cd minus = env * hankel_amplitude_series(1, x, -1) * std::exp(cd(0.0, phi1));
            next.clear();
            for (const cd& v : amps) {
                next.push_back(v * plus);
                next.push_back(v * minus);
            }
            std::swap(amps, next);
        }
        cd sum = 0.0;
        for (std::size_t i : active) sum += amps[i] * phase[i] * std::exp(-omega[i] * y);
        return (cd(0.0, 1.0) * sum).real();
    };
    return integrate_to_infinity(f, 0.0, tol, 4000);
}

template <class F>
IntegrationResult integrate_panels(const F& f, double h, long panels, double tol) {
    IntegrationResult total;
    const double per_panel = tol / static_cast<double>(panels);
    for (long i = 0; i < panels; ++i) {
        const auto r = integrate_adaptive(f, i * h, (i + 1) * h, per_panel, 64);
        total.value += r.value;
        total.error += r.error;
        total.intervals += r.intervals;
    }
    total.converged = total.error <= tol;
    return total;
}

inline constexpr long cheap_panel_count = 2000;
inline constexpr std::size_t real_contour_max_terms = 12;
inline constexpr std::size_t complex_contour_max_terms = 10;
inline constexpr double hankel_min_argument = 25.0;

/// int_0^inf s^p K(w s) prod F(b_j s) ds for b sorted nonincreasing, all > 0.
/// Complex kind supports p = 1 only.
inline QuadratureReport product_integral(Field kind, std::span<const double> b, double w, int p,
                                         const QuadratureConfig& cfg) {
    const ProductIntegrand f{kind, b, w, p};
    const double h = std::numbers::pi / std::max(w, b[0]);
    const long max_panels = cfg.max_panels;
    const double head_tol = 0.5 * cfg.abs_tol;

    const auto bound_panels = panels_for_decay_bound(kind, b, w, p, h, cfg.truncation_tail_tol, max_panels);
    auto finish_bound = [&](long panels) {
        const auto head = integrate_panels(f, h, panels, head_tol);
        const double S = panels * h;
        return QuadratureReport{head.value, head.error + tail_decay_bound(kind, b, w, p, S), S, panels,
                                TailMethod::DecayBound};
    };
    if (bound_panels && *bound_panels <= cheap_panel_count) return finish_bound(*bound_panels);

    std::optional<long> contour_panels;
    if (cfg.contour_tail) {
        if (kind == Field::Real && b.size() <= real_contour_max_terms && b.size() >= static_cast<std::size_t>(p) + 2) {
            long n = std::min(4L, max_panels);
            while (n < max_panels && real_amplification(b, n * h) > 1e3)
                n = std::min(max_panels, std::max(n + 1, static_cast<long>(std::ceil(n * 1.25))));
            if (real_amplification(b, n * h) <= 1e10) contour_panels = n;
        } else if (kind == Field::Complex && b.size() <= complex_contour_max_terms) {
            double s_min = hankel_min_argument / b.back();
            if (w > 0.0) s_min = std::max(s_min, hankel_min_argument / w);
            const double n = std::max(4.0, std::ceil(s_min / h));
            if (n <= static_cast<double>(max_panels)) contour_panels = static_cast<long>(n);
        }
    }
    if (contour_panels) {
        const long panels = *contour_panels;
        const double S = panels * h;
        const auto head = integrate_panels(f, h, panels, head_tol);
        const double tail_tol = 0.25 * cfg.abs_tol;
        const auto tail = kind == Field::Real ? real_contour_tail(b, w, p, S, tail_tol)
                                              : complex_contour_tail(b, w, S, tail_tol);
        return {head.value + tail.value, head.error + tail.error, S, panels, TailMethod::ContourRotation};
    }
    if (bound_panels) return finish_bound(*bound_panels);

    const auto partial = integrate_panels(f, h, max_panels, head_tol);
    throw convergence_error("integrand decays too slowly for max_panels = " + std::to_string(max_panels),
                            partial.value);
}

}  // namespace detail

/// A(a,t) with diagnostics about how the integral was truncated.
inline QuadratureReport section_volume_report(const SectionQuery& q, const QuadratureConfig& cfg = {}) {
    cfg.validate();
    const auto a = q.direction.nonzero();
    const double t = q.t;

    if (a.size() == 1) {
        if (t == 1.0) throw discontinuity_error("section volume jumps at t = 1 for a coordinate normal");
        return {t < 1.0 ? 1.0 : 0.0, 0.0, 0.0, 0, TailMethod::Analytic};
    }
    const Field kind = q.field.field;
    const double pre = kind == Field::Real ? 2.0 / std::numbers::pi : 0.5;
    QuadratureConfig raw = cfg;
    raw.abs_tol /= pre;
    raw.truncation_tail_tol /= pre;
    QuadratureReport r;
    try {
        r = detail::product_integral(kind, a, t, kind == Field::Real ? 0 : 1, raw);
    } catch (const convergence_error& e) {
        throw convergence_error(std::string("section volume: ") + e.what(), pre * e.partial_value);
    }
    r.value *= pre;
    r.error_estimate *= pre;
    return r;
}

inline double section_volume(const SectionQuery& q, const QuadratureConfig& cfg = {}) {
    return section_volume_report(q, cfg).value;
}

/// sqrt(2/(1+t^2)) for the cube, 2/(1+t^2) for the polydisc.
inline double kk_upper_bound(double t, const FieldCase& field) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw invalid_input("kk_upper_bound: t must be finite and >= 0");
    const double r = 2.0 / (1.0 + t * t);
    return field.field == Field::Real ? std::sqrt(r) : r;
}

/// Limit of A(a^n, 1) along diagonal directions as n -> inf.
inline double diagonal_limit(const FieldCase& field, const QuadratureConfig& cfg = {}) {
    cfg.validate();
    if (field.field == Field::Real) {
        auto f = [](double s) { return (2.0 / std::numbers::pi) * std::exp(-s * s / 6.0) * std::cos(s); };
        return integrate_adaptive(f, 0.0, 24.0, 0.1 * cfg.abs_tol, 2000).value;
    }
    auto f = [](double s) { return 0.5 * std::exp(-s * s / 8.0) * bessel_j0(s) * s; };
    return integrate_adaptive(f, 0.0, 28.0, 0.1 * cfg.abs_tol, 2000).value;
}

}  // namespace cubesect
