#pragma once

// Lower bounds for P(S >= 0), the spherical tail bound and the assembly of
// the dimension-free lower bounds for A(a, 1).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cubesect/core.hpp"
#include "cubesect/montecarlo.hpp"
#include "cubesect/specfun.hpp"

namespace cubesect {

struct infeasible_parameters : domain_error {
    using domain_error::domain_error;
};

struct certificate_error : error {
    using error::error;
};

enum class BoundMethod { Veraar, OrliczDual };

inline const char* to_string(BoundMethod m) { return m == BoundMethod::Veraar ? "veraar" : "orlicz-dual"; }

struct ProbabilityBound {
    double value = 0.0;      // capped to [0, 1]
    double raw_value = 0.0;  // before capping
    BoundMethod method = BoundMethod::Veraar;
    std::optional<double> lambda_star;
    std::optional<double> q_used;
    std::optional<double> orlicz_scale_used;
};

inline double gamma_k(int k) {
    if (k < 2) throw domain_error("gamma_k: k must be >= 2");
    return (2.0 * std::sqrt(3.0) - 3.0) / (3.0 + 4.0 / k);
}

/// (2 sqrt3 - 3) (E S^2)^2 / E S^4 from the exact moments.
inline ProbabilityBound veraar_bound(const Direction& dir, int k) {
    if (dir.nonzero_count() < 2) throw domain_error("veraar_bound: direction needs >= 2 nonzero coordinates");
    const double s2 = moment_s2_exact(dir, k);
    const double s4 = moment_s4_exact(dir, k);
    const double v = (2.0 * std::sqrt(3.0) - 3.0) * s2 * s2 / s4;
    return {std::min(v, 1.0), v, BoundMethod::Veraar, {}, {}, {}};
}

/// (1 - 2 lambda^2 / k)^{-k/2}, bound on E exp(lambda S / sqrt(E S^2)).
inline double laplace_mgf_bound(double lambda, int k) {
    if (k < 2) throw domain_error("laplace_mgf_bound: k must be >= 2");
    if (!(std::abs(lambda) < std::sqrt(0.5 * k))) throw domain_error("laplace_mgf_bound: need |lambda| < sqrt(k/2)");
    return std::pow(1.0 - 2.0 * lambda * lambda / k, -0.5 * k);
}

/// (5/4) (1 - 2 lambda^2 / k)^{-k/2}, bound on E exp(lambda Y_+).
inline double plus_mgf_bound(double lambda, int k) {
    if (!(lambda > 0.0)) throw domain_error("plus_mgf_bound: lambda must be > 0");
    return 1.25 * laplace_mgf_bound(lambda, k);
}

/// Lower bound for E Y_+ with Y = S / sqrt(E S^2).
inline double q_lower(int k) {
    if (k < 2) throw domain_error("q_lower: k must be >= 2");
    return 0.5 * std::sqrt(static_cast<double>(k) / (3.0 * k + 4.0));
}

inline double q_lower_limit() { return 0.5 / std::sqrt(3.0); }

/// [ (s + 1/(lambda q)) log(1 + 1/(lambda q s)) - 1/(lambda q) ]^{-1}, uncapped.
inline double orlicz_probability_bound(double lambda, double q, double orlicz_scale) {
    if (!(lambda > 0.0) || !(q > 0.0) || !(orlicz_scale > 0.0))
        throw domain_error("orlicz_probability_bound: inputs must be positive");
    const double r = 1.0 / (lambda * q);
    const double denom = (orlicz_scale + r) * std::log1p(r / orlicz_scale) - r;
    if (!(denom > 0.0)) throw infeasible_parameters("orlicz_probability_bound: nonpositive denominator");
    return 1.0 / denom;
}

/// Largest admissible Orlicz scale 1 / (E exp(lambda Y_+) - lambda q - 1).
inline double max_orlicz_scale(double plus_mgf, double lambda, double q) {
    const double d = plus_mgf - lambda * q - 1.0;
    if (!(d > 0.0)) throw infeasible_parameters("orlicz scale constraint is empty");
    return 1.0 / d;
}

namespace detail {

struct OrliczProblem {
    std::function<double(double)> plus_mgf;
    double q;
    double lambda_max;
};

inline double orlicz_objective(const OrliczProblem& pr, double lambda) {
    try {
        const double s = max_orlicz_scale(pr.plus_mgf(lambda), lambda, pr.q);
        return orlicz_probability_bound(lambda, pr.q, s);
    } catch (const infeasible_parameters&) {
        return -std::numeric_limits<double>::infinity();
    }
}

inline ProbabilityBound maximize_orlicz(const OrliczProblem& pr) {
    constexpr int grid = 200;
    const double hi = pr.lambda_max * (1.0 - 1e-6);
    const double step = hi / grid;
    int best_i = 1;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 1; i <= grid; ++i) {
        const double v = orlicz_objective(pr, i * step);
        if (v > best) {
            best = v;
            best_i = i;
        }
    }
    if (!std::isfinite(best)) throw infeasible_parameters("no feasible lambda for the Orlicz bound");

    // golden-section refinement on the neighbouring grid cells
    double lo = (best_i - 1) * step, up = std::min(hi, (best_i + 1) * step);
    lo = std::max(lo, 1e-12);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = up - g * (up - lo), x2 = lo + g * (up - lo);
    double f1 = orlicz_objective(pr, x1), f2 = orlicz_objective(pr, x2);
    while (up - lo > 1e-10) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (up - lo);
            f2 = orlicz_objective(pr, x2);
        } else {
            up = x2;
            x2 = x1;
            f2 = f1;
            x1 = up - g * (up - lo);
            f1 = orlicz_objective(pr, x1);
        }
    }
    double lambda = 0.5 * (lo + up);
    double raw = orlicz_objective(pr, lambda);
    if (best > raw) {  // grid point beat the refinement (flat or boundary optimum)
        lambda = best_i * step;
        raw = best;
    }
    const double scale = max_orlicz_scale(pr.plus_mgf(lambda), lambda, pr.q);
    return {std::clamp(raw, 0.0, 1.0), raw, BoundMethod::OrliczDual, lambda, pr.q, scale};
}

}  // namespace detail

/// Best Orlicz-duality lower bound for P(S >= 0) over lambda in (0, sqrt(k/2)).
inline ProbabilityBound optimize_probability_bound(int k) {
    if (k < 2) throw domain_error("optimize_probability_bound: k must be >= 2");
    return detail::maximize_orlicz({[k](double l) { return plus_mgf_bound(l, k); }, q_lower(k), std::sqrt(0.5 * k)});
}

/// The k -> infinity version: Laplace factor exp(lambda^2), q = 1/(2 sqrt3).
inline ProbabilityBound optimize_probability_bound_limit() {
    return detail::maximize_orlicz({[](double l) { return 1.25 * std::exp(l * l); }, q_lower_limit(), 3.0});
}

/// t^k exp(k/2 - k t^2 / 2), bound on P(|sum a_j U_j| >= t) for t > 1.
inline double tail_bound(double t, int k) {
    if (!(t > 1.0)) throw domain_error("tail_bound: t must be > 1");
    if (k < 2) throw domain_error("tail_bound: k must be >= 2");
    return std::exp(k * std::log(t) + 0.5 * k * (1.0 - t * t));
}

/// f_k(c) exp(-c t^2), minimized over c by tail_optimal_c.
inline double tail_g(double c, double t, int k) { return mgf_closed_form(c, k) * std::exp(-c * t * t); }

inline double tail_optimal_c(double t, int k) {
    if (!(t > 1.0)) throw domain_error("tail_optimal_c: t must be > 1");
    return 0.5 * k * (1.0 - 1.0 / (t * t));
}

/// Root of tail_bound(t, k) = p on (1, 10] by bisection.
inline double solve_threshold(int k, double p) {
    if (!(p > 0.0) || !(p < 1.0)) throw domain_error("solve_threshold: need 0 < p < 1");
    double lo = 1.0 + 1e-9, hi = 10.0;
    if (tail_bound(hi, k) > p) throw domain_error("solve_threshold: p below the bracket");
    if (tail_bound(lo, k) <= p) return lo;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (tail_bound(mid, k) > p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Lower bound for A(a, 1) implied by P(S >= 0) >= p and the tail bound.
inline double final_bound_from_probability(Field field, double p, double threshold) {
    if (field == Field::Real) return p / threshold * (1.0 - 1.0 / (3.0 * threshold * threshold));
    return p / (threshold * threshold) * (1.0 - 1.0 / (2.0 * threshold * threshold));
}

inline double final_bound_from_probability(Field field, double p) {
    const int k = field_params(field).k;
    return final_bound_from_probability(field, p, solve_threshold(k, p));
}

enum class Relation { Greater, GreaterEqual, Less, LessEqual, Near };

struct ChainLink {
    std::string name;
    double value;
    Relation relation;
    double reference;
    std::string inequality;
    double tolerance = 0.0;  // for Near

    bool holds() const {
        switch (relation) {
            case Relation::Greater: return value > reference;
            case Relation::GreaterEqual: return value >= reference;
            case Relation::Less: return value < reference;
            case Relation::LessEqual: return value <= reference;
            case Relation::Near: return std::abs(value - reference) <= tolerance;
        }
        return false;
    }
};

struct BoundCertificate {
    FieldCase field;
    ProbabilityBound p_lower;
    double threshold = 0.0;
    double final_bound = 0.0;
    std::vector<ChainLink> chain;

    /// First link whose inequality fails on re-evaluation, if any.
    std::optional<std::string> broken_link() const {
        for (const auto& l : chain)
            if (!l.holds()) return l.name;
        return std::nullopt;
    }
    bool valid() const { return !broken_link(); }
};

/// Full chain: optimal Orlicz probability, tail threshold, final constant.
inline BoundCertificate theorem1_certificate(const FieldCase& field) {
    const int k = field.k;
    BoundCertificate c;
    c.field = field;
    std::vector<ChainLink>& ch = c.chain;
    try {
        c.p_lower = optimize_probability_bound(k);
    } catch (const error& e) {
        throw certificate_error(std::string("probability bound: ") + e.what());
    }
    const auto& pb = c.p_lower;
    const double lam = *pb.lambda_star;
    const double q = *pb.q_used;
    const double mgf = plus_mgf_bound(lam, k);
    const double gk = gamma_k(k);

    ch.push_back({"q_lower", q, Relation::Greater, 0.0, "q > 0"});
    ch.push_back({"lambda_star", lam, Relation::Greater, 0.0, "lambda > 0"});
    ch.push_back({"lambda_star_admissible", lam, Relation::Less, std::sqrt(0.5 * k), "lambda < sqrt(k/2)"});
    ch.push_back({"plus_mgf_bound", mgf, Relation::Greater, 1.0 + lam * q, "E exp(lambda Y+) bound > 1 + lambda q"});
    ch.push_back({"orlicz_scale", *pb.orlicz_scale_used, Relation::LessEqual, 1.0 / (mgf - lam * q - 1.0) * (1 + 1e-12),
                  "scale <= 1/(E exp(lambda Y+) - lambda q - 1)"});
    ch.push_back({"orlicz_probability_raw", pb.raw_value, Relation::Greater, 0.0, "raw bound > 0"});
    ch.push_back({"p_lower", pb.value, Relation::LessEqual, 1.0, "p <= 1"});
    ch.push_back({"p_lower_vs_gamma_k", pb.value, Relation::GreaterEqual, gk, "p >= gamma_k"});

    try {
        c.threshold = solve_threshold(k, pb.value);
    } catch (const error& e) {
        throw certificate_error(std::string("threshold: ") + e.what());
    }
    const double t = c.threshold;
    ch.push_back({"threshold", t, Relation::Greater, 1.0, "t > 1"});
    ch.push_back({"tail_at_threshold", tail_bound(t, k), Relation::Near, pb.value, "tail_bound(t, k) = p", 1e-9});

    c.final_bound = final_bound_from_probability(field.field, pb.value, t);
    const double stated_constant = field.field == Field::Real ? 1.0 / 17.0 : 1.0 / 27.0;
    ch.push_back({"final_bound", c.final_bound, Relation::Greater, 0.0, "final > 0"});
    ch.push_back({"final_vs_stated", c.final_bound, Relation::Greater, stated_constant,
                  field.field == Field::Real ? "final > 1/17" : "final > 1/27"});

    if (auto bad = c.broken_link()) throw certificate_error("certificate link failed: " + *bad);
    return c;
}

}  // namespace cubesect
