#pragma once

// Spherical Monte Carlo: A(a,t) = E[ 1{|sum a_j U_j| >= t} |sum a_j U_j|^{-e} ]
// with U_j independent and uniform on S^{k-1}, plus the quadratic statistic
// S = sum_{i<j} a_i a_j <U_i, U_j> and its exact second and fourth moments.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include "cubesect/core.hpp"

namespace cubesect {

inline constexpr const char* threads_env_var = "CUBESECT_THREADS";

/// Thread count from CUBESECT_THREADS, 1 when unset or malformed.
inline unsigned default_thread_count() {
    if (const char* s = std::getenv(threads_env_var)) {
        char* end = nullptr;
        const long v = std::strtol(s, &end, 10);
        if (end != s && *end == '\0' && v >= 1 && v <= 1024) return static_cast<unsigned>(v);
    }
    return 1;
}

struct McConfig {
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 20240601;
    std::uint64_t chunk = 1 << 16;
    unsigned threads = 0;  // 0: default_thread_count()

    void validate() const {
        if (samples < 1) throw invalid_input("samples must be >= 1");
        if (chunk < 1) throw invalid_input("chunk must be >= 1");
    }
};

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
};

/// Single-pass mean/variance with pairwise merging.
struct Welford {
    std::uint64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    void merge(const Welford& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
        const double d = o.mean - mean;
        const double total = na + nb;
        mean += d * nb / total;
        m2 += o.m2 + d * d * na * nb / total;
        n += o.n;
    }

    /// Accumulator for values x_i given sum(x_i - shift) and sum((x_i - shift)^2).
    static Welford from_shifted_sums(std::uint64_t n, double shift, double s1, double s2) {
        Welford w;
        if (n == 0) return w;
        w.n = n;
        const double nn = static_cast<double>(n);
        w.mean = shift + s1 / nn;
        w.m2 = std::max(0.0, s2 - s1 * s1 / nn);
        return w;
    }

    McEstimate estimate() const {
        const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
        return {mean, std::sqrt(var / static_cast<double>(std::max<std::uint64_t>(n, 1))), n};
    }
};

// same sequence as std::mt19937_64, noticeably faster generation
using Rng = boost::random::mt19937_64;
using NormalDist = boost::random::normal_distribution<double>;

/// Generator for chunk `index` of stream `stream` under `seed`.
inline Rng chunk_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

/// Uniform point on S^{k-1} by Gaussian normalization, written into `out`.
template <class Urbg>
void sample_sphere(std::span<double> out, Urbg& rng, NormalDist& normal) {
    if (out.size() < 2) throw domain_error("sample_sphere: k must be >= 2");
    for (;;) {
        double r2 = 0.0;
        for (double& x : out) {
            x = normal(rng);
            r2 += x * x;
        }
        if (r2 > 0.0) {
            const double inv = 1.0 / std::sqrt(r2);
            for (double& x : out) x *= inv;
            return;
        }
    }
}

template <class Urbg>
std::vector<double> sample_sphere(int k, Urbg& rng) {
    if (k < 2) throw domain_error("sample_sphere: k must be >= 2");
    std::vector<double> u(static_cast<std::size_t>(k));
    NormalDist normal;
    sample_sphere(std::span<double>(u), rng, normal);
    return u;
}

/// Runs `body(rng, count, acc)` on fixed chunks of the sample index space and
/// merges the chunk accumulators in index order, so results do not depend on
/// the number of worker threads.
template <class Body>
McEstimate run_chunked(const McConfig& cfg, std::uint64_t stream, Body&& body) {
    cfg.validate();
    const std::uint64_t chunks = (cfg.samples + cfg.chunk - 1) / cfg.chunk;
    std::vector<Welford> parts(chunks);
    auto work = [&](std::uint64_t i) {
        Rng rng = chunk_rng(cfg.seed, stream, i);
        const std::uint64_t begin = i * cfg.chunk;
        const std::uint64_t count = std::min(cfg.chunk, cfg.samples - begin);
        body(rng, count, parts[i]);
    };
    const unsigned threads =
        static_cast<unsigned>(std::min<std::uint64_t>(cfg.threads ? cfg.threads : default_thread_count(), chunks));
    if (threads <= 1) {
        for (std::uint64_t i = 0; i < chunks; ++i) work(i);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back([&] {
                for (std::uint64_t i; (i = next.fetch_add(1)) < chunks;) work(i);
            });
    }
    Welford total;
    for (const auto& p : parts) total.merge(p);
    return total.estimate();
}

namespace detail {

// stream tags keep estimators with the same seed statistically independent
enum : std::uint64_t {
    stream_volume = 1,
    stream_exceed = 2,
    stream_s_statistic = 3,
    stream_sphere_moment = 4,
    stream_density = 5,
};

// |sum_j a_j U_j|^2 for one draw; K = 0 means the dimension k is only known at run time
template <std::size_t K, class Urbg>
double draw_sum_r2(std::span<const double> a, std::size_t k, Urbg& rng, NormalDist& normal) {
    constexpr std::size_t cap = K ? K : 64;
    const std::size_t dim = K ? K : k;
    std::array<double, cap> x{}, u;
    for (double aj : a) {
        double r2 = 0.0;
        do {
            r2 = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                u[i] = normal(rng);
                r2 += u[i] * u[i];
            }
        } while (r2 == 0.0);
        const double s = aj / std::sqrt(r2);
        for (std::size_t i = 0; i < dim; ++i) x[i] += s * u[i];
    }
    double r2 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) r2 += x[i] * x[i];
    return r2;
}

template <std::size_t K, class G>
McEstimate mean_of_r2_fixed(std::span<const double> a, std::size_t k, const McConfig& cfg, std::uint64_t stream,
                            G& g) {
    return run_chunked(cfg, stream, [&](Rng& rng, std::uint64_t count, Welford& acc) {
        // shifted plain sums keep the per-sample loop free of divisions
        NormalDist normal;
        double shift = 0.0, s1 = 0.0, s2 = 0.0;
        for (std::uint64_t s = 0; s < count; ++s) {
            const double v = g(draw_sum_r2<K>(a, k, rng, normal));
            if (s == 0) shift = v;
            const double d = v - shift;
            s1 += d;
            s2 += d * d;
        }
        acc = Welford::from_shifted_sums(count, shift, s1, s2);
    });
}

// Monte Carlo mean of g(|sum_j a_j U_j|^2), U_j uniform on S^{k-1}
template <class G>
McEstimate mean_of_r2(std::span<const double> a, int k, const McConfig& cfg, std::uint64_t stream, G&& g) {
    const auto kk = static_cast<std::size_t>(k);
    switch (k) {
        case 2: return mean_of_r2_fixed<2>(a, kk, cfg, stream, g);
        case 3: return mean_of_r2_fixed<3>(a, kk, cfg, stream, g);
        case 4: return mean_of_r2_fixed<4>(a, kk, cfg, stream, g);
        default: return mean_of_r2_fixed<0>(a, kk, cfg, stream, g);
    }
}

inline constexpr std::size_t max_sphere_dim = 64;

}  // namespace detail

/// Estimate of A(a,t) from the spherical representation.
inline McEstimate estimate_section_volume(const SectionQuery& q, const McConfig& cfg) {
    const auto a = q.direction.nonzero();
    const double t = q.t;
    if (a.size() == 1) {
        if (t == 1.0) throw discontinuity_error("section volume jumps at t = 1 for a coordinate normal");
        return {t < 1.0 ? 1.0 : 0.0, 0.0, 0};
    }
    const int e = q.field.weight_exponent;
    const double t2 = t * t;
    return detail::mean_of_r2(a, q.field.k, cfg, detail::stream_volume, [&](double r2) {
        if (r2 < t2 || r2 == 0.0) return 0.0;
        return e == 1 ? 1.0 / std::sqrt(r2) : 1.0 / r2;
    });
}

/// Empirical P(|sum a_j U_j| >= t) for U_j uniform on S^{k-1}.
inline McEstimate estimate_exceed_prob(const Direction& dir, double t, int k, const McConfig& cfg) {
    if (!(t >= 0.0)) throw invalid_input("estimate_exceed_prob: t must be >= 0");
    if (k < 2 || static_cast<std::size_t>(k) > detail::max_sphere_dim)
        throw domain_error("estimate_exceed_prob: unsupported k");
    if (t == 0.0) {
        cfg.validate();
        return {1.0, 0.0, cfg.samples};
    }
    const double t2 = t * t;
    return detail::mean_of_r2(dir.nonzero(), k, cfg, detail::stream_exceed,
                              [t2](double r2) { return r2 >= t2 ? 1.0 : 0.0; });
}

/// S = (|sum a_j U_j|^2 - 1) / 2 for explicit draws (draws[j] is U_j).
inline double s_statistic(const Direction& dir, std::span<const std::vector<double>> draws) {
    const auto c = dir.coords();
    if (draws.size() != c.size()) throw invalid_input("s_statistic: need one draw per coordinate");
    const std::size_t k = draws.empty() ? 0 : draws[0].size();
    std::vector<double> x(k, 0.0);
    for (std::size_t j = 0; j < c.size(); ++j) {
        if (draws[j].size() != k) throw invalid_input("s_statistic: draws must share a dimension");
        for (std::size_t i = 0; i < k; ++i) x[i] += c[j] * draws[j][i];
    }
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return 0.5 * (r2 - 1.0);
}

/// Monte Carlo mean of g(S) with S drawn from its exact distribution.
template <class G>
McEstimate estimate_s_functional(const Direction& dir, int k, const McConfig& cfg, G&& g) {
    if (k < 2 || static_cast<std::size_t>(k) > detail::max_sphere_dim)
        throw domain_error("estimate_s_functional: unsupported k");
    return detail::mean_of_r2(dir.nonzero(), k, cfg, detail::stream_s_statistic,
                              [&g](double r2) { return g(0.5 * (r2 - 1.0)); });
}

namespace detail {

struct PowerSums {
    double p1 = 0, p2 = 0, p3 = 0, p4 = 0;
};

// power sums of x_j = a_j^2
inline PowerSums square_power_sums(std::span<const double> a) {
    PowerSums s;
    for (double aj : a) {
        const double x = aj * aj;
        s.p1 += x;
        s.p2 += x * x;
        s.p3 += x * x * x;
        s.p4 += x * x * x * x;
    }
    return s;
}

}  // namespace detail

/// E S^2 = (1/k) sum_{i<j} a_i^2 a_j^2.
inline double moment_s2_exact(const Direction& dir, int k) {
    if (k < 2) throw domain_error("moment_s2_exact: k must be >= 2");
    const auto s = detail::square_power_sums(dir.nonzero());
    return 0.5 * (s.p1 * s.p1 - s.p2) / k;
}

/// E S^4 = 3/k^2 (T^2 - P) + 3/(k(k+2)) P + 72/k^3 e4, with
/// T = sum_{i<j} a_i^2 a_j^2, P = sum_{i<j} a_i^4 a_j^4 and e4 the fourth
/// elementary symmetric polynomial of (a_j^2).
inline double moment_s4_exact(const Direction& dir, int k) {
    if (k < 2) throw domain_error("moment_s4_exact: k must be >= 2");
    const auto s = detail::square_power_sums(dir.nonzero());
    const double T = 0.5 * (s.p1 * s.p1 - s.p2);
    const double P = 0.5 * (s.p2 * s.p2 - s.p4);
    // Newton's identities
    const double e1 = s.p1;
    const double e2 = 0.5 * (e1 * s.p1 - s.p2);
    const double e3 = (e2 * s.p1 - e1 * s.p2 + s.p3) / 3.0;
    const double e4 = std::max(0.0, (e3 * s.p1 - e2 * s.p2 + e1 * s.p3 - s.p4) / 4.0);
    const double kk = k;
    return 3.0 / (kk * kk) * (T * T - P) + 3.0 / (kk * (kk + 2.0)) * P + 72.0 / (kk * kk * kk) * e4;
}

/// The fourth-moment comparison (3 + 4/k)(E S^2)^2 >= E S^4 as a checked predicate.
struct MomentClaim {
    double lhs;
    double rhs;
    bool holds;
};

inline MomentClaim moment_ratio_claim(const Direction& dir, int k) {
    const double s2 = moment_s2_exact(dir, k);
    const double lhs = (3.0 + 4.0 / k) * s2 * s2;
    const double rhs = moment_s4_exact(dir, k);
    return {lhs, rhs, lhs >= rhs};
}

struct SubgaussCheck {
    double lhs;       // E <U, e1>^{2p}
    double rhs;       // k^{-p} (2p-1)!!
    McEstimate empirical;
};

/// Moment comparison between a sphere coordinate and a scaled Gaussian.
inline SubgaussCheck subgauss_moment_check(int k, int p, const McConfig& cfg) {
    if (k < 2) throw domain_error("subgauss_moment_check: k must be >= 2");
    if (p < 1) throw domain_error("subgauss_moment_check: p must be >= 1");
    // Gamma(k/2) Gamma(p+1/2) / (sqrt(pi) Gamma(p+k/2)) as a finite product
    double lhs = 1.0;
    for (int i = 0; i < p; ++i) lhs *= (2.0 * i + 1.0) / (k + 2.0 * i);
    double dfact = 1.0;
    for (int i = 1; i <= 2 * p - 1; i += 2) dfact *= i;
    const double rhs = dfact * std::pow(static_cast<double>(k), -p);
    const auto emp = run_chunked(cfg, detail::stream_sphere_moment, [&](Rng& rng, std::uint64_t count, Welford& acc) {
        NormalDist normal;
        std::array<double, detail::max_sphere_dim> us{};
        const std::span<double> u(us.data(), static_cast<std::size_t>(k));
        for (std::uint64_t s = 0; s < count; ++s) {
            sample_sphere(u, rng, normal);
            acc.add(std::pow(u[0], 2 * p));
        }
    });
    return {lhs, rhs, emp};
}

}  // namespace cubesect
