#pragma once

// Domain types shared by every cubesect module: section normals, the scalar
// field (cube vs. polydisc) and volume queries.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cubesect {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct invalid_input : error {
    using error::error;
};

struct domain_error : error {
    using error::error;
};

/// Raised when an integral cannot be resolved inside the configured budget.
/// `partial_value` holds the best value computed before giving up.
struct convergence_error : error {
    convergence_error(const std::string& what, double partial)
        : error(what), partial_value(partial) {}
    double partial_value;
};

/// The section volume jumps at this point (single-coordinate normal, t = 1).
struct discontinuity_error : domain_error {
    using domain_error::domain_error;
};

enum class Field { Real, Complex };

inline const char* to_string(Field f) { return f == Field::Real ? "real" : "complex"; }

struct FieldCase {
    Field field;
    int k;                // ambient dimension of the sphere S^{k-1}
    double alpha;         // half-width of the unit-volume cube / polydisc
    int weight_exponent;  // power of |sum a_j U_j| in the spherical formula
};

inline FieldCase field_params(Field f) {
    if (f == Field::Real) return {Field::Real, 3, 0.5, 1};
    return {Field::Complex, 4, 1.0 / std::sqrt(std::numbers::pi), 2};
}

/// Unit normal with nonnegative, nonincreasing coordinates.
class Direction {
public:
    static constexpr double zero_cutoff = 1e-15;
    static constexpr double norm_tolerance = 1e-12;

    std::span<const double> coords() const { return coords_; }
    std::size_t n() const { return coords_.size(); }

    /// Leading block of strictly positive coordinates.
    std::span<const double> nonzero() const { return {coords_.data(), nnz_}; }
    std::size_t nonzero_count() const { return nnz_; }

    double operator[](std::size_t i) const { return coords_[i]; }

    friend Direction normalize_direction(std::span<const double> raw);

private:
    Direction(std::vector<double> c, std::size_t nnz) : coords_(std::move(c)), nnz_(nnz) {}
    std::vector<double> coords_;
    std::size_t nnz_ = 0;
};

inline double euclidean_norm(std::span<const double> v) {
    // scaled to survive very small or very large entries
    double scale = 0.0;
    for (double x : v) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) return 0.0;
    double s = 0.0;
    for (double x : v) {
        const double y = x / scale;
        s += y * y;
    }
    return scale * std::sqrt(s);
}

/// Decreasing rearrangement of |raw_j|, scaled to unit Euclidean norm.
inline Direction normalize_direction(std::span<const double> raw) {
    if (raw.empty()) throw invalid_input("direction must have at least one coordinate");
    std::vector<double> c(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (!std::isfinite(raw[i])) throw invalid_input("direction has a non-finite entry");
        c[i] = std::abs(raw[i]);
    }
    std::sort(c.begin(), c.end(), std::greater<>());

    for (int pass = 0; pass < 2; ++pass) {
        const double nrm = euclidean_norm(c);
        if (nrm == 0.0) throw invalid_input("direction is the zero vector");
        // already-unit input is left bit-identical, which makes normalization idempotent
        if (std::abs(nrm - 1.0) > 1e-14)
            for (double& x : c) x /= nrm;
        bool dropped = false;
        for (double& x : c)
            if (x != 0.0 && x < Direction::zero_cutoff) {
                x = 0.0;
                dropped = true;
            }
        if (!dropped) break;
    }

    const auto nnz = static_cast<std::size_t>(
        std::count_if(c.begin(), c.end(), [](double x) { return x > 0.0; }));
    if (nnz == 0) throw invalid_input("direction is the zero vector");
    if (std::abs(euclidean_norm(c) - 1.0) > Direction::norm_tolerance)
        throw invalid_input("direction could not be normalized");
    return Direction(std::move(c), nnz);
}

inline Direction normalize_direction(std::initializer_list<double> raw) {
    return normalize_direction(std::span<const double>(raw.begin(), raw.size()));
}

/// (1/sqrt(n), ..., 1/sqrt(n)).
inline Direction diagonal_direction(std::size_t n) {
    if (n == 0) throw invalid_input("diagonal direction needs n >= 1");
    std::vector<double> v(n, 1.0);
    return normalize_direction(v);
}

struct SectionQuery {
    SectionQuery(Direction d, double t_, FieldCase f)
        : direction(std::move(d)), t(t_), field(f) {
        if (!std::isfinite(t) || t < 0.0) throw invalid_input("distance parameter t must be finite and >= 0");
    }
    Direction direction;
    double t;
    FieldCase field;
};

}  // namespace cubesect
