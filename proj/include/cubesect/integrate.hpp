#pragma once

// Adaptive Gauss-Kronrod (10/21 point) integration on finite intervals.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace cubesect {

struct IntegrationResult {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
    bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 11> gk21_nodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};

inline constexpr std::array<double, 11> gk21_kronrod_weights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077808713400240, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

// Gauss weights for nodes 1, 3, 5, 7, 9 of the Kronrod set
inline constexpr std::array<double, 5> gk21_gauss_weights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651146};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk21(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * gk21_kronrod_weights[10];
    double gauss = 0.0;
    double abs_sum = std::abs(kronrod);
    std::array<double, 10> f1{}, f2{};
    for (int j = 0; j < 10; ++j) {
        const double dx = half * gk21_nodes[j];
        f1[j] = f(center - dx);
        f2[j] = f(center + dx);
        const double pair = f1[j] + f2[j];
        kronrod += gk21_kronrod_weights[j] * pair;
        abs_sum += gk21_kronrod_weights[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) gauss += gk21_gauss_weights[j / 2] * pair;
    }
    const double mean = 0.5 * kronrod;
    double asc = gk21_kronrod_weights[10] * std::abs(fc - mean);
    for (int j = 0; j < 10; ++j)
        asc += gk21_kronrod_weights[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));

    const double value = kronrod * half;
    const double resabs = abs_sum * std::abs(half);
    const double resasc = asc * std::abs(half);
    double err = std::abs((kronrod - gauss) * half);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
    return {a, b, value, err};
}

}  // namespace detail

/// Globally adaptive bisection driven by the largest local error estimate.
template <class F>
IntegrationResult integrate_adaptive(F&& f, double a, double b, double abs_tol, int max_intervals = 500) {
    std::priority_queue<detail::Segment> heap;
    heap.push(detail::gk21(f, a, b));
    double value = heap.top().value;
    double error = heap.top().error;
    int intervals = 1;
    while (error > abs_tol && intervals < max_intervals) {
        const detail::Segment s = heap.top();
        heap.pop();
        const double mid = 0.5 * (s.a + s.b);
        const detail::Segment left = detail::gk21(f, s.a, mid);
        const detail::Segment right = detail::gk21(f, mid, s.b);
        value += left.value + right.value - s.value;
        error += left.error + right.error - s.error;
        heap.push(left);
        heap.push(right);
        ++intervals;
    }
    // re-sum to shed the drift from incremental updates
    double v = 0.0, e = 0.0;
    while (!heap.empty()) {
        v += heap.top().value;
        e += heap.top().error;
        heap.pop();
    }
    return {v, e, intervals, e <= abs_tol};
}

/// Integral over [a, inf) through the substitution x = a + u/(1-u).
template <class F>
IntegrationResult integrate_to_infinity(F&& f, double a, double abs_tol, int max_intervals = 500) {
    auto g = [&](double u) {
        if (u >= 1.0) return 0.0;
        const double w = 1.0 - u;
        return f(a + u / w) / (w * w);
    };
    return integrate_adaptive(g, 0.0, 1.0, abs_tol, max_intervals);
}

}  // namespace cubesect
