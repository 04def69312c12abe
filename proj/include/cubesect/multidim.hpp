#pragma once

// Codimension-d sections of the unit cube Q_n = [-1/2, 1/2]^n. For a frame R
// (d x n, orthonormal rows) the section volume vol_{n-d}(Q_n cap (E + u)),
// E = ker R, is the density at u of X = R xi with xi uniform on Q_n.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "cubesect/core.hpp"
#include "cubesect/integrate.hpp"
#include "cubesect/montecarlo.hpp"
#include "cubesect/quadrature.hpp"

namespace cubesect {

struct degenerate_frame : invalid_input {
    using invalid_input::invalid_input;
};

class ProjectionFrame {
public:
    static constexpr double orthonormal_tolerance = 1e-10;

    /// Validates R R^T = I_d and 0 < d < n.
    explicit ProjectionFrame(Eigen::MatrixXd r) : r_(std::move(r)) {
        if (r_.rows() < 1 || r_.rows() >= r_.cols()) throw invalid_input("frame needs 0 < d < n");
        const Eigen::MatrixXd gram = r_ * r_.transpose();
        if ((gram - Eigen::MatrixXd::Identity(d(), d())).cwiseAbs().maxCoeff() > orthonormal_tolerance)
            throw invalid_input("frame rows are not orthonormal");
    }

    const Eigen::MatrixXd& matrix() const { return r_; }
    int n() const { return static_cast<int>(r_.cols()); }
    int d() const { return static_cast<int>(r_.rows()); }
    /// R e_j
    Eigen::VectorXd column(int j) const { return r_.col(j); }

private:
    Eigen::MatrixXd r_;
};

/// Orthonormal basis of span(normals) with the orientation of Gram-Schmidt.
inline ProjectionFrame frame_from_normals(const std::vector<std::vector<double>>& normals) {
    if (normals.empty()) throw invalid_input("frame_from_normals: need at least one normal");
    const auto n = static_cast<Eigen::Index>(normals[0].size());
    const auto d = static_cast<Eigen::Index>(normals.size());
    Eigen::MatrixXd a(n, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (static_cast<Eigen::Index>(normals[static_cast<std::size_t>(i)].size()) != n)
            throw invalid_input("frame_from_normals: normals must share a dimension");
        for (Eigen::Index j = 0; j < n; ++j) a(j, i) = normals[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    if (!a.allFinite()) throw invalid_input("frame_from_normals: non-finite entry");
    if (d >= n) throw invalid_input("frame_from_normals: need fewer normals than coordinates");
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    const Eigen::MatrixXd rr = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
    const double scale = a.cwiseAbs().maxCoeff();
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (!(std::abs(rr(i, i)) > 1e-10 * scale)) throw degenerate_frame("frame_from_normals: normals are dependent");
        if (rr(i, i) < 0.0) q.col(i) *= -1.0;
    }
    return ProjectionFrame(q.transpose());
}

/// Haar-distributed frame: Gaussian matrix with orthonormalized rows.
template <class Urbg>
ProjectionFrame random_frame(int n, int d, Urbg& rng) {
    if (d < 1 || d >= n) throw invalid_input("random_frame: need 0 < d < n");
    NormalDist normal;
    for (;;) {
        std::vector<std::vector<double>> rows(static_cast<std::size_t>(d), std::vector<double>(static_cast<std::size_t>(n)));
        for (auto& row : rows)
            for (double& x : row) x = normal(rng);
        try {
            return frame_from_normals(rows);
        } catch (const degenerate_frame&) {
        }
    }
}

struct AffineSectionQuery {
    AffineSectionQuery(ProjectionFrame f, Eigen::VectorXd offset) : frame(std::move(f)), u(std::move(offset)) {
        if (u.size() != frame.d()) throw invalid_input("offset dimension must equal the codimension");
        if (!u.allFinite()) throw invalid_input("offset must be finite");
    }
    /// Outside the |u| <= 1/2 regime covered by the lower bounds.
    bool outside_regime() const { return u.norm() > 0.5; }

    ProjectionFrame frame;
    Eigen::VectorXd u;
};

namespace detail {

inline std::vector<double> sorted_positive(std::vector<double> b) {
    for (double& x : b) x = std::abs(x);
    std::sort(b.begin(), b.end(), std::greater<>());
    const double cut = b.empty() ? 0.0 : 1e-13 * b.front();
    while (!b.empty() && b.back() <= cut) b.pop_back();
    return b;
}

}  // namespace detail

/// f_X(u) by Fourier inversion of prod_j sinc(<R e_j, w>/2); d <= 2.
inline double density_fourier(const AffineSectionQuery& q, const QuadratureConfig& cfg = {}) {
    cfg.validate();
    const auto& fr = q.frame;
    const int d = fr.d();
    if (d > 2) throw invalid_input("density_fourier supports d <= 2");

    if (d == 1) {
        std::vector<double> r(static_cast<std::size_t>(fr.n()));
        for (int j = 0; j < fr.n(); ++j) r[static_cast<std::size_t>(j)] = fr.matrix()(0, j);
        const double t = 2.0 * std::abs(q.u(0));
        return section_volume(SectionQuery(normalize_direction(r), t, field_params(Field::Real)), cfg);
    }

    // f(x) = 2/pi^2 int_0^pi dtheta int_0^inf s cos(2 s <x,th>) prod sinc(s <R e_j, th>) ds
    int nonzero = 0;
    for (int j = 0; j < fr.n(); ++j) nonzero += fr.column(j).norm() > 1e-13;
    if (nonzero < d + 2) throw convergence_error("density_fourier: fewer than d + 2 nonzero projected vectors", 0.0);

    QuadratureConfig inner = cfg;
    inner.abs_tol = std::max(1e-12, 0.1 * cfg.abs_tol);
    inner.truncation_tail_tol = 0.1 * inner.abs_tol;
    const double offset = 0.3183098861837907;  // keeps nodes off axis-aligned degenerate angles
    auto radial = [&](double theta) {
        const Eigen::Vector2d dir(std::cos(theta), std::sin(theta));
        std::vector<double> b(static_cast<std::size_t>(fr.n()));
        for (int j = 0; j < fr.n(); ++j) b[static_cast<std::size_t>(j)] = fr.column(j).dot(dir);
        b = detail::sorted_positive(std::move(b));
        const double w = 2.0 * std::abs(q.u.dot(dir));
        if (b.size() < 3) throw convergence_error("density_fourier: radial integral diverges", 0.0);
        return detail::product_integral(Field::Real, b, w, 1, inner).value;
    };
    const double pre = 2.0 / (std::numbers::pi * std::numbers::pi);
    const auto r = integrate_adaptive(radial, offset, offset + std::numbers::pi, cfg.abs_tol / pre, 200);
    return pre * r.value;
}

struct DensityEstimate {
    McEstimate estimate;
    double radius = 0.0;
    bool bias_flag = false;  // ball reaches past |x| = 1/2
    bool zero_hits = false;
};

inline double ball_volume(int d, double r) {
    return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0) * std::pow(r, d);
}

/// Ball-average density estimate of X = R xi around u.
inline DensityEstimate density_mc(const AffineSectionQuery& q, double radius, const McConfig& cfg) {
    if (!(radius > 0.0)) throw invalid_input("density_mc: radius must be positive");
    const Eigen::MatrixXd& r = q.frame.matrix();
    const int n = q.frame.n(), d = q.frame.d();
    const double inv_vol = 1.0 / ball_volume(d, radius);
    const double r2 = radius * radius;
    const auto est = run_chunked(cfg, detail::stream_density, [&](Rng& rng, std::uint64_t count, Welford& acc) {
        std::uniform_real_distribution<double> unif(-0.5, 0.5);
        Eigen::VectorXd xi(n), y(d);
        for (std::uint64_t s = 0; s < count; ++s) {
            for (int j = 0; j < n; ++j) xi(j) = unif(rng);
            y.noalias() = r * xi;
            acc.add((y - q.u).squaredNorm() <= r2 ? inv_vol : 0.0);
        }
    });
    return {est, radius, q.u.norm() + radius > 0.5, est.value == 0.0};
}

inline double default_density_radius(int d) { return 0.05 * std::sqrt(static_cast<double>(d)); }

struct LambdaDecomposition {
    std::vector<Eigen::VectorXd> theta;
    std::vector<Eigen::VectorXd> eta;
    Eigen::MatrixXd lambda_plus;
    Eigen::MatrixXd lambda_minus;
    double det_plus = 0.0;
    double det_minus = 0.0;
    double coeff_plus = 0.0;
    double coeff_minus = 0.0;
};

/// Lambda_pm = ((1/|Re1| pm 1)^2 Re1 Re1^T + sum_{j>1} Rej Rej^T)^{-1/2} and the
/// rescaled systems theta (with Lambda_+) and eta (with Lambda_-).
inline LambdaDecomposition lambda_decomposition(const ProjectionFrame& frame) {
    const Eigen::VectorXd re1 = frame.column(0);
    const double r1 = re1.norm();
    if (!(r1 > 0.0) || !(r1 < 1.0 - 1e-12)) throw domain_error("lambda_decomposition: need 0 < |Re1| < 1");
    const int d = frame.d(), n = frame.n();
    LambdaDecomposition out;
    for (int sgn : {+1, -1}) {
        const double c = 1.0 / r1 + sgn;
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
        m += c * c * re1 * re1.transpose();
        for (int j = 1; j < n; ++j) m += frame.column(j) * frame.column(j).transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        const Eigen::MatrixXd lam = es.operatorInverseSqrt();
        const double det = 1.0 / std::sqrt(es.eigenvalues().prod());
        std::vector<Eigen::VectorXd> sys;
        sys.push_back(c * lam * re1);
        for (int j = 1; j < n; ++j) sys.push_back(lam * frame.column(j));
        if (sgn > 0) {
            out.theta = std::move(sys);
            out.lambda_plus = lam;
            out.det_plus = det;
            out.coeff_plus = c * det;
        } else {
            out.eta = std::move(sys);
            out.lambda_minus = lam;
            out.det_minus = det;
            out.coeff_minus = c * det;
        }
    }
    return out;
}

/// Frame whose columns are the given vectors (they must satisfy sum v v^T = I).
inline ProjectionFrame frame_from_columns(const std::vector<Eigen::VectorXd>& cols) {
    if (cols.empty()) throw invalid_input("frame_from_columns: empty system");
    Eigen::MatrixXd r(cols[0].size(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) r.col(static_cast<Eigen::Index>(j)) = cols[j];
    return ProjectionFrame(r);
}

struct DecompositionCheck {
    double lhs;  // 2 f_X(v/2)
    double rhs;  // coeff_+ f_theta(0) - coeff_- f_eta(0)
    double residual;
};

/// Evaluates both sides of the two-term identity with density_fourier.
inline DecompositionCheck check_lambda_identity(const ProjectionFrame& frame, const QuadratureConfig& cfg = {}) {
    const auto dec = lambda_decomposition(frame);
    const Eigen::VectorXd v = frame.column(0).normalized();
    const double lhs = 2.0 * density_fourier(AffineSectionQuery(frame, 0.5 * v), cfg);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(frame.d());
    const double f_theta = density_fourier(AffineSectionQuery(frame_from_columns(dec.theta), zero), cfg);
    const double f_eta = density_fourier(AffineSectionQuery(frame_from_columns(dec.eta), zero), cfg);
    const double rhs = dec.coeff_plus * f_theta - dec.coeff_minus * f_eta;
    return {lhs, rhs, std::abs(lhs - rhs)};
}

struct Theorem11Report {
    int n = 0;
    int d = 0;
    int trials = 0;
    double min_volume = 0.0;
    double min_std_error = 0.0;
    Eigen::MatrixXd argmin_frame;
    Eigen::VectorXd argmin_offset;
    bool positive = false;  // min_volume - 4 sigma > 0
    bool exact = false;     // d = 1 values come from quadrature
};

/// Minimum section volume over random frames and random offsets with |u| = 1/2.
inline Theorem11Report theorem11_empirical(int n, int d, int trials, const McConfig& cfg,
                                           const QuadratureConfig& qcfg = {}) {
    if (d < 1 || d >= n || n > 12 || d > 3) throw invalid_input("theorem11_empirical: need 0 < d < n <= 12, d <= 3");
    if (trials < 1) throw invalid_input("theorem11_empirical: trials must be >= 1");
    Rng rng = chunk_rng(cfg.seed, detail::stream_density, 0xF00D);
    NormalDist normal;
    Theorem11Report rep;
    rep.n = n;
    rep.d = d;
    rep.trials = trials;
    rep.exact = d == 1;
    rep.min_volume = std::numeric_limits<double>::infinity();
    for (int i = 0; i < trials; ++i) {
        ProjectionFrame fr = random_frame(n, d, rng);
        Eigen::VectorXd w(d);
        do {
            for (int j = 0; j < d; ++j) w(j) = normal(rng);
        } while (w.norm() == 0.0);
        const Eigen::VectorXd u = 0.5 * w.normalized();
        double vol = 0.0, se = 0.0;
        if (d == 1) {
            vol = density_fourier(AffineSectionQuery(fr, u), qcfg);
        } else {
            McConfig c = cfg;
            c.seed = cfg.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(i + 1);
            const auto e = density_mc(AffineSectionQuery(fr, u), default_density_radius(d), c);
            vol = e.estimate.value;
            se = e.estimate.std_error;
        }
        if (vol < rep.min_volume) {
            rep.min_volume = vol;
            rep.min_std_error = se;
            rep.argmin_frame = fr.matrix();
            rep.argmin_offset = u;
        }
    }
    rep.positive = rep.min_volume - 4.0 * rep.min_std_error > 0.0;
    return rep;
}

}  // namespace cubesect
