#include "rnfilter/quartic.hpp"

#include "rnfilter/numeric.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace rnf {

namespace {

constexpr double kExponentCutoff = 45.0;  // e^-45 relative tail

double quartic_exponent(const Eigen::Vector4d& th, double x) {
    return x * (th[0] + x * (th[1] + x * (th[2] + x * th[3])));
}

std::vector<double> stationary_points(const Eigen::Vector4d& th) {
    auto pts = real_cubic_roots(4.0 * th[3], 3.0 * th[2], 2.0 * th[1], th[0]);
    if (pts.empty()) pts.push_back(0.0);  // cannot happen for theta4 != 0; keep a fallback
    return pts;
}

/// Outward search + bisection for the abscissa where the shifted exponent
/// crosses -cutoff. `dir` is +1 or -1.
double tail_boundary(const Eigen::Vector4d& th, double start, double q_max, double scale,
                     int dir) {
    const double target = q_max - kExponentCutoff;
    double step = scale;
    double inner = start;
    double outer = start + dir * step;
    int guard = 0;
    while (quartic_exponent(th, outer) > target) {
        inner = outer;
        step *= 2.0;
        outer = start + dir * step;
        if (++guard > 200) throw QuarticStateError("quartic tail search failed to terminate");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (inner + outer);
        if (mid == inner || mid == outer) break;
        if (quartic_exponent(th, mid) > target)
            inner = mid;
        else
            outer = mid;
        if (std::abs(outer - inner) < 1e-12 * (1.0 + std::abs(outer))) break;
    }
    return outer;
}

}  // namespace

QuarticBase quartic_base_integrals(const Eigen::Vector4d& theta) {
    if (!(theta[3] < 0.0))
        throw QuarticStateError("quartic state requires theta4 < 0");

    const auto stats = stationary_points(theta);
    double q_max = -std::numeric_limits<double>::infinity();
    double x_peak = 0.0;
    for (double s : stats) {
        const double q = quartic_exponent(theta, s);
        if (q > q_max) {
            q_max = q;
            x_peak = s;
        }
    }

    // Length scale from the curvature at the peak; wells flatter than the
    // quartic tail fall back to its natural scale.
    const double curv = std::abs(2.0 * theta[1] + 6.0 * theta[2] * x_peak +
                                 12.0 * theta[3] * x_peak * x_peak);
    double scale = curv > 1e-12 ? 1.0 / std::sqrt(curv) : 1.0;
    scale = std::min(scale, std::pow(kExponentCutoff / -theta[3], 0.25));

    const double lo = tail_boundary(theta, stats.front(), q_max, scale, -1);
    const double hi = tail_boundary(theta, stats.back(), q_max, scale, +1);

    auto integrand = [&](double x) -> Eigen::Vector3d {
        const double w = std::exp(quartic_exponent(theta, x) - q_max);
        return {w, x * w, x * x * w};
    };
    const double xabs = std::max(std::abs(lo), std::abs(hi));
    const Eigen::Vector3d tol(1e-10, 1e-10 * std::max(1.0, xabs),
                              1e-10 * std::max(1.0, xabs * xabs));

    // Integrate piecewise between stationary points so the first Simpson
    // panels already straddle every mode.
    std::vector<double> knots{lo};
    for (double s : stats)
        if (s > lo && s < hi) knots.push_back(s);
    knots.push_back(hi);
    Eigen::Vector3d I = Eigen::Vector3d::Zero();
    for (size_t k = 0; k + 1 < knots.size(); ++k)
        I += adaptive_simpson3(integrand, knots[k], knots[k + 1], tol);

    if (!(I[0] > 0.0) || !std::isfinite(I.sum()))
        throw QuarticStateError("quartic normalization integral is not finite/positive");

    QuarticBase base;
    base.I0 = I[0];
    base.I1 = I[1];
    base.I2 = I[2];
    base.q_max = q_max;
    base.eta1 = I[1] / I[0];
    base.eta2 = I[2] / I[0];
    base.log_norm = q_max + std::log(I[0]);
    return base;
}

void quartic_moment_recursion(const Eigen::Vector4d& theta, std::array<double, 9>& eta) {
    if (std::abs(theta[3]) < 1e-12)
        throw QuarticStateError("moment recursion ill-conditioned: |theta4| < 1e-12");
    for (int i = 3; i <= 8; ++i) {
        double acc = theta[0] * eta[static_cast<size_t>(i - 3)] +
                     2.0 * theta[1] * eta[static_cast<size_t>(i - 2)] +
                     3.0 * theta[2] * eta[static_cast<size_t>(i - 1)];
        if (i >= 4) acc += (i - 3) * eta[static_cast<size_t>(i - 4)];
        eta[static_cast<size_t>(i)] = -acc / (4.0 * theta[3]);
    }
}

QuarticState quartic_state(const Eigen::Vector4d& theta) {
    const QuarticBase base = quartic_base_integrals(theta);
    QuarticState st;
    st.theta = theta;
    st.eta[0] = 1.0;
    st.eta[1] = base.eta1;
    st.eta[2] = base.eta2;
    quartic_moment_recursion(theta, st.eta);
    st.log_norm = base.log_norm;
    return st;
}

Eigen::Matrix4d quartic_fisher(const std::array<double, 9>& eta) {
    Eigen::Matrix4d g;
    for (int i = 1; i <= 4; ++i)
        for (int j = 1; j <= 4; ++j)
            g(i - 1, j - 1) = eta[static_cast<size_t>(i + j)] -
                              eta[static_cast<size_t>(i)] * eta[static_cast<size_t>(j)];
    Eigen::LLT<Eigen::Matrix4d> llt(g);
    if (llt.info() != Eigen::Success)
        throw QuarticStateError("quartic Fisher matrix is not positive definite");
    return g;
}

namespace {

double expect_poly_times_power(const Polynomial& p, int power,
                               const std::array<double, 9>& eta) {
    double acc = 0.0;
    for (const auto& [expo, coeff] : p.terms()) {
        const int k = expo[0] + power;
        if (k > 8) throw std::invalid_argument("quartic expectation beyond cached moments");
        acc += coeff * eta[static_cast<size_t>(k)];
    }
    return acc;
}

}  // namespace

Eigen::Vector4d quartic_expect_Lc(const Polynomial& drift, const Polynomial& diffusion,
                                  const std::array<double, 9>& eta) {
    if (drift.nvars() != 1 || diffusion.nvars() != 1)
        throw std::invalid_argument("quartic_expect_Lc: univariate polynomials required");
    Eigen::Vector4d out;
    for (int j = 1; j <= 4; ++j) {
        double v = j * expect_poly_times_power(drift, j - 1, eta);
        if (j >= 2) v += 0.5 * j * (j - 1) * expect_poly_times_power(diffusion, j - 2, eta);
        out[j - 1] = v;
    }
    return out;
}

Eigen::Vector4d quartic_expect_Lc(const ReactionNetwork& net, const std::array<double, 9>& eta) {
    const auto [b, s] = univariate_fp_polys(net, false);
    return quartic_expect_Lc(b, s, eta);
}

Eigen::Vector4d quartic_drift(const Polynomial& drift, const Polynomial& diffusion,
                              const Eigen::Vector4d& theta) {
    const QuarticState st = quartic_state(theta);
    const Eigen::Matrix4d g = quartic_fisher(st.eta);
    const Eigen::Vector4d rhs = quartic_expect_Lc(drift, diffusion, st.eta);
    return Eigen::LLT<Eigen::Matrix4d>(g).solve(rhs);
}

Eigen::Vector4d quartic_drift(const ReactionNetwork& net, const QuarticState& state) {
    const auto [b, s] = univariate_fp_polys(net, false);
    return quartic_drift(b, s, state.theta);
}

QuarticState quartic_correct(const QuarticState& state, double y, double G, double V) {
    if (!(V > 0.0)) throw std::invalid_argument("quartic_correct: V must be positive");
    Eigen::Vector4d theta = state.theta;
    theta[0] += G * y / V;
    theta[1] -= G * G / (2.0 * V);
    return quartic_state(theta);
}

double quartic_map(const Eigen::Vector4d& theta) {
    if (!(theta[3] < 0.0)) throw QuarticStateError("quartic_map requires theta4 < 0");
    const auto stats = stationary_points(theta);
    double best_x = stats.front();
    double best_q = quartic_exponent(theta, best_x);
    for (double s : stats) {  // ascending; strict improvement keeps the smaller tie
        const double q = quartic_exponent(theta, s);
        if (q > best_q + 1e-12 * (1.0 + std::abs(best_q))) {
            best_q = q;
            best_x = s;
        }
    }
    return best_x;
}

std::pair<Polynomial, Polynomial> univariate_fp_polys(const ReactionNetwork& net,
                                                      bool concentration_frame) {
    if (net.num_species() != 1)
        throw std::invalid_argument("univariate diffusion polynomials need a one-species network");
    const auto& polys = concentration_frame ? net.concentration_polys() : net.propensity_polys();
    const double diff_scale = concentration_frame ? 1.0 / net.omega() : 1.0;
    Polynomial b(1), s(1);
    for (int j = 0; j < net.num_reactions(); ++j) {
        const double a = net.net_effect_matrix()(0, j);
        b += a * polys[static_cast<size_t>(j)];
        s += diff_scale * a * a * polys[static_cast<size_t>(j)];
    }
    return {b, s};
}

}  // namespace rnf
