#include "rnfilter/closures.hpp"

#include <cmath>
#include <stdexcept>

namespace rnf {

GaussianDrift normal_closure_drift(const ReactionNetwork& net, const GaussianState& state) {
    const int n = net.num_species();
    const int m = net.num_reactions();
    const Eigen::MatrixXd A = net.net_effect_matrix().cast<double>();

    const Eigen::VectorXd eh = expect_propensity(net, state);

    // E[h_j(x) x_i]: polynomial products, moments closed Gaussianly.
    Eigen::MatrixXd ehx(m, n);
    for (int j = 0; j < m; ++j) {
        const Polynomial& hj = net.propensity_polys()[static_cast<size_t>(j)];
        for (int i = 0; i < n; ++i) {
            std::vector<int> e(static_cast<size_t>(n), 0);
            e[static_cast<size_t>(i)] = 1;
            ehx(j, i) = expect_polynomial(state, hj * Polynomial::monomial(n, e, 1.0));
        }
    }

    GaussianDrift d;
    d.dmean = A * eh;
    const Eigen::MatrixXd d_second =
        A * ehx + ehx.transpose() * A.transpose() + A * eh.asDiagonal() * A.transpose();
    Eigen::MatrixXd dq = d_second - d.dmean * state.mean.transpose() -
                         state.mean * d.dmean.transpose();
    d.dcov = 0.5 * (dq + dq.transpose());
    return d;
}

std::pair<double, double> gamma_projection_drift(const BimolecularTemplate& tpl, double mu,
                                                 double kappa) {
    if (!(mu > 0.0)) throw std::invalid_argument("gamma_projection_drift: mu must be positive");
    if (!(kappa > 0.0))
        throw std::invalid_argument("gamma_projection_drift: kappa must be positive");
    if (std::abs(kappa - 1.0) < 1e-12)
        throw std::invalid_argument("gamma_projection_drift: kappa = 1 is a pole");

    const double a1 = tpl.a1, a2 = tpl.a2, k1 = tpl.k1, k2 = tpl.k2;
    const double dmu = (a1 * k1 - a2 * k2) * mu + a2 * k2 * mu * mu +
                       a2 * k2 * mu * mu / kappa;

    const double denom = 1.0 - kappa * trigamma(kappa);
    if (std::abs(denom) < 1e-12)
        throw std::invalid_argument("gamma_projection_drift: vanishing Fisher denominator");
    const double brace = a2 * k2 * mu + 0.5 * a2 * a2 * k2 * kappa +
                         (a1 * a1 * k1 - a2 * a2 * k2) * kappa * kappa /
                             (2.0 * mu * (kappa - 1.0));
    return {dmu, brace / denom};
}

std::pair<double, double> gamma_closure_drift(const BimolecularTemplate& tpl, double mu,
                                              double sigma2) {
    if (!(mu > 0.0)) throw std::invalid_argument("gamma_closure_drift: mu must be positive");
    const double a1 = tpl.a1, a2 = tpl.a2, k1 = tpl.k1, k2 = tpl.k2;
    const double dmu = (a1 * k1 - a2 * k2) * mu + a2 * k2 * mu * mu + a2 * k2 * sigma2;
    const double dsig = 2.0 * (a1 * k1 - a2 * k2) * sigma2 +
                        4.0 * a2 * k2 * (sigma2 + mu * mu) * sigma2 / mu +
                        (a1 * a1 * k1 - a2 * a2 * k2) * mu + a2 * a2 * k2 * (sigma2 + mu * mu);
    return {dmu, dsig};
}

namespace {

// Asymptotic series coefficients: B_2n / (2n) for digamma, B_2n for the
// trigamma tail.
constexpr double kDigammaSeries[] = {
    1.0 / 12.0, -1.0 / 120.0, 1.0 / 252.0, -1.0 / 240.0, 1.0 / 132.0, -691.0 / 32760.0,
};

}  // namespace

double digamma(double kappa) {
    if (!(kappa > 0.0)) throw std::invalid_argument("digamma: argument must be positive");
    double x = kappa;
    double acc = 0.0;
    while (x < 10.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    const double inv2 = 1.0 / (x * x);
    double series = 0.0;
    double power = inv2;
    for (double c : kDigammaSeries) {
        series += c * power;
        power *= inv2;
    }
    return acc + std::log(x) - 0.5 / x - series;
}

double trigamma(double kappa) {
    if (!(kappa > 0.0)) throw std::invalid_argument("trigamma: argument must be positive");
    double x = kappa;
    double acc = 0.0;
    while (x < 10.0) {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    // 1/x + 1/(2x^2) + sum B_2n / x^(2n+1)
    double series = inv + 0.5 * inv2;
    double power = inv * inv2;
    constexpr double kBernoulli[] = {
        1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0,
    };
    for (double b : kBernoulli) {
        series += b * power;
        power *= inv2;
    }
    return acc + series;
}

}  // namespace rnf
