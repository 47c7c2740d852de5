#include "rnfilter/gaussmoments.hpp"

#include <numeric>
#include <stdexcept>

namespace rnf {

namespace {

/// Central moment E[prod z_{idx}] for z ~ N(0, Q), where idx lists one
/// coordinate per factor. Recursive Isserlis sum over pairings: pair the
/// first factor with each remaining one and recurse.
double isserlis(const Eigen::MatrixXd& Q, std::vector<int>& idx) {
    const size_t k = idx.size();
    if (k == 0) return 1.0;
    if (k % 2 == 1) return 0.0;
    if (k == 2) return Q(idx[0], idx[1]);

    const int first = idx[0];
    double acc = 0.0;
    std::vector<int> rest(k - 2);
    for (size_t j = 1; j < k; ++j) {
        const double q = Q(first, idx[j]);
        if (q == 0.0) continue;
        size_t w = 0;
        for (size_t r = 1; r < k; ++r)
            if (r != j) rest[w++] = idx[r];
        acc += q * isserlis(Q, rest);
    }
    return acc;
}

double binomial_coeff(int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

}  // namespace

double gaussian_moment(const GaussianState& state, const std::vector<int>& alpha) {
    const int n = state.dim();
    if (static_cast<int>(alpha.size()) != n)
        throw std::invalid_argument("gaussian_moment: alpha has wrong length");
    const int total = std::accumulate(alpha.begin(), alpha.end(), 0);
    if (total > 8) throw std::invalid_argument("gaussian_moment: order above 8 unsupported");
    for (int a : alpha)
        if (a < 0) throw std::invalid_argument("gaussian_moment: negative exponent");

    // E[prod (mu_i + z_i)^{a_i}] expanded binomially; the central part is an
    // Isserlis sum. beta runs over all componentwise sub-exponents.
    std::vector<int> beta(alpha.size(), 0);
    double acc = 0.0;
    while (true) {
        double weight = 1.0;
        int central_order = 0;
        for (int i = 0; i < n; ++i) {
            weight *= binomial_coeff(alpha[static_cast<size_t>(i)], beta[static_cast<size_t>(i)]) *
                      ipow(state.mean[i], alpha[static_cast<size_t>(i)] - beta[static_cast<size_t>(i)]);
            central_order += beta[static_cast<size_t>(i)];
        }
        if (weight != 0.0 && central_order % 2 == 0) {
            std::vector<int> idx;
            idx.reserve(static_cast<size_t>(central_order));
            for (int i = 0; i < n; ++i)
                for (int r = 0; r < beta[static_cast<size_t>(i)]; ++r) idx.push_back(i);
            acc += weight * isserlis(state.cov, idx);
        }
        // odometer over beta <= alpha
        int i = 0;
        for (; i < n; ++i) {
            if (beta[static_cast<size_t>(i)] < alpha[static_cast<size_t>(i)]) {
                ++beta[static_cast<size_t>(i)];
                break;
            }
            beta[static_cast<size_t>(i)] = 0;
        }
        if (i == n) break;
    }
    return acc;
}

double expect_polynomial(const GaussianState& state, const Polynomial& poly) {
    if (poly.nvars() != state.dim())
        throw std::invalid_argument("expect_polynomial: dimension mismatch");
    double acc = 0.0;
    for (const auto& [expo, coeff] : poly.terms()) acc += coeff * gaussian_moment(state, expo);
    return acc;
}

Eigen::VectorXd expect_propensity(const ReactionNetwork& net, const GaussianState& state) {
    const int m = net.num_reactions();
    Eigen::VectorXd out(m);
    for (int j = 0; j < m; ++j)
        out[j] = expect_polynomial(state, net.propensity_polys()[static_cast<size_t>(j)]);
    return out;
}

Eigen::MatrixXd expect_jacobian(const ReactionNetwork& net, const GaussianState& state) {
    const int m = net.num_reactions();
    const int n = net.num_species();
    Eigen::MatrixXd out(m, n);
    for (int j = 0; j < m; ++j) {
        const Polynomial& hj = net.propensity_polys()[static_cast<size_t>(j)];
        for (int i = 0; i < n; ++i) out(j, i) = expect_polynomial(state, hj.derivative(i));
    }
    return out;
}

Eigen::VectorXd expect_diffusion(const ReactionNetwork& net, const GaussianState& state) {
    return expect_propensity(net, state);
}

}  // namespace rnf
