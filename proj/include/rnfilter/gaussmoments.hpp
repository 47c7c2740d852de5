#pragma once

#include "rnfilter/network.hpp"
#include "rnfilter/polynomial.hpp"

#include <Eigen/Core>

#include <vector>

namespace rnf {

/// Gaussian law N(mean, cov); cov symmetric, positive semidefinite up to a
/// small tolerance relative to its trace.
struct GaussianState {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;

    int dim() const { return static_cast<int>(mean.size()); }
};

/// E[prod_i x_i^{alpha_i}] under the Gaussian law, |alpha| <= 8. Computed
/// by a binomial shift to central moments and Isserlis pair-partition sums
/// over the covariance; closed form, no quadrature.
double gaussian_moment(const GaussianState& state, const std::vector<int>& alpha);

/// Linearity over gaussian_moment.
double expect_polynomial(const GaussianState& state, const Polynomial& poly);

/// E[h(x)], E[J_h(x)] and the diffusion expectation E[h(x)] used as the
/// diagonal of H(x) = diag(h(x)).
Eigen::VectorXd expect_propensity(const ReactionNetwork& net, const GaussianState& state);
Eigen::MatrixXd expect_jacobian(const ReactionNetwork& net, const GaussianState& state);
Eigen::VectorXd expect_diffusion(const ReactionNetwork& net, const GaussianState& state);

}  // namespace rnf
