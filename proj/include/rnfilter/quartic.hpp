#pragma once

#include "rnfilter/network.hpp"
#include "rnfilter/polynomial.hpp"

#include <Eigen/Core>

#include <array>
#include <stdexcept>
#include <utility>

namespace rnf {

/// Raised when a quartic exponential state stops being a probability
/// density (theta4 >= 0, Fisher matrix not positive definite, quadrature
/// breakdown). Filter runs surface this as divergence.
class QuarticStateError : public std::runtime_error {
public:
    explicit QuarticStateError(const std::string& what) : std::runtime_error(what) {}
};

/// Exponential family with density proportional to
/// exp(theta1*x + theta2*x^2 + theta3*x^3 + theta4*x^4), theta4 < 0.
/// eta caches the raw moments E[x^i], i = 0..8 (eta[0] = 1) and log_norm
/// the log of the normalization integral.
struct QuarticState {
    Eigen::Vector4d theta;
    std::array<double, 9> eta{};
    double log_norm = 0.0;
};

struct QuarticBase {
    double I0, I1, I2;  // integrals of x^i * exp(q(x) - q_max)
    double q_max;
    double eta1, eta2;
    double log_norm;  // q_max + log(I0)
};

/// Normalization integrals by adaptive Simpson over the interval where the
/// exponent stays within 45 of its global maximum (located through the
/// derivative cubic); the exponent is shifted by its maximum so the
/// integrand never overflows. Throws QuarticStateError if theta4 >= 0 and
/// QuadratureError if the quadrature fails to converge.
QuarticBase quartic_base_integrals(const Eigen::Vector4d& theta);

/// Fills eta[3..8] from eta[0..2] with the in-family identity
///   eta_i = -1/(4 theta4) * [(i-3) eta_{i-4} + theta1 eta_{i-3}
///           + 2 theta2 eta_{i-2} + 3 theta3 eta_{i-1}],
/// starting at i = 3 where the eta_{i-4} term carries weight zero.
/// Throws if |theta4| < 1e-12 (ill-conditioned).
void quartic_moment_recursion(const Eigen::Vector4d& theta, std::array<double, 9>& eta);

/// Builds a full state (base integrals + recursion).
QuarticState quartic_state(const Eigen::Vector4d& theta);

/// Fisher information g_ij = eta_{i+j} - eta_i*eta_j, i,j = 1..4.
/// Verified positive definite by Cholesky; throws QuarticStateError if not.
Eigen::Matrix4d quartic_fisher(const std::array<double, 9>& eta);

/// E[L x^j], j = 1..4, for the diffusion generator
///   L = b(x) d/dx + s(x)/2 d^2/dx^2
/// with polynomial drift b and diffusion s:
///   E[L x^j] = j E[b x^{j-1}] + j(j-1)/2 E[s x^{j-2}],
/// every expectation a linear combination of the cached eta.
Eigen::Vector4d quartic_expect_Lc(const Polynomial& drift, const Polynomial& diffusion,
                                  const std::array<double, 9>& eta);

/// Count-scale convenience for a one-species network: b = sum_j A_j h_j,
/// s = sum_j A_j^2 h_j.
Eigen::Vector4d quartic_expect_Lc(const ReactionNetwork& net, const std::array<double, 9>& eta);

/// d theta/dt = g(theta)^-1 E[L c]; refreshes the moment cache first.
Eigen::Vector4d quartic_drift(const Polynomial& drift, const Polynomial& diffusion,
                              const Eigen::Vector4d& theta);
Eigen::Vector4d quartic_drift(const ReactionNetwork& net, const QuarticState& state);

/// Conjugate update for a scalar Gaussian observation y = G x + noise(V):
/// theta1 += G y / V, theta2 -= G^2 / (2 V); theta3, theta4 unchanged.
/// The moment cache is recomputed.
QuarticState quartic_correct(const QuarticState& state, double y, double G, double V);

/// Global maximizer of the exponent; ties broken toward smaller x.
double quartic_map(const Eigen::Vector4d& theta);

/// Drift b(x) and diffusion s(x) polynomials of the one-species diffusion
/// approximation. In the concentration frame (z = x/omega) the rates are
/// the rescaled ones, falling factorials degenerate to powers, and the
/// diffusion carries a 1/omega factor.
std::pair<Polynomial, Polynomial> univariate_fp_polys(const ReactionNetwork& net,
                                                      bool concentration_frame);

}  // namespace rnf
