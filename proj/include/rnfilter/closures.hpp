#pragma once

#include "rnfilter/filters.hpp"
#include "rnfilter/gaussmoments.hpp"
#include "rnfilter/network.hpp"

#include <Eigen/Core>

#include <utility>

namespace rnf {

/// Normal moment closure via the raw second-moment route:
///   d E[xx^T]/dt = A E[h x^T] + E[x h^T] A^T + A diag(E[h]) A^T,
///   dQ = dE[xx^T] - dmu mu^T - mu dmu^T,
/// with third moments closed under the Gaussian law. Agrees with gpf_drift;
/// implemented independently of the Jacobian route as a cross-check.
GaussianDrift normal_closure_drift(const ReactionNetwork& net, const GaussianState& state);

/// One-species template A = (a1, a2), h(x) = (k1 x, k2 x(x-1)).
struct BimolecularTemplate {
    int a1 = 0;
    int a2 = 0;
    double k1 = 0.0;
    double k2 = 0.0;
};

/// Projection onto gamma densities parameterized by (mean mu, shape kappa):
///   dmu/dt    = (a1 k1 - a2 k2) mu + a2 k2 mu^2 + a2 k2 mu^2 / kappa
///   dkappa/dt = [1/(1 - kappa trigamma(kappa))] *
///               { a2 k2 mu + a2^2 k2 kappa / 2
///                 + (a1^2 k1 - a2^2 k2) kappa^2 / (2 mu (kappa - 1)) }.
/// kappa = 1 is a pole of the last term and is reported as an error, never
/// regularized. Note kappa*trigamma(kappa) > 1 for all kappa > 0, so the
/// leading denominator is negative and bounded away from zero.
std::pair<double, double> gamma_projection_drift(const BimolecularTemplate& tpl, double mu,
                                                 double kappa);

/// Gamma moment closure in (mean mu, variance sigma2), using
/// E[x^3] = (mu^2 + 2 sigma2)(mu^2 + sigma2)/mu:
///   dmu/dt     = (a1 k1 - a2 k2) mu + a2 k2 mu^2 + a2 k2 sigma2
///   dsigma2/dt = 2 (a1 k1 - a2 k2) sigma2 + 4 a2 k2 (sigma2 + mu^2) sigma2 / mu
///                + (a1^2 k1 - a2^2 k2) mu + a2^2 k2 (sigma2 + mu^2).
std::pair<double, double> gamma_closure_drift(const BimolecularTemplate& tpl, double mu,
                                              double sigma2);

/// Digamma / trigamma by recurrence shift into the asymptotic regime plus
/// the Bernoulli series; absolute error below 1e-12 for positive arguments.
double digamma(double kappa);
double trigamma(double kappa);

}  // namespace rnf
