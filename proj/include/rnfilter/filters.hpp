#pragma once

#include "rnfilter/gaussmoments.hpp"
#include "rnfilter/network.hpp"
#include "rnfilter/observe.hpp"
#include "rnfilter/ode.hpp"
#include "rnfilter/quartic.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rnf {

enum class FilterKind { GPF, QPF, LNA };

std::string filter_kind_name(FilterKind kind);
FilterKind filter_kind_from_name(const std::string& name);

struct GaussianDrift {
    Eigen::VectorXd dmean;
    Eigen::MatrixXd dcov;
};

/// Gaussian projection drift:
///   d mu/dt = A E[h(x)]
///   d Q/dt  = Q E[J_h]^T A^T + A E[J_h] Q + A diag(E[h]) A^T
/// with all expectations under N(mu, Q). dcov is symmetrized.
GaussianDrift gpf_drift(const ReactionNetwork& net, const GaussianState& state);

/// Same structure with a real net-effect matrix and explicit propensity
/// polynomials; gpf_drift delegates here. Used directly for rescaled
/// (concentration-frame) variants of a network.
GaussianDrift gaussian_projection_core(const Eigen::MatrixXd& A,
                                       const std::vector<Polynomial>& h_polys,
                                       const GaussianState& state);

/// Linear-noise drift: propensities and Jacobians evaluated at the mean,
///   d mu/dt = A h(mu),  d Q/dt = Q J_h(mu)^T A^T + A J_h(mu) Q + A diag(h(mu)) A^T.
GaussianDrift lna_drift(const ReactionNetwork& net, const GaussianState& state);

/// Kalman correction for y = G x + noise(V):
///   K = Q G^T (G Q G^T + V)^-1, mu+ = mu + K (y - G mu), Q+ = Q - K G Q.
/// Throws if the innovation covariance is not positive definite.
GaussianState kalman_correct(const GaussianState& state, const Eigen::VectorXd& y,
                             const Eigen::MatrixXd& G, const Eigen::MatrixXd& V);

/// Mode of the Gaussian: the mean.
Eigen::VectorXd gaussian_map(const GaussianState& state);

/// Initial conditions for a filter run.
struct FilterInit {
    std::optional<GaussianState> gaussian;         // GPF / LNA
    std::optional<Eigen::Vector4d> quartic_theta;  // QPF, concentration units
};

/// Dense record of one filter run. map holds the MAP estimate in count
/// units on the output grid (n x T); params holds the filter parameters on
/// the same grid ((mu, vec(Q)) stacked, or theta for QPF). corrected has
/// one column per observation with the post-correction parameters.
struct FilteredTrajectory {
    std::vector<double> times;
    Eigen::MatrixXd map;
    Eigen::MatrixXd params;
    std::vector<double> obs_times;
    Eigen::MatrixXd corrected;
    bool diverged = false;
    double diverged_at = 0.0;
};

/// Runs the predict/correct loop: integrate the kind's drift over each
/// inter-observation interval, apply its correction at every observation
/// time, and record the MAP trail on the output grid (predicted state
/// between observations, corrected state from each t_i onward). The QPF
/// runs in concentration units z = x/omega (observations mapped to y/omega
/// with V/omega^2) and reports MAP in counts; it requires a one-species
/// network. A failed prediction step is retried once at halved tolerances,
/// then the run is flagged diverged at the failing time.
FilteredTrajectory run_filter(const ReactionNetwork& net, FilterKind kind,
                              const ObservationSeries& obs, const FilterInit& init,
                              const StepControl& ctrl = {}, double out_spacing = 0.01);

/// Priors used by the benchmark harness when none are given explicitly:
/// the observed subspace is seeded from the first observation (pseudo-
/// inverse lift, variance V), unobserved coordinates from x0_counts with
/// variance omega. The QPF prior is a moment-matched near-Gaussian with
/// theta4 = -1e-4 in concentration units.
FilterInit default_filter_init(const ReactionNetwork& net, FilterKind kind,
                               const ObservationSeries& obs, const Eigen::VectorXi& x0_counts);

/// CSV with header t,map_1..map_n,param_1..param_p.
void write_trajectory_csv(std::ostream& out, const FilteredTrajectory& traj);

}  // namespace rnf
