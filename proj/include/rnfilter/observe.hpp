#pragma once

#include "rnfilter/path.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace rnf {

/// Discrete noisy measurements y_i = G x(t_i) + xi_i with xi_i i.i.d.
/// zero-mean Gaussian of covariance V (symmetric positive definite).
struct ObservationSeries {
    double t0 = 0.0;
    double t_end = 0.0;
    std::vector<double> times;  // strictly increasing, within (t0, t_end]
    Eigen::MatrixXd values;     // d x N, column i is y_i
    Eigen::MatrixXd G;          // d x n
    Eigen::MatrixXd V;          // d x d

    int dim() const { return static_cast<int>(G.rows()); }
    int num_obs() const { return static_cast<int>(times.size()); }
};

/// Equally spaced times t0 + i*dt, i = 1..floor((t_end - t0)/dt).
std::vector<double> observation_times(double t0, double t_end, double dt);

/// Draws y_i = G x(t_i) + chol(V) * z_i with z_i standard normal.
/// Deterministic per seed. Throws if V is not symmetric positive definite.
ObservationSeries observe(const Path& path, const std::vector<double>& times,
                          const Eigen::MatrixXd& G, const Eigen::MatrixXd& V,
                          std::uint64_t seed);

/// CSV with header t,y1,...,yd (values only; G, V and the time span are
/// supplied separately when a series is read back).
void write_observations_csv(std::ostream& out, const ObservationSeries& obs);
ObservationSeries read_observations_csv(std::istream& in, double t0, double t_end,
                                        const Eigen::MatrixXd& G, const Eigen::MatrixXd& V);

}  // namespace rnf
