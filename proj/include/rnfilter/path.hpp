#pragma once

#include "rnfilter/network.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace rnf {

/// An exact jump trajectory. times[0] is the start time and each later
/// entry is a jump instant; states[k] is the state on [times[k], times[k+1])
/// (right-open, piecewise constant) and states.back() holds up to t_end.
struct Path {
    std::vector<double> times;
    std::vector<Eigen::VectorXi> states;
    double t_end = 0.0;

    double t0() const { return times.front(); }
    int num_jumps() const { return static_cast<int>(times.size()) - 1; }
};

/// Gillespie direct method: exponential waiting times by inverse CDF, the
/// firing reaction chosen by a cumulative-sum scan. Statistically exact for
/// the underlying jump process; identical seeds give bit-identical paths.
/// If the total propensity reaches zero the path stays constant to t_end.
Path ssa_simulate(const ReactionNetwork& net, const Eigen::VectorXi& x0, double t0, double t_end,
                  std::uint64_t seed);

/// State active at time t (left value of the right-open convention).
/// Throws if t lies outside [t0, t_end].
Eigen::VectorXi sample_path_at(const Path& path, double t);

/// CSV with header t,x1,...,xn; one row per jump plus initial and final rows.
void write_path_csv(std::ostream& out, const Path& path);
Path read_path_csv(std::istream& in);

}  // namespace rnf
