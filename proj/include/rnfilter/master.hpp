#pragma once

#include "rnfilter/network.hpp"
#include "rnfilter/ode.hpp"

#include <Eigen/Core>

#include <stdexcept>
#include <utility>

namespace rnf {

/// Rectangular truncation box [0, upper_i] per species, row-major layout
/// with the last species fastest.
struct StateBox {
    Eigen::VectorXi upper;

    int num_species() const { return static_cast<int>(upper.size()); }
    long size() const;
    long index_of(const Eigen::VectorXi& x) const;
    Eigen::VectorXi state_of(long idx) const;
    bool contains(const Eigen::VectorXi& x) const;
};

/// Probability mass over a truncation box plus the mass that has leaked
/// through the boundary (absorbed outside, never reflected back).
struct TruncatedDistribution {
    StateBox box;
    Eigen::VectorXd p;
    double mass_lost = 0.0;

    double total() const { return p.sum() + mass_lost; }
    TruncatedDistribution normalized() const;
};

TruncatedDistribution point_mass(const StateBox& box, const Eigen::VectorXi& x);

class MassLeakError : public std::runtime_error {
public:
    MassLeakError(double lost, double cap)
        : std::runtime_error("master_evolve: probability leaked past the truncation box (" +
                             std::to_string(lost) + " > cap " + std::to_string(cap) + ")"),
          mass_lost(lost) {}
    double mass_lost;
};

/// Integrates the forward (master) equation on the finite box. Flux to
/// states beyond the box is removed from the system and accumulated into
/// mass_lost, so p.sum() + mass_lost is conserved. Throws MassLeakError
/// if the accumulated loss exceeds mass_cap.
TruncatedDistribution master_evolve(const ReactionNetwork& net, const TruncatedDistribution& P0,
                                    double t0, double t1, double mass_cap = 1e-6);

/// Mean and covariance of the distribution after renormalizing away the
/// lost mass.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> master_moments(const TruncatedDistribution& dist);

}  // namespace rnf
