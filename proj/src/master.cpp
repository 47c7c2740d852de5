#include "rnfilter/master.hpp"

#include <vector>

namespace rnf {

long StateBox::size() const {
    long s = 1;
    for (int i = 0; i < num_species(); ++i) s *= upper[i] + 1;
    return s;
}

long StateBox::index_of(const Eigen::VectorXi& x) const {
    long idx = 0;
    for (int i = 0; i < num_species(); ++i) idx = idx * (upper[i] + 1) + x[i];
    return idx;
}

Eigen::VectorXi StateBox::state_of(long idx) const {
    Eigen::VectorXi x(num_species());
    for (int i = num_species() - 1; i >= 0; --i) {
        const long base = upper[i] + 1;
        x[i] = static_cast<int>(idx % base);
        idx /= base;
    }
    return x;
}

bool StateBox::contains(const Eigen::VectorXi& x) const {
    for (int i = 0; i < num_species(); ++i)
        if (x[i] < 0 || x[i] > upper[i]) return false;
    return true;
}

TruncatedDistribution TruncatedDistribution::normalized() const {
    TruncatedDistribution out = *this;
    const double s = p.sum();
    if (!(s > 0.0)) throw std::runtime_error("TruncatedDistribution: no mass left in box");
    out.p /= s;
    out.mass_lost = 0.0;
    return out;
}

TruncatedDistribution point_mass(const StateBox& box, const Eigen::VectorXi& x) {
    if (!box.contains(x)) throw std::invalid_argument("point_mass: state outside box");
    TruncatedDistribution d;
    d.box = box;
    d.p = Eigen::VectorXd::Zero(box.size());
    d.p[box.index_of(x)] = 1.0;
    return d;
}

TruncatedDistribution master_evolve(const ReactionNetwork& net, const TruncatedDistribution& P0,
                                    double t0, double t1, double mass_cap) {
    const StateBox& box = P0.box;
    const long nstates = box.size();
    if (P0.p.size() != nstates)
        throw std::invalid_argument("master_evolve: distribution does not match its box");
    const int m = net.num_reactions();

    // Precompute, per reaction, the propensity at every box state and the
    // flattened target index (-1 when the jump leaves the box).
    std::vector<Eigen::VectorXd> prop(static_cast<size_t>(m));
    std::vector<std::vector<long>> target(static_cast<size_t>(m));
    const Eigen::MatrixXi& A = net.net_effect_matrix();
    for (int j = 0; j < m; ++j) {
        prop[static_cast<size_t>(j)].resize(nstates);
        target[static_cast<size_t>(j)].assign(static_cast<size_t>(nstates), -1);
    }
    for (long idx = 0; idx < nstates; ++idx) {
        const Eigen::VectorXi x = box.state_of(idx);
        const Eigen::VectorXd h = net.propensity(x);
        for (int j = 0; j < m; ++j) {
            prop[static_cast<size_t>(j)][idx] = h[j];
            const Eigen::VectorXi y = x + A.col(j);
            if (box.contains(y)) target[static_cast<size_t>(j)][static_cast<size_t>(idx)] = box.index_of(y);
        }
    }

    // State vector = [p; mass_lost]; the rhs moves probability along jumps
    // and routes boundary flux into the last component.
    auto rhs = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        dy.setZero();
        for (int j = 0; j < m; ++j) {
            const auto& hj = prop[static_cast<size_t>(j)];
            const auto& tj = target[static_cast<size_t>(j)];
            for (long idx = 0; idx < nstates; ++idx) {
                const double flux = hj[idx] * y[idx];
                if (flux == 0.0) continue;
                dy[idx] -= flux;
                const long dst = tj[static_cast<size_t>(idx)];
                if (dst >= 0)
                    dy[dst] += flux;
                else
                    dy[nstates] += flux;
            }
        }
    };

    Eigen::VectorXd y0(nstates + 1);
    y0.head(nstates) = P0.p;
    y0[nstates] = P0.mass_lost;

    StepControl ctrl;
    ctrl.abs_tol = 1e-10;
    ctrl.rel_tol = 1e-10;
    ctrl.max_steps = 200'000'000;
    const Eigen::VectorXd y1 = integrate(rhs, y0, t0, t1, ctrl);

    TruncatedDistribution out;
    out.box = box;
    out.p = y1.head(nstates);
    out.mass_lost = y1[nstates];
    if (out.mass_lost > mass_cap) throw MassLeakError(out.mass_lost, mass_cap);
    return out;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> master_moments(const TruncatedDistribution& dist) {
    const TruncatedDistribution d = dist.normalized();
    const int n = d.box.num_species();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(n, n);
    for (long idx = 0; idx < d.box.size(); ++idx) {
        const double w = d.p[idx];
        if (w == 0.0) continue;
        const Eigen::VectorXd x = d.box.state_of(idx).cast<double>();
        mean += w * x;
        second += w * x * x.transpose();
    }
    return {mean, second - mean * mean.transpose()};
}

}  // namespace rnf
