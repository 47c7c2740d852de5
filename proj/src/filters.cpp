#include "rnfilter/filters.hpp"

#include "rnfilter/csv.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace rnf {

std::string filter_kind_name(FilterKind kind) {
    switch (kind) {
        case FilterKind::GPF: return "gpf";
        case FilterKind::QPF: return "qpf";
        case FilterKind::LNA: return "lna";
    }
    return "?";
}

FilterKind filter_kind_from_name(const std::string& name) {
    if (name == "gpf" || name == "GPF") return FilterKind::GPF;
    if (name == "qpf" || name == "QPF") return FilterKind::QPF;
    if (name == "lna" || name == "LNA") return FilterKind::LNA;
    throw std::invalid_argument("unknown filter kind '" + name + "'");
}

GaussianDrift gaussian_projection_core(const Eigen::MatrixXd& A,
                                       const std::vector<Polynomial>& h_polys,
                                       const GaussianState& state) {
    const int m = static_cast<int>(h_polys.size());
    const int n = state.dim();
    Eigen::VectorXd eh(m);
    Eigen::MatrixXd ej(m, n);
    for (int j = 0; j < m; ++j) {
        eh[j] = expect_polynomial(state, h_polys[static_cast<size_t>(j)]);
        for (int i = 0; i < n; ++i)
            ej(j, i) = expect_polynomial(state, h_polys[static_cast<size_t>(j)].derivative(i));
    }
    GaussianDrift d;
    d.dmean = A * eh;
    const Eigen::MatrixXd M = A * ej;
    Eigen::MatrixXd dq = state.cov * M.transpose() + M * state.cov +
                         A * eh.asDiagonal() * A.transpose();
    d.dcov = 0.5 * (dq + dq.transpose());
    return d;
}

GaussianDrift gpf_drift(const ReactionNetwork& net, const GaussianState& state) {
    return gaussian_projection_core(net.net_effect_matrix().cast<double>(),
                                    net.propensity_polys(), state);
}

GaussianDrift lna_drift(const ReactionNetwork& net, const GaussianState& state) {
    const Eigen::MatrixXd A = net.net_effect_matrix().cast<double>();
    const Eigen::VectorXd h = net.propensity_real(state.mean);
    const Eigen::MatrixXd J = net.propensity_jacobian(state.mean);
    GaussianDrift d;
    d.dmean = A * h;
    const Eigen::MatrixXd M = A * J;
    Eigen::MatrixXd dq = state.cov * M.transpose() + M * state.cov +
                         A * h.asDiagonal() * A.transpose();
    d.dcov = 0.5 * (dq + dq.transpose());
    return d;
}

GaussianState kalman_correct(const GaussianState& state, const Eigen::VectorXd& y,
                             const Eigen::MatrixXd& G, const Eigen::MatrixXd& V) {
    const Eigen::MatrixXd S = G * state.cov * G.transpose() + V;
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("kalman_correct: singular innovation covariance");
    const Eigen::MatrixXd K = llt.solve(G * state.cov).transpose();
    GaussianState out;
    out.mean = state.mean + K * (y - G * state.mean);
    Eigen::MatrixXd q = state.cov - K * G * state.cov;
    out.cov = 0.5 * (q + q.transpose());
    return out;
}

Eigen::VectorXd gaussian_map(const GaussianState& state) { return state.mean; }

namespace {

std::vector<double> output_grid(double t0, double t_end, double spacing) {
    if (!(spacing > 0)) throw std::invalid_argument("output grid spacing must be positive");
    const int count = static_cast<int>(std::floor((t_end - t0) / spacing + 1e-9));
    std::vector<double> grid;
    grid.reserve(static_cast<size_t>(count) + 2);
    for (int k = 0; k <= count; ++k) grid.push_back(t0 + k * spacing);
    if (grid.back() < t_end - 1e-9 * std::max(1.0, std::abs(t_end)))
        grid.push_back(t_end);
    else
        grid.back() = t_end;
    return grid;
}

StepControl halved(const StepControl& ctrl) {
    StepControl out = ctrl;
    out.abs_tol *= 0.5;
    out.rel_tol *= 0.5;
    return out;
}

/// Kind-specific state handling behind the common predict/correct loop.
struct GaussianLoop {
    const ReactionNetwork& net;
    FilterKind kind;
    const ObservationSeries& obs;
    int n;

    Eigen::VectorXd pack(const GaussianState& s) const {
        Eigen::VectorXd y(n + n * n);
        y.head(n) = s.mean;
        Eigen::Map<Eigen::MatrixXd>(y.data() + n, n, n) = s.cov;
        return y;
    }
    GaussianState unpack(const Eigen::VectorXd& y) const {
        GaussianState s;
        s.mean = y.head(n);
        s.cov = Eigen::Map<const Eigen::MatrixXd>(y.data() + n, n, n);
        return s;
    }
    OdeRhs rhs() const {
        return [this](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
            const GaussianState s = unpack(y);
            const GaussianDrift d =
                kind == FilterKind::GPF ? gpf_drift(net, s) : lna_drift(net, s);
            dy.resize(y.size());
            dy.head(n) = d.dmean;
            Eigen::Map<Eigen::MatrixXd>(dy.data() + n, n, n) = d.dcov;
        };
    }
    Eigen::VectorXd correct(const Eigen::VectorXd& y, int obs_idx) const {
        const GaussianState s = unpack(y);
        return pack(kalman_correct(s, obs.values.col(obs_idx), obs.G, obs.V));
    }
    Eigen::VectorXd map_of(const Eigen::VectorXd& y) const { return y.head(n); }
};

struct QuarticLoop {
    const ReactionNetwork& net;
    const ObservationSeries& obs;
    Polynomial drift_poly;      // concentration frame
    Polynomial diffusion_poly;  // concentration frame, 1/omega scaled

    OdeRhs rhs() const {
        return [this](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
            const Eigen::Vector4d theta = y;
            dy = quartic_drift(drift_poly, diffusion_poly, theta);
        };
    }
    Eigen::VectorXd correct(const Eigen::VectorXd& y, int obs_idx) const {
        QuarticState st = quartic_state(y);
        const double omega = net.omega();
        const double yz = obs.values(0, obs_idx) / omega;
        const double gz = obs.G(0, 0);
        const double vz = obs.V(0, 0) / (omega * omega);
        return quartic_correct(st, yz, gz, vz).theta;
    }
    Eigen::VectorXd map_of(const Eigen::VectorXd& y) const {
        Eigen::VectorXd x(1);
        x[0] = net.omega() * quartic_map(Eigen::Vector4d(y));
        return x;
    }
};

template <typename Loop>
FilteredTrajectory drive_filter(Loop& loop, const ObservationSeries& obs,
                                const Eigen::VectorXd& y0, int n_map, const StepControl& ctrl,
                                double out_spacing) {
    FilteredTrajectory traj;
    traj.times = output_grid(obs.t0, obs.t_end, out_spacing);
    const int T = static_cast<int>(traj.times.size());
    const int p = static_cast<int>(y0.size());
    traj.map.setZero(n_map, T);
    traj.params.setZero(p, T);
    traj.obs_times = obs.times;
    traj.corrected.setZero(p, obs.num_obs());

    // Segment boundaries: t0, every observation time, t_end.
    std::vector<double> bounds;
    bounds.push_back(obs.t0);
    for (double t : obs.times) bounds.push_back(t);
    if (bounds.back() < obs.t_end) bounds.push_back(obs.t_end);

    Eigen::VectorXd y = y0;
    int gi = 0;  // next output-grid index to fill
    auto fill_from = [&](const DenseTrail& trail, int start) {
        for (size_t k = 0; k < trail.times.size(); ++k) {
            const int idx = start + static_cast<int>(k);
            traj.params.col(idx) = trail.states[k];
            traj.map.col(idx) = loop.map_of(trail.states[k]);
        }
    };
    auto mark_diverged = [&](double t_fail) {
        traj.diverged = true;
        traj.diverged_at = t_fail;
        const Eigen::VectorXd last_params = gi > 0 ? Eigen::VectorXd(traj.params.col(gi - 1)) : y0;
        Eigen::VectorXd last_map;
        try {
            last_map = loop.map_of(last_params);
        } catch (const std::exception&) {
            last_map = Eigen::VectorXd::Zero(n_map);
        }
        for (int idx = gi; idx < T; ++idx) {
            traj.params.col(idx) = last_params;
            traj.map.col(idx) = last_map;
        }
    };

    const OdeRhs rhs = loop.rhs();
    for (size_t seg = 0; seg + 1 < bounds.size(); ++seg) {
        const double ta = bounds[seg];
        const double tb = bounds[seg + 1];
        // Grid points in [ta, tb); the point at tb is filled by the next
        // segment so observation instants show the corrected state.
        const bool final_seg = seg + 2 == bounds.size();
        std::vector<double> seg_grid;
        while (gi + static_cast<int>(seg_grid.size()) < T) {
            const double tg = traj.times[static_cast<size_t>(gi) + seg_grid.size()];
            const bool in_seg =
                final_seg || tg < tb - 1e-12 * std::max(1.0, std::abs(tb));
            if (!in_seg) break;
            seg_grid.push_back(tg);
        }

        DenseTrail trail;
        try {
            y = integrate(rhs, y, ta, tb, ctrl, seg_grid, &trail);
        } catch (const std::exception&) {
            try {
                trail.times.clear();
                trail.states.clear();
                y = integrate(rhs, y, ta, tb, halved(ctrl), seg_grid, &trail);
            } catch (const std::exception&) {
                mark_diverged(ta);
                return traj;
            }
        }
        fill_from(trail, gi);
        gi += static_cast<int>(trail.times.size());

        const bool is_obs = seg < obs.times.size();
        if (is_obs) {
            try {
                y = loop.correct(y, static_cast<int>(seg));
            } catch (const std::exception&) {
                mark_diverged(tb);
                return traj;
            }
            traj.corrected.col(static_cast<int>(seg)) = y;
        }
    }
    // A trailing grid point exactly at t_end when t_N == t_end.
    while (gi < T) {
        traj.params.col(gi) = y;
        traj.map.col(gi) = loop.map_of(y);
        ++gi;
    }
    return traj;
}

}  // namespace

FilteredTrajectory run_filter(const ReactionNetwork& net, FilterKind kind,
                              const ObservationSeries& obs, const FilterInit& init,
                              const StepControl& ctrl, double out_spacing) {
    for (size_t i = 0; i + 1 < obs.times.size(); ++i)
        if (!(obs.times[i] < obs.times[i + 1]))
            throw std::invalid_argument("run_filter: observation times must increase");
    if (!obs.times.empty() &&
        (obs.times.front() < obs.t0 || obs.times.back() > obs.t_end + 1e-9))
        throw std::invalid_argument("run_filter: observation times outside the time span");

    if (kind == FilterKind::QPF) {
        if (net.num_species() != 1)
            throw std::invalid_argument("the quartic filter is univariate only");
        if (obs.dim() != 1)
            throw std::invalid_argument("the quartic filter needs scalar observations");
        if (!init.quartic_theta)
            throw std::invalid_argument("run_filter: missing quartic initial state");
        auto [b, s] = univariate_fp_polys(net, true);
        QuarticLoop loop{net, obs, std::move(b), std::move(s)};
        return drive_filter(loop, obs, Eigen::VectorXd(*init.quartic_theta), 1, ctrl,
                            out_spacing);
    }

    if (!init.gaussian) throw std::invalid_argument("run_filter: missing Gaussian initial state");
    if (init.gaussian->dim() != net.num_species())
        throw std::invalid_argument("run_filter: initial state dimension mismatch");
    GaussianLoop loop{net, kind, obs, net.num_species()};
    return drive_filter(loop, obs, loop.pack(*init.gaussian), net.num_species(), ctrl,
                        out_spacing);
}

FilterInit default_filter_init(const ReactionNetwork& net, FilterKind kind,
                               const ObservationSeries& obs, const Eigen::VectorXi& x0_counts) {
    const int n = net.num_species();
    const double omega = net.omega();
    FilterInit init;

    if (kind == FilterKind::QPF) {
        const double g = obs.G(0, 0);
        double mu0, sigma2;
        if (obs.num_obs() > 0) {
            mu0 = obs.values(0, 0) / (omega * g);
            sigma2 = obs.V(0, 0) / (omega * omega * g * g) + 1.0;
        } else {
            mu0 = static_cast<double>(x0_counts[0]) / omega;
            sigma2 = 1.0;
        }
        init.quartic_theta = Eigen::Vector4d(mu0 / sigma2, -0.5 / sigma2, 0.0, -1e-4);
        return init;
    }

    GaussianState s;
    s.mean.resize(n);
    s.cov = Eigen::MatrixXd::Zero(n, n);
    std::vector<bool> observed(static_cast<size_t>(n), false);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < obs.dim(); ++k)
            if (obs.G(k, i) != 0.0) observed[static_cast<size_t>(i)] = true;

    if (obs.num_obs() > 0) {
        // Pseudo-inverse lift of the first observation onto the state space.
        const Eigen::MatrixXd Gp =
            obs.G.transpose() * (obs.G * obs.G.transpose()).ldlt().solve(
                                    Eigen::MatrixXd::Identity(obs.dim(), obs.dim()));
        const Eigen::VectorXd lift = Gp * obs.values.col(0);
        const Eigen::MatrixXd vlift = Gp * obs.V * Gp.transpose();
        for (int i = 0; i < n; ++i) {
            if (observed[static_cast<size_t>(i)]) {
                s.mean[i] = lift[i];
                s.cov(i, i) = vlift(i, i);
            } else {
                s.mean[i] = static_cast<double>(x0_counts[i]);
                s.cov(i, i) = omega;
            }
        }
    } else {
        s.mean = x0_counts.cast<double>();
        s.cov = omega * Eigen::MatrixXd::Identity(n, n);
    }
    init.gaussian = std::move(s);
    return init;
}

void write_trajectory_csv(std::ostream& out, const FilteredTrajectory& traj) {
    const int n = static_cast<int>(traj.map.rows());
    const int p = static_cast<int>(traj.params.rows());
    out << "t";
    for (int i = 1; i <= n; ++i) out << ",map_" << i;
    for (int i = 1; i <= p; ++i) out << ",param_" << i;
    out << "\n";
    for (size_t k = 0; k < traj.times.size(); ++k) {
        out << format_double(traj.times[k]);
        for (int i = 0; i < n; ++i) out << "," << format_double(traj.map(i, static_cast<int>(k)));
        for (int i = 0; i < p; ++i)
            out << "," << format_double(traj.params(i, static_cast<int>(k)));
        out << "\n";
    }
}

}  // namespace rnf
