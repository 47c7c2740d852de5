#pragma once

#include "rnfilter/filters.hpp"
#include "rnfilter/network.hpp"
#include "rnfilter/path.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rnf {

/// Time-averaged squared estimation error
///   (1/T) * integral of |x(t) - xhat(t)|^2 dt
/// evaluated by the trapezoid rule on the union of the estimate's output
/// grid and the path's jump times. The truth is exact (piecewise constant)
/// on every union interval; the estimate is interpolated linearly.
/// Throws if the time spans disagree.
double mse(const Path& truth, const FilteredTrajectory& estimate);

struct ExperimentConfig {
    std::string network_file;
    double T = 100.0;
    double omega_override = 0.0;  // 0 keeps the network file's omega
    std::string x0_policy = "auto";  // "auto" or comma-separated counts
    Eigen::VectorXi x0;              // used when x0_policy is explicit
    std::vector<double> V_grid;
    std::vector<double> dt_grid;
    double V_ref = 0.0;   // dt sweep runs at this V
    double dt_ref = 0.0;  // V sweep runs at this dt
    int reps = 20;
    Eigen::MatrixXd G;
    std::uint64_t seed = 1;
    std::vector<FilterKind> filters;
    double out_grid = 0.01;
    StepControl ode;
};

/// Flat key = value text; see the shipped configs for the key set
/// (network, T, omega, x0, V_grid, dt_grid, V_ref, dt_ref, reps, G, seed,
/// filters, out_grid).
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig parse_experiment_config_file(const std::string& path);

/// "auto" start: the rate equation is integrated from z = 1 for a long
/// burn-in and the end point scaled to counts, landing on an attractor
/// (fixed point or a point of an attracting cycle). Deterministic.
Eigen::VectorXi resolve_x0(const ExperimentConfig& cfg, const ReactionNetwork& net);

/// One (filter, V, dt) aggregate over the repetitions.
struct MseCell {
    FilterKind filter{};
    double V = 0.0;
    double dt = 0.0;
    std::vector<double> mse_values;    // per repetition; diverged runs excluded
    std::vector<int> diverged_reps;    // repetition indices that diverged
    std::vector<std::uint64_t> seeds;  // observation seed per repetition
    double mean = 0.0;
    double std_error = 0.0;
    int n_diverged = 0;
};

struct ExperimentReport {
    ExperimentConfig config;
    Eigen::VectorXi x0;
    std::vector<MseCell> cells;

    const MseCell* find(FilterKind k, double V, double dt) const;
};

/// Runs the paired benchmark: per repetition one SSA path; per (V, dt) one
/// observation series consumed by every requested filter; MSE per filter.
/// The grid is the union of the V sweep at dt_ref and the dt sweep at
/// V_ref. Path streams use seed + rep, observation streams a disjoint
/// index range, so the whole report is a pure function of (config, seed)
/// regardless of worker count.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const ReactionNetwork& net);

/// Protocol wrappers; the bistable benchmark needs a one-species network,
/// the limit-cycle one rejects the univariate quartic filter.
ExperimentReport run_bistable_experiment(const ExperimentConfig& cfg, const ReactionNetwork& net);
ExperimentReport run_limitcycle_experiment(const ExperimentConfig& cfg,
                                           const ReactionNetwork& net);

/// report.json plus mse_vs_V.csv / mse_vs_dt.csv under out_dir.
void write_report(const ExperimentReport& report, const std::string& out_dir);

}  // namespace rnf
