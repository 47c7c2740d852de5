#include "rnfilter/cli.hpp"

#include "rnfilter/closures.hpp"
#include "rnfilter/csv.hpp"
#include "rnfilter/experiment.hpp"
#include "rnfilter/filters.hpp"
#include "rnfilter/master.hpp"
#include "rnfilter/network.hpp"
#include "rnfilter/observe.hpp"
#include "rnfilter/path.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace rnf {

namespace {

std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

Eigen::MatrixXd parse_matrix_arg(const std::string& s) {
    std::vector<std::vector<double>> rows;
    for (const auto& row : split_list(s, ';')) {
        std::vector<double> vals;
        for (const auto& cell : split_list(row, ','))
            if (!cell.empty()) vals.push_back(std::stod(cell));
        rows.push_back(std::move(vals));
    }
    Eigen::MatrixXd m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size())
            throw std::invalid_argument("ragged matrix argument");
        for (size_t c = 0; c < rows[r].size(); ++c)
            m(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
    }
    return m;
}

/// Scalar "3000" becomes v * I_d; otherwise a full d x d literal.
Eigen::MatrixXd parse_cov_arg(const std::string& s, int d) {
    const Eigen::MatrixXd m = parse_matrix_arg(s);
    if (m.size() == 1) return m(0, 0) * Eigen::MatrixXd::Identity(d, d);
    if (m.rows() != d || m.cols() != d)
        throw std::invalid_argument("covariance argument has wrong shape");
    return m;
}

Eigen::VectorXi parse_x0_arg(const std::string& s, const ReactionNetwork& net) {
    if (s == "auto") {
        ExperimentConfig cfg;
        cfg.x0_policy = "auto";
        return resolve_x0(cfg, net);
    }
    const auto cells = split_list(s, ',');
    if (static_cast<int>(cells.size()) != net.num_species())
        throw std::invalid_argument("x0 has wrong dimension for the network");
    Eigen::VectorXi x0(net.num_species());
    for (size_t i = 0; i < cells.size(); ++i) x0[static_cast<int>(i)] = std::stoi(cells[i]);
    return x0;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open output file: " + path);
    return out;
}

int run_simulate(const std::string& network, const std::string& x0_arg, double t0, double t_end,
                 std::uint64_t seed, const std::string& out_path) {
    const ReactionNetwork net = parse_network_file(network);
    const Eigen::VectorXi x0 = parse_x0_arg(x0_arg, net);
    const Path path = ssa_simulate(net, x0, t0, t_end, seed);
    auto out = open_output(out_path);
    write_path_csv(out, path);
    return 0;
}

int run_observe(const std::string& network, const std::string& path_file, double dt,
                const std::string& g_arg, const std::string& v_arg, std::uint64_t seed,
                const std::string& out_path) {
    const ReactionNetwork net = parse_network_file(network);
    auto in = open_input(path_file);
    const Path path = read_path_csv(in);
    const Eigen::MatrixXd G = parse_matrix_arg(g_arg);
    if (G.cols() != net.num_species())
        throw std::invalid_argument("G width does not match the network");
    const Eigen::MatrixXd V = parse_cov_arg(v_arg, static_cast<int>(G.rows()));
    const ObservationSeries obs =
        observe(path, observation_times(path.t0(), path.t_end, dt), G, V, seed);
    auto out = open_output(out_path);
    write_observations_csv(out, obs);
    return 0;
}

int run_filter_cmd(const std::string& kind_name, const std::string& network,
                   const std::string& obs_file, const std::string& g_arg,
                   const std::string& v_arg, double t0, double t_end,
                   const std::string& x0_arg, double out_grid, const std::string& out_path) {
    const ReactionNetwork net = parse_network_file(network);
    const FilterKind kind = filter_kind_from_name(kind_name);
    const Eigen::MatrixXd G = parse_matrix_arg(g_arg);
    if (G.cols() != net.num_species())
        throw std::invalid_argument("G width does not match the network");
    const Eigen::MatrixXd V = parse_cov_arg(v_arg, static_cast<int>(G.rows()));
    auto in = open_input(obs_file);
    const ObservationSeries obs = read_observations_csv(in, t0, t_end, G, V);
    const Eigen::VectorXi x0 = parse_x0_arg(x0_arg, net);
    const FilterInit init = default_filter_init(net, kind, obs, x0);
    const FilteredTrajectory traj = run_filter(net, kind, obs, init, StepControl{}, out_grid);
    auto out = open_output(out_path);
    write_trajectory_csv(out, traj);
    if (traj.diverged) {
        std::cerr << "filter diverged at t = " << traj.diverged_at << "\n";
        return 2;
    }
    return 0;
}

int run_experiment_cmd(const std::string& config_file, const std::string& out_dir) {
    const ExperimentConfig cfg = parse_experiment_config_file(config_file);
    if (cfg.network_file.empty())
        throw std::invalid_argument("config is missing the 'network' key");
    const ReactionNetwork net = parse_network_file(cfg.network_file);
    const ExperimentReport report = run_experiment(cfg, net);
    write_report(report, out_dir);
    std::cout << "wrote " << out_dir << "/report.json, mse_vs_V.csv, mse_vs_dt.csv\n";
    return 0;
}

int run_oracle(const std::string& network, const std::string& box_arg,
               const std::string& init_arg, double t0, double t_end, double mass_cap,
               const std::string& out_path) {
    const ReactionNetwork net = parse_network_file(network);
    const auto cells = split_list(box_arg, ',');
    if (static_cast<int>(cells.size()) != net.num_species())
        throw std::invalid_argument("box has wrong dimension for the network");
    StateBox box;
    box.upper.resize(net.num_species());
    for (size_t i = 0; i < cells.size(); ++i) box.upper[static_cast<int>(i)] = std::stoi(cells[i]);

    TruncatedDistribution dist;
    const auto parts = split_list(init_arg, ':');
    if (parts.size() == 2 && parts[0] == "point") {
        Eigen::VectorXi x0(net.num_species());
        const auto xs = split_list(parts[1], '/');
        if (static_cast<int>(xs.size()) != net.num_species())
            throw std::invalid_argument("point init has wrong dimension");
        for (size_t i = 0; i < xs.size(); ++i) x0[static_cast<int>(i)] = std::stoi(xs[i]);
        dist = point_mass(box, x0);
    } else if (parts.size() == 2 && parts[0] == "poisson") {
        if (net.num_species() != 1)
            throw std::invalid_argument("poisson init is univariate only");
        const double lambda = std::stod(parts[1]);
        dist.box = box;
        dist.p.resize(box.size());
        double logw = -lambda;
        for (long x = 0; x <= box.upper[0]; ++x) {
            dist.p[x] = std::exp(logw);
            logw += std::log(lambda) - std::log(static_cast<double>(x + 1));
        }
        dist.mass_lost = std::max(0.0, 1.0 - dist.p.sum());
    } else {
        throw std::invalid_argument("init must be point:<x1/x2/...> or poisson:<lambda>");
    }

    const TruncatedDistribution evolved = master_evolve(net, dist, t0, t_end, mass_cap);
    auto out = open_output(out_path);
    for (int i = 1; i <= net.num_species(); ++i) out << "x" << i << ",";
    out << "p\n";
    for (long idx = 0; idx < box.size(); ++idx) {
        const Eigen::VectorXi x = box.state_of(idx);
        for (int i = 0; i < net.num_species(); ++i) out << x[i] << ",";
        out << format_double(evolved.p[idx]) << "\n";
    }
    std::cout << "mass_lost = " << format_double(evolved.mass_lost) << "\n";
    return 0;
}

int run_closure_compare(int a1, int a2, double k1, double k2, double mu0, double kappa0,
                        double t_end, double dt, const std::string& out_path) {
    const BimolecularTemplate tpl{a1, a2, k1, k2};
    const auto proj_rhs = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const auto [dmu, dkappa] = gamma_projection_drift(tpl, y[0], y[1]);
        dy.resize(2);
        dy << dmu, dkappa;
    };
    const auto clos_rhs = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const auto [dmu, dsig] = gamma_closure_drift(tpl, y[0], y[1]);
        dy.resize(2);
        dy << dmu, dsig;
    };
    std::vector<double> grid;
    for (double t = 0.0; t < t_end + 1e-12; t += dt) grid.push_back(std::min(t, t_end));

    Eigen::VectorXd yp(2), yc(2);
    yp << mu0, kappa0;
    yc << mu0, mu0 * mu0 / kappa0;
    DenseTrail proj_trail, clos_trail;
    StepControl ctrl;
    integrate(proj_rhs, yp, 0.0, t_end, ctrl, grid, &proj_trail);
    integrate(clos_rhs, yc, 0.0, t_end, ctrl, grid, &clos_trail);

    auto out = open_output(out_path);
    out << "t,proj_mu,proj_kappa,proj_sigma2,closure_mu,closure_sigma2\n";
    for (size_t i = 0; i < grid.size(); ++i) {
        const auto& p = proj_trail.states[i];
        const auto& c = clos_trail.states[i];
        out << format_double(grid[i]) << "," << format_double(p[0]) << ","
            << format_double(p[1]) << "," << format_double(p[0] * p[0] / p[1]) << ","
            << format_double(c[0]) << "," << format_double(c[1]) << "\n";
    }
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"stochastic reaction network simulation and approximate filtering"};
    app.require_subcommand(1);

    std::string network, out_path = "out.csv", x0_arg = "auto";
    std::uint64_t seed = 1;
    double t0 = 0.0, t_end = 100.0;

    auto* sim = app.add_subcommand("simulate", "sample an exact SSA path, write CSV");
    sim->add_option("--network", network, "network definition file")->required();
    sim->add_option("--x0", x0_arg, "initial counts 'c1,c2,...' or 'auto'");
    sim->add_option("--t0", t0, "start time");
    sim->add_option("--t-end", t_end, "end time")->required();
    sim->add_option("--seed", seed, "RNG seed");
    sim->add_option("--out", out_path, "output CSV path");

    std::string path_file, g_arg = "1", v_arg = "1";
    double dt = 1.0;
    auto* obs_cmd = app.add_subcommand("observe", "draw noisy observations from a path CSV");
    obs_cmd->add_option("--network", network, "network definition file")->required();
    obs_cmd->add_option("--path", path_file, "path CSV from 'simulate'")->required();
    obs_cmd->add_option("--dt", dt, "inter-observation interval")->required();
    obs_cmd->add_option("--G", g_arg, "observation matrix, rows ';'-separated");
    obs_cmd->add_option("--V", v_arg, "noise covariance (scalar or matrix)")->required();
    obs_cmd->add_option("--seed", seed, "RNG seed");
    obs_cmd->add_option("--out", out_path, "output CSV path");

    std::string kind_name, obs_file;
    double out_grid = 0.01;
    auto* flt = app.add_subcommand("filter", "run one filter over an observation CSV");
    flt->add_option("--kind", kind_name, "gpf | qpf | lna")->required();
    flt->add_option("--network", network, "network definition file")->required();
    flt->add_option("--obs", obs_file, "observation CSV")->required();
    flt->add_option("--G", g_arg, "observation matrix used to generate the data");
    flt->add_option("--V", v_arg, "noise covariance")->required();
    flt->add_option("--t0", t0, "start of the filtering span");
    flt->add_option("--t-end", t_end, "end of the filtering span")->required();
    flt->add_option("--x0", x0_arg, "prior counts for unobserved coordinates, or 'auto'");
    flt->add_option("--out-grid", out_grid, "output grid spacing");
    flt->add_option("--out", out_path, "output CSV path");

    std::string config_file, out_dir = "results";
    auto* exp = app.add_subcommand("experiment", "run a full MSE benchmark from a config file");
    exp->add_option("--config", config_file, "experiment config")->required();
    exp->add_option("--out", out_dir, "output directory");

    std::string box_arg, init_arg;
    double mass_cap = 1e-6;
    auto* orc = app.add_subcommand("oracle", "integrate the truncated master equation");
    orc->add_option("--network", network, "network definition file")->required();
    orc->add_option("--box", box_arg, "per-species upper bounds 'u1,u2,...'")->required();
    orc->add_option("--init", init_arg, "point:<x1/x2/...> or poisson:<lambda>")->required();
    orc->add_option("--t0", t0, "start time");
    orc->add_option("--t-end", t_end, "end time")->required();
    orc->add_option("--mass-cap", mass_cap, "acceptable leaked probability");
    orc->add_option("--out", out_path, "output CSV path");

    int a1 = 1, a2 = -1;
    double k1 = 1.0, k2 = 0.1, mu0 = 2.0, kappa0 = 4.0, cc_dt = 0.01;
    auto* cc = app.add_subcommand("closure-compare",
                                  "gamma projection vs gamma closure trajectories");
    cc->add_option("--a1", a1, "net effect of the linear reaction");
    cc->add_option("--a2", a2, "net effect of the bimolecular reaction");
    cc->add_option("--k1", k1, "linear rate");
    cc->add_option("--k2", k2, "bimolecular rate");
    cc->add_option("--mu0", mu0, "initial mean");
    cc->add_option("--kappa0", kappa0, "initial shape");
    cc->add_option("--t-end", t_end, "end time")->required();
    cc->add_option("--dt", cc_dt, "output spacing");
    cc->add_option("--out", out_path, "output CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) return run_simulate(network, x0_arg, t0, t_end, seed, out_path);
        if (obs_cmd->parsed())
            return run_observe(network, path_file, dt, g_arg, v_arg, seed, out_path);
        if (flt->parsed())
            return run_filter_cmd(kind_name, network, obs_file, g_arg, v_arg, t0, t_end, x0_arg,
                                  out_grid, out_path);
        if (exp->parsed()) return run_experiment_cmd(config_file, out_dir);
        if (orc->parsed())
            return run_oracle(network, box_arg, init_arg, t0, t_end, mass_cap, out_path);
        if (cc->parsed())
            return run_closure_compare(a1, a2, k1, k2, mu0, kappa0, t_end, cc_dt, out_path);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::logic_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace rnf
