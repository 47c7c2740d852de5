#include "rnfilter/experiment.hpp"

#include "rnfilter/csv.hpp"
#include "rnfilter/observe.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace rnf {

namespace {

Eigen::VectorXd interpolate_columns(const std::vector<double>& times, const Eigen::MatrixXd& cols,
                                    double t) {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return cols.col(0);
    size_t hi = static_cast<size_t>(it - times.begin());
    if (hi >= times.size()) return cols.col(static_cast<int>(times.size()) - 1);
    size_t lo = hi - 1;
    const double span = times[hi] - times[lo];
    const double w = span > 0 ? (t - times[lo]) / span : 0.0;
    return (1.0 - w) * cols.col(static_cast<int>(lo)) + w * cols.col(static_cast<int>(hi));
}

}  // namespace

double mse(const Path& truth, const FilteredTrajectory& estimate) {
    const double t0 = truth.t0();
    const double t_end = truth.t_end;
    const double tol = 1e-6 * std::max(1.0, std::abs(t_end));
    if (std::abs(estimate.times.front() - t0) > tol ||
        std::abs(estimate.times.back() - t_end) > tol)
        throw std::invalid_argument("mse: estimate and truth cover different time spans");

    // Union of the output grid and the jump times, ascending.
    std::vector<double> grid;
    grid.reserve(estimate.times.size() + truth.times.size());
    std::merge(estimate.times.begin(), estimate.times.end(), truth.times.begin(),
               truth.times.end(), std::back_inserter(grid));
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    double acc = 0.0;
    for (size_t k = 0; k + 1 < grid.size(); ++k) {
        const double a = grid[k];
        const double b = std::min(grid[k + 1], t_end);
        if (!(b > a)) continue;
        // Truth is constant on [a, b): the state active at a.
        const Eigen::VectorXd x = sample_path_at(truth, a).cast<double>();
        const double fa = (x - interpolate_columns(estimate.times, estimate.map, a)).squaredNorm();
        const double fb = (x - interpolate_columns(estimate.times, estimate.map, b)).squaredNorm();
        acc += 0.5 * (fa + fb) * (b - a);
    }
    return acc / (t_end - t0);
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
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

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    size_t e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& cell : split(s, ',')) {
        const std::string c = trim(cell);
        if (c.empty()) continue;
        out.push_back(std::stod(c));
    }
    return out;
}

Eigen::MatrixXd parse_matrix(const std::string& s) {
    std::vector<std::vector<double>> rows;
    for (const auto& row : split(s, ';')) rows.push_back(parse_double_list(row));
    if (rows.empty() || rows[0].empty()) throw std::invalid_argument("empty matrix literal");
    Eigen::MatrixXd m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size())
            throw std::invalid_argument("ragged matrix literal");
        for (size_t c = 0; c < rows[r].size(); ++c)
            m(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
    }
    return m;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key == "network") cfg.network_file = value;
        else if (key == "T") cfg.T = std::stod(value);
        else if (key == "omega") cfg.omega_override = std::stod(value);
        else if (key == "x0") {
            cfg.x0_policy = value;
            if (value != "auto") {
                const auto vals = parse_double_list(value);
                cfg.x0.resize(static_cast<int>(vals.size()));
                for (size_t i = 0; i < vals.size(); ++i)
                    cfg.x0[static_cast<int>(i)] = static_cast<int>(std::lround(vals[i]));
            }
        } else if (key == "V_grid") cfg.V_grid = parse_double_list(value);
        else if (key == "dt_grid") cfg.dt_grid = parse_double_list(value);
        else if (key == "V_ref") cfg.V_ref = std::stod(value);
        else if (key == "dt_ref") cfg.dt_ref = std::stod(value);
        else if (key == "reps") cfg.reps = std::stoi(value);
        else if (key == "G") cfg.G = parse_matrix(value);
        else if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "filters") {
            cfg.filters.clear();
            for (const auto& name : split(value, ','))
                cfg.filters.push_back(filter_kind_from_name(trim(name)));
        } else if (key == "out_grid") cfg.out_grid = std::stod(value);
        else
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": unknown key '" + key + "'");
    }
    if (cfg.reps < 1) throw std::invalid_argument("config: reps must be >= 1");
    return cfg;
}

ExperimentConfig parse_experiment_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    ExperimentConfig cfg = parse_experiment_config(buf.str());
    // Resolve the network path relative to the config file.
    if (!cfg.network_file.empty()) {
        std::filesystem::path np(cfg.network_file);
        if (np.is_relative()) {
            np = std::filesystem::path(path).parent_path() / np;
            cfg.network_file = np.string();
        }
    }
    return cfg;
}

Eigen::VectorXi resolve_x0(const ExperimentConfig& cfg, const ReactionNetwork& net) {
    if (cfg.x0_policy != "auto") {
        if (cfg.x0.size() != net.num_species())
            throw std::invalid_argument("x0 has wrong dimension for the network");
        return cfg.x0;
    }
    const int n = net.num_species();
    const Eigen::VectorXd z0 = Eigen::VectorXd::Ones(n);
    const auto rhs = [&](double, const Eigen::VectorXd& z, Eigen::VectorXd& dz) {
        dz = net.rate_equation_rhs(z);
    };
    StepControl ctrl;
    const Eigen::VectorXd z = integrate(rhs, z0, 0.0, 200.0, ctrl);
    Eigen::VectorXi x0(n);
    for (int i = 0; i < n; ++i)
        x0[i] = std::max(0, static_cast<int>(std::lround(net.omega() * z[i])));
    return x0;
}

// ---------------------------------------------------------------------------
// Harness
// ---------------------------------------------------------------------------

namespace {

struct GridPoint {
    double V;
    double dt;
};

std::vector<GridPoint> experiment_grid(const ExperimentConfig& cfg) {
    std::vector<GridPoint> pts;
    const double dt_ref = cfg.dt_ref > 0 ? cfg.dt_ref
                          : (cfg.dt_grid.empty() ? 0.0 : cfg.dt_grid.back());
    const double V_ref = cfg.V_ref > 0 ? cfg.V_ref
                         : (cfg.V_grid.empty() ? 0.0 : cfg.V_grid.front());
    for (double V : cfg.V_grid) pts.push_back({V, dt_ref});
    for (double dt : cfg.dt_grid) {
        if (dt == dt_ref) {
            // already covered by the V sweep when V_ref is on the V grid
            bool dup = false;
            for (const auto& p : pts) dup = dup || (p.V == V_ref && p.dt == dt);
            if (dup) continue;
        }
        pts.push_back({V_ref, dt});
    }
    if (pts.empty()) throw std::invalid_argument("experiment: empty (V, dt) grid");
    return pts;
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double std_error_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1)) /
           std::sqrt(static_cast<double>(v.size()));
}

}  // namespace

const MseCell* ExperimentReport::find(FilterKind k, double V, double dt) const {
    for (const auto& c : cells)
        if (c.filter == k && c.V == V && c.dt == dt) return &c;
    return nullptr;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const ReactionNetwork& net) {
    if (cfg.filters.empty()) throw std::invalid_argument("experiment: no filters requested");
    if (cfg.G.size() == 0) throw std::invalid_argument("experiment: G not set");
    if (cfg.G.cols() != net.num_species())
        throw std::invalid_argument("experiment: G width does not match the network");
    if (net.num_species() != 1)
        for (FilterKind k : cfg.filters)
            if (k == FilterKind::QPF)
                throw std::invalid_argument("the quartic filter is univariate only");
    for (double dt : cfg.dt_grid)
        if (!(dt > 0 && dt < cfg.T))
            throw std::invalid_argument("experiment: dt values must lie in (0, T)");

    const Eigen::VectorXi x0 = resolve_x0(cfg, net);
    const auto points = experiment_grid(cfg);
    const int R = cfg.reps;
    const int P = static_cast<int>(points.size());
    const int F = static_cast<int>(cfg.filters.size());

    // One SSA path per repetition (stream = seed + rep), shared by every
    // grid point of that repetition.
    std::vector<Path> paths(static_cast<size_t>(R));
    for (int r = 0; r < R; ++r)
        paths[static_cast<size_t>(r)] =
            ssa_simulate(net, x0, 0.0, cfg.T, cfg.seed + static_cast<std::uint64_t>(r));

    struct TaskResult {
        std::vector<double> mse_per_filter;
        std::vector<bool> diverged_per_filter;
        std::uint64_t obs_seed = 0;
    };
    std::vector<TaskResult> results(static_cast<size_t>(P * R));

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int task = next.fetch_add(1);
            if (task >= P * R) break;
            const int q = task / R;
            const int r = task % R;
            const GridPoint& pt = points[static_cast<size_t>(q)];

            // Observation streams occupy indices above the path streams.
            const std::uint64_t obs_seed =
                cfg.seed + static_cast<std::uint64_t>(R) +
                static_cast<std::uint64_t>(q) * static_cast<std::uint64_t>(R) +
                static_cast<std::uint64_t>(r);
            const int d = static_cast<int>(cfg.G.rows());
            const Eigen::MatrixXd V = pt.V * Eigen::MatrixXd::Identity(d, d);
            const ObservationSeries obs =
                observe(paths[static_cast<size_t>(r)], observation_times(0.0, cfg.T, pt.dt),
                        cfg.G, V, obs_seed);

            TaskResult res;
            res.obs_seed = obs_seed;
            for (FilterKind kind : cfg.filters) {
                const FilterInit init = default_filter_init(net, kind, obs, x0);
                const FilteredTrajectory traj =
                    run_filter(net, kind, obs, init, cfg.ode, cfg.out_grid);
                res.diverged_per_filter.push_back(traj.diverged);
                res.mse_per_filter.push_back(traj.diverged
                                                 ? 0.0
                                                 : mse(paths[static_cast<size_t>(r)], traj));
            }
            results[static_cast<size_t>(task)] = std::move(res);
        }
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(P * R));
    std::vector<std::thread> threads;
    for (unsigned w = 1; w < workers; ++w) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();

    ExperimentReport report;
    report.config = cfg;
    report.x0 = x0;
    for (int f = 0; f < F; ++f) {
        for (int q = 0; q < P; ++q) {
            MseCell cell;
            cell.filter = cfg.filters[static_cast<size_t>(f)];
            cell.V = points[static_cast<size_t>(q)].V;
            cell.dt = points[static_cast<size_t>(q)].dt;
            for (int r = 0; r < R; ++r) {
                const TaskResult& res = results[static_cast<size_t>(q * R + r)];
                cell.seeds.push_back(res.obs_seed);
                if (res.diverged_per_filter[static_cast<size_t>(f)]) {
                    cell.diverged_reps.push_back(r);
                } else {
                    cell.mse_values.push_back(res.mse_per_filter[static_cast<size_t>(f)]);
                }
            }
            cell.n_diverged = static_cast<int>(cell.diverged_reps.size());
            cell.mean = mean_of(cell.mse_values);
            cell.std_error = std_error_of(cell.mse_values);
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

ExperimentReport run_bistable_experiment(const ExperimentConfig& cfg,
                                         const ReactionNetwork& net) {
    if (net.num_species() != 1)
        throw std::invalid_argument("bistable experiment expects a one-species network");
    return run_experiment(cfg, net);
}

ExperimentReport run_limitcycle_experiment(const ExperimentConfig& cfg,
                                           const ReactionNetwork& net) {
    for (FilterKind k : cfg.filters)
        if (k == FilterKind::QPF)
            throw std::invalid_argument("the quartic filter is univariate only");
    return run_experiment(cfg, net);
}

void write_report(const ExperimentReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    nlohmann::json j;
    j["network"] = report.config.network_file;
    j["T"] = report.config.T;
    j["reps"] = report.config.reps;
    j["seed"] = report.config.seed;
    j["out_grid"] = report.config.out_grid;
    j["x0"] = std::vector<int>(report.x0.data(), report.x0.data() + report.x0.size());
    std::vector<std::string> filter_names;
    for (FilterKind k : report.config.filters) filter_names.push_back(filter_kind_name(k));
    j["filters"] = filter_names;
    j["cells"] = nlohmann::json::array();
    for (const auto& c : report.cells) {
        nlohmann::json jc;
        jc["filter"] = filter_kind_name(c.filter);
        jc["V"] = c.V;
        jc["dt"] = c.dt;
        jc["mse"] = c.mse_values;
        jc["mean_mse"] = c.mean;
        jc["stderr"] = c.std_error;
        jc["n_diverged"] = c.n_diverged;
        jc["diverged_reps"] = c.diverged_reps;
        jc["obs_seeds"] = c.seeds;
        j["cells"].push_back(jc);
    }
    std::ofstream(fs::path(out_dir) / "report.json") << j.dump(2) << "\n";

    const double dt_ref = report.config.dt_ref > 0
                              ? report.config.dt_ref
                              : (report.config.dt_grid.empty() ? 0.0
                                                               : report.config.dt_grid.back());
    const double V_ref = report.config.V_ref > 0
                             ? report.config.V_ref
                             : (report.config.V_grid.empty() ? 0.0
                                                             : report.config.V_grid.front());

    {
        std::ofstream out(fs::path(out_dir) / "mse_vs_V.csv");
        out << "V,filter,mean_mse,stderr,n_diverged\n";
        for (const auto& c : report.cells) {
            if (c.dt != dt_ref) continue;
            out << format_double(c.V) << "," << filter_kind_name(c.filter) << ","
                << format_double(c.mean) << "," << format_double(c.std_error) << ","
                << c.n_diverged << "\n";
        }
    }
    {
        std::ofstream out(fs::path(out_dir) / "mse_vs_dt.csv");
        out << "dt,filter,mean_mse,stderr,n_diverged\n";
        for (const auto& c : report.cells) {
            if (c.V != V_ref) continue;
            out << format_double(c.dt) << "," << filter_kind_name(c.filter) << ","
                << format_double(c.mean) << "," << format_double(c.std_error) << ","
                << c.n_diverged << "\n";
        }
    }
}

}  // namespace rnf
