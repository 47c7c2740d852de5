#include "rnfilter/path.hpp"

#include "rnfilter/csv.hpp"
#include "rnfilter/rng.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace rnf {

Path ssa_simulate(const ReactionNetwork& net, const Eigen::VectorXi& x0, double t0, double t_end,
                  std::uint64_t seed) {
    if (x0.size() != net.num_species())
        throw std::invalid_argument("ssa_simulate: x0 has wrong dimension");
    if ((x0.array() < 0).any())
        throw std::invalid_argument("ssa_simulate: x0 must be nonnegative");
    if (t_end < t0) throw std::invalid_argument("ssa_simulate: t_end < t0");

    const int m = net.num_reactions();
    const Eigen::MatrixXi& A = net.net_effect_matrix();

    Xoshiro256pp rng(seed);
    Path path;
    path.t_end = t_end;
    path.times.push_back(t0);
    path.states.push_back(x0);

    Eigen::VectorXi x = x0;
    double t = t0;
    while (true) {
        const Eigen::VectorXd h = net.propensity(x);
        const double total = h.sum();
        if (total <= 0.0) break;  // absorbing state: constant to t_end

        t += rng.exponential(total);
        if (t >= t_end) break;

        const double u = rng.uniform01() * total;
        double acc = 0.0;
        int j = m - 1;  // fall back to the last reaction against rounding
        for (int jj = 0; jj < m; ++jj) {
            acc += h[jj];
            if (u < acc) {
                j = jj;
                break;
            }
        }
        x += A.col(j);
        path.times.push_back(t);
        path.states.push_back(x);
    }
    return path;
}

Eigen::VectorXi sample_path_at(const Path& path, double t) {
    if (t < path.t0() || t > path.t_end)
        throw std::invalid_argument("sample_path_at: time outside [t0, t_end]");
    // last index with times[idx] <= t
    auto it = std::upper_bound(path.times.begin(), path.times.end(), t);
    size_t idx = static_cast<size_t>(it - path.times.begin()) - 1;
    return path.states[idx];
}

void write_path_csv(std::ostream& out, const Path& path) {
    const int n = static_cast<int>(path.states.front().size());
    out << "t";
    for (int i = 1; i <= n; ++i) out << ",x" << i;
    out << "\n";
    auto row = [&](double t, const Eigen::VectorXi& x) {
        out << format_double(t);
        for (int i = 0; i < n; ++i) out << "," << x[i];
        out << "\n";
    };
    for (size_t k = 0; k < path.times.size(); ++k) row(path.times[k], path.states[k]);
    row(path.t_end, path.states.back());
}

Path read_path_csv(std::istream& in) {
    auto table = read_csv(in);
    if (table.header.empty() || table.header[0] != "t")
        throw std::runtime_error("path CSV: expected header starting with 't'");
    const int n = static_cast<int>(table.header.size()) - 1;
    if (n < 1 || table.rows.size() < 2) throw std::runtime_error("path CSV: malformed");
    Path path;
    // Final row duplicates the last state at t_end.
    for (size_t r = 0; r + 1 < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        path.times.push_back(row[0]);
        Eigen::VectorXi x(n);
        for (int i = 0; i < n; ++i) x[i] = static_cast<int>(std::lround(row[static_cast<size_t>(i) + 1]));
        path.states.push_back(x);
    }
    path.t_end = table.rows.back()[0];
    return path;
}

}  // namespace rnf
