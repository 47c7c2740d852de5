#include "rnfilter/observe.hpp"

#include "rnfilter/csv.hpp"
#include "rnfilter/rng.hpp"

#include <Eigen/Cholesky>

#include <istream>
#include <ostream>
#include <stdexcept>

namespace rnf {

std::vector<double> observation_times(double t0, double t_end, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("observation_times: dt must be positive");
    // Small slack so t0 + N*dt with N*dt == t_end survives rounding.
    const int count = static_cast<int>(std::floor((t_end - t0) / dt + 1e-9));
    std::vector<double> times;
    times.reserve(static_cast<size_t>(std::max(count, 0)));
    for (int i = 1; i <= count; ++i) times.push_back(t0 + i * dt);
    return times;
}

ObservationSeries observe(const Path& path, const std::vector<double>& times,
                          const Eigen::MatrixXd& G, const Eigen::MatrixXd& V,
                          std::uint64_t seed) {
    const int d = static_cast<int>(G.rows());
    if (V.rows() != d || V.cols() != d)
        throw std::invalid_argument("observe: V dimension does not match G");
    if (!V.isApprox(V.transpose(), 1e-12))
        throw std::invalid_argument("observe: V must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(V);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("observe: V must be positive definite");
    const Eigen::MatrixXd L = llt.matrixL();

    ObservationSeries obs;
    obs.t0 = path.t0();
    obs.t_end = path.t_end;
    obs.times = times;
    obs.G = G;
    obs.V = V;
    obs.values.resize(d, static_cast<int>(times.size()));

    Xoshiro256pp rng(seed);
    Eigen::VectorXd z(d);
    for (int i = 0; i < static_cast<int>(times.size()); ++i) {
        const Eigen::VectorXi x = sample_path_at(path, times[static_cast<size_t>(i)]);
        for (int k = 0; k < d; ++k) z[k] = rng.normal();
        obs.values.col(i) = G * x.cast<double>() + L * z;
    }
    return obs;
}

void write_observations_csv(std::ostream& out, const ObservationSeries& obs) {
    out << "t";
    for (int k = 1; k <= obs.dim(); ++k) out << ",y" << k;
    out << "\n";
    for (int i = 0; i < obs.num_obs(); ++i) {
        out << format_double(obs.times[static_cast<size_t>(i)]);
        for (int k = 0; k < obs.dim(); ++k) out << "," << format_double(obs.values(k, i));
        out << "\n";
    }
}

ObservationSeries read_observations_csv(std::istream& in, double t0, double t_end,
                                        const Eigen::MatrixXd& G, const Eigen::MatrixXd& V) {
    auto table = read_csv(in);
    if (table.header.empty() || table.header[0] != "t")
        throw std::runtime_error("observation CSV: expected header starting with 't'");
    const int d = static_cast<int>(table.header.size()) - 1;
    if (d != G.rows()) throw std::runtime_error("observation CSV: width does not match G");
    ObservationSeries obs;
    obs.t0 = t0;
    obs.t_end = t_end;
    obs.G = G;
    obs.V = V;
    obs.values.resize(d, static_cast<int>(table.rows.size()));
    for (size_t r = 0; r < table.rows.size(); ++r) {
        obs.times.push_back(table.rows[r][0]);
        for (int k = 0; k < d; ++k) obs.values(k, static_cast<int>(r)) = table.rows[r][static_cast<size_t>(k) + 1];
    }
    return obs;
}

}  // namespace rnf
