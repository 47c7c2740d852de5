#include "rnfilter/numeric.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace rnf {

std::vector<double> real_cubic_roots(double a, double b, double c, double d) {
    std::vector<double> roots;
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
    if (scale == 0.0) return roots;

    if (std::abs(a) < 1e-14 * scale) {
        if (std::abs(b) < 1e-14 * scale) {
            if (std::abs(c) < 1e-14 * scale) return roots;
            roots.push_back(-d / c);
            return roots;
        }
        const double disc = c * c - 4.0 * b * d;
        if (disc >= 0.0) {
            const double s = std::sqrt(disc);
            // Citardauq form avoids cancellation.
            const double q = -0.5 * (c + (c >= 0 ? s : -s));
            roots.push_back(q / b);
            if (q != 0.0) roots.push_back(d / q);
            else roots.push_back(-c / b - roots[0]);
        }
        std::sort(roots.begin(), roots.end());
        return roots;
    }

    Eigen::Matrix3d companion;
    companion << 0, 0, -d / a,
                 1, 0, -c / a,
                 0, 1, -b / a;
    Eigen::EigenSolver<Eigen::Matrix3d> es(companion, false);
    for (int i = 0; i < 3; ++i) {
        const std::complex<double> r = es.eigenvalues()[i];
        if (std::abs(r.imag()) <= 1e-10 * (1.0 + std::abs(r.real())))
            roots.push_back(r.real());
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

namespace {

template <typename Value, typename Tol>
struct SimpsonRec {
    const std::function<Value(double)>& f;
    int max_depth;

    static bool within(double err, double tol) { return std::abs(err) <= 15.0 * tol; }
    static bool within(const Eigen::Vector3d& err, const Eigen::Vector3d& tol) {
        return (err.array().abs() <= 15.0 * tol.array()).all();
    }

    Value run(double a, double m, double b, const Value& fa, const Value& fm, const Value& fb,
              const Value& whole, const Tol& tol, int depth) {
        const double lm = 0.5 * (a + m);
        const double rm = 0.5 * (m + b);
        const Value flm = f(lm);
        const Value frm = f(rm);
        const Value left = ((m - a) / 6.0) * (fa + 4.0 * flm + fm);
        const Value right = ((b - m) / 6.0) * (fm + 4.0 * frm + fb);
        const Value sum = left + right;
        const Value err = sum - whole;
        if (depth > 0 && within(err, tol)) return sum + err / 15.0;
        if (depth >= max_depth)
            throw QuadratureError("adaptive Simpson did not converge within depth limit");
        const Tol half = tol / 2.0;
        return run(a, lm, m, fa, flm, fm, left, half, depth + 1) +
               run(m, rm, b, fm, frm, fb, right, half, depth + 1);
    }

    Value integrate(double a, double b, const Tol& tol) {
        const double m = 0.5 * (a + b);
        const Value fa = f(a);
        const Value fm = f(m);
        const Value fb = f(b);
        const Value whole = ((b - a) / 6.0) * (fa + 4.0 * fm + fb);
        return run(a, m, b, fa, fm, fb, whole, tol, 0);
    }
};

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
    if (a == b) return 0.0;
    SimpsonRec<double, double> rec{f, max_depth};
    return rec.integrate(a, b, tol);
}

Eigen::Vector3d adaptive_simpson3(const std::function<Eigen::Vector3d(double)>& f, double a,
                                  double b, const Eigen::Vector3d& tol, int max_depth) {
    if (a == b) return Eigen::Vector3d::Zero();
    SimpsonRec<Eigen::Vector3d, Eigen::Vector3d> rec{f, max_depth};
    return rec.integrate(a, b, tol);
}

}  // namespace rnf
