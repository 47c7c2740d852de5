#pragma once

#include <Eigen/Core>

#include <functional>
#include <stdexcept>
#include <vector>

namespace rnf {

class QuadratureError : public std::runtime_error {
public:
    explicit QuadratureError(const std::string& what) : std::runtime_error(what) {}
};

/// Real roots of a*x^3 + b*x^2 + c*x + d = 0, ascending. Falls back to the
/// quadratic/linear case when leading coefficients vanish. Roots are taken
/// from the companion-matrix eigenvalues; complex pairs are discarded.
std::vector<double> real_cubic_roots(double a, double b, double c, double d);

/// Adaptive Simpson with Richardson extrapolation. The vector form
/// integrates three integrands that share evaluation points; each component
/// is converged to its own absolute tolerance. Throws QuadratureError past
/// max_depth.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 45);
Eigen::Vector3d adaptive_simpson3(const std::function<Eigen::Vector3d(double)>& f, double a,
                                  double b, const Eigen::Vector3d& tol, int max_depth = 45);

}  // namespace rnf
