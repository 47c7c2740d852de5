#pragma once

#include <Eigen/Core>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rnf {

struct StepControl {
    double abs_tol = 1e-8;
    double rel_tol = 1e-8;
    double h_init = 0.0;  // 0 selects the step automatically
    double h_min = 1e-12;
    long max_steps = 10'000'000;
};

/// Solution samples on a caller-supplied output grid.
struct DenseTrail {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
};

class OdeError : public std::runtime_error {
public:
    enum class Kind { StepUnderflow, MaxSteps, NonFinite };

    OdeError(Kind kind, double t, const std::string& what)
        : std::runtime_error(what), kind_(kind), t_(t) {}
    Kind kind() const { return kind_; }
    double time() const { return t_; }

private:
    Kind kind_;
    double t_;
};

using OdeRhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy)>;

/// Adaptive Dormand-Prince 4(5) pair with PI step-size control. The local
/// error per step is held below abs_tol + rel_tol*|y| componentwise (RMS
/// norm); dense output on out_grid uses cubic Hermite interpolation across
/// accepted steps. Deterministic: identical inputs give identical outputs.
///
/// out_grid times must be nondecreasing and inside [t0, t1]; the trail
/// contains one state per grid time. Throws OdeError on step underflow
/// (h < h_min), step-count overrun, or a non-finite derivative.
Eigen::VectorXd integrate(const OdeRhs& rhs, const Eigen::VectorXd& y0, double t0, double t1,
                          const StepControl& ctrl, const std::vector<double>& out_grid,
                          DenseTrail* trail);

inline Eigen::VectorXd integrate(const OdeRhs& rhs, const Eigen::VectorXd& y0, double t0,
                                 double t1, const StepControl& ctrl = {}) {
    return integrate(rhs, y0, t0, t1, ctrl, {}, nullptr);
}

/// Same tableau driven at a fixed step (no error control); the final partial
/// step is shortened to land on t1. Used for order-of-accuracy checks.
Eigen::VectorXd integrate_fixed_step(const OdeRhs& rhs, const Eigen::VectorXd& y0, double t0,
                                     double t1, double h);

}  // namespace rnf
