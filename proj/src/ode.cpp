#include "rnfilter/ode.hpp"

#include <algorithm>
#include <cmath>

namespace rnf {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// Difference between the 5th- and embedded 4th-order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Stepper {
    const OdeRhs& rhs;
    Eigen::VectorXd k1, k2, k3, k4, k5, k6, k7, ytmp;

    explicit Stepper(const OdeRhs& f, Eigen::Index dim) : rhs(f) {
        for (auto* v : {&k1, &k2, &k3, &k4, &k5, &k6, &k7, &ytmp}) v->resize(dim);
    }

    void eval(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        rhs(t, y, dy);
        if (!dy.allFinite()) throw OdeError(OdeError::Kind::NonFinite, t, "non-finite derivative");
    }

    // One step from (t, y, k1 = f(t,y)); fills ynew and the error estimate.
    // k7 = f(t+h, ynew) on exit (FSAL).
    void step(double t, const Eigen::VectorXd& y, double h, Eigen::VectorXd& ynew,
              Eigen::VectorXd& err) {
        ytmp = y + h * (a21 * k1);
        eval(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        eval(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        eval(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        eval(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        eval(t + h, ytmp, k6);
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        eval(t + h, ynew, k7);
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    }
};

double error_norm(const Eigen::VectorXd& err, const Eigen::VectorXd& y0,
                  const Eigen::VectorXd& y1, const StepControl& ctrl) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double scale =
            ctrl.abs_tol + ctrl.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double q = err[i] / scale;
        acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(err.size(), 1)));
}

// Hairer-Norsett-Wanner starting step heuristic.
double initial_step(const OdeRhs& rhs, double t0, const Eigen::VectorXd& y0,
                    const Eigen::VectorXd& f0, double t1, const StepControl& ctrl) {
    auto scaled_norm = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& ref) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const double scale = ctrl.abs_tol + ctrl.rel_tol * std::abs(ref[i]);
            const double q = v[i] / scale;
            acc += q * q;
        }
        return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(v.size(), 1)));
    };
    const double d0 = scaled_norm(y0, y0);
    const double d1 = scaled_norm(f0, y0);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, t1 - t0);
    Eigen::VectorXd y1 = y0 + h0 * f0;
    Eigen::VectorXd f1(y0.size());
    rhs(t0 + h0, y1, f1);
    if (!f1.allFinite()) return std::max(1e-6, ctrl.h_min * 10);
    const double d2 = scaled_norm(f1 - f0, y0) / h0;
    const double dmax = std::max(d1, d2);
    double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    return std::min({100.0 * h0, h1, t1 - t0});
}

}  // namespace

Eigen::VectorXd integrate(const OdeRhs& rhs, const Eigen::VectorXd& y0, double t0, double t1,
                          const StepControl& ctrl, const std::vector<double>& out_grid,
                          DenseTrail* trail) {
    if (t1 < t0) throw std::invalid_argument("integrate: t1 < t0");
    if (trail) {
        trail->times.clear();
        trail->states.clear();
    }
    size_t grid_pos = 0;
    auto emit_upto = [&](double ta, double tb, const Eigen::VectorXd& ya,
                         const Eigen::VectorXd& yb, const Eigen::VectorXd& fa,
                         const Eigen::VectorXd& fb) {
        if (!trail) return;
        const double h = tb - ta;
        while (grid_pos < out_grid.size() && out_grid[grid_pos] <= tb + 1e-300) {
            const double tg = out_grid[grid_pos];
            if (tg < ta - 1e-12) throw std::invalid_argument("integrate: out_grid not sorted");
            double s = h > 0 ? (tg - ta) / h : 0.0;
            s = std::clamp(s, 0.0, 1.0);
            // Cubic Hermite basis on [ta, tb].
            const double s2 = s * s, s3 = s2 * s;
            const double h00 = 2 * s3 - 3 * s2 + 1;
            const double h10 = s3 - 2 * s2 + s;
            const double h01 = -2 * s3 + 3 * s2;
            const double h11 = s3 - s2;
            trail->times.push_back(tg);
            trail->states.push_back(h00 * ya + h10 * h * fa + h01 * yb + h11 * h * fb);
            ++grid_pos;
        }
    };

    Stepper st(rhs, y0.size());
    Eigen::VectorXd y = y0, ynew(y0.size()), err(y0.size());
    double t = t0;
    st.eval(t0, y0, st.k1);

    if (t1 == t0) {
        emit_upto(t0, t0, y, y, st.k1, st.k1);
        return y;
    }

    double h = ctrl.h_init > 0 ? std::min(ctrl.h_init, t1 - t0)
                               : initial_step(rhs, t0, y0, st.k1, t1, ctrl);
    h = std::max(h, ctrl.h_min);
    double err_prev = 1.0;
    bool rejected = false;

    for (long steps = 0;; ++steps) {
        if (steps >= ctrl.max_steps)
            throw OdeError(OdeError::Kind::MaxSteps, t, "integrate: max step count exceeded");
        const bool last = t + h >= t1 - 1e-14 * std::max(1.0, std::abs(t1));
        if (last) h = t1 - t;
        if (h < ctrl.h_min && !last)
            throw OdeError(OdeError::Kind::StepUnderflow, t, "integrate: step size underflow");

        st.step(t, y, h, ynew, err);
        const double en = error_norm(err, y, ynew, ctrl);

        if (en <= 1.0) {
            emit_upto(t, t + h, y, ynew, st.k1, st.k7);
            t += h;
            y.swap(ynew);
            st.k1.swap(st.k7);  // FSAL
            if (t >= t1 - 1e-14 * std::max(1.0, std::abs(t1))) break;
            const double en_clipped = std::max(en, 1e-10);
            double fac = 0.9 * std::pow(en_clipped, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
            fac = std::clamp(fac, 0.2, rejected ? 1.0 : 5.0);
            h = std::max(h * fac, ctrl.h_min);
            err_prev = en_clipped;
            rejected = false;
        } else {
            double fac = std::max(0.9 * std::pow(en, -0.2), 0.1);
            h *= fac;
            if (h < ctrl.h_min)
                throw OdeError(OdeError::Kind::StepUnderflow, t,
                               "integrate: step size underflow after rejection");
            rejected = true;
        }
    }
    // Grid points that land on t1 can miss the last step's window by one
    // rounding; flush them with the final state.
    if (trail) {
        while (grid_pos < out_grid.size()) {
            const double tg = out_grid[grid_pos];
            if (tg > t1 + 1e-9 * std::max(1.0, std::abs(t1)))
                throw std::invalid_argument("integrate: out_grid point beyond t1");
            trail->times.push_back(tg);
            trail->states.push_back(y);
            ++grid_pos;
        }
    }
    return y;
}

Eigen::VectorXd integrate_fixed_step(const OdeRhs& rhs, const Eigen::VectorXd& y0, double t0,
                                     double t1, double h) {
    if (!(h > 0)) throw std::invalid_argument("integrate_fixed_step: h must be positive");
    Stepper st(rhs, y0.size());
    Eigen::VectorXd y = y0, ynew(y0.size()), err(y0.size());
    double t = t0;
    st.eval(t0, y, st.k1);
    while (t < t1 - 1e-14 * std::max(1.0, std::abs(t1))) {
        const double hs = std::min(h, t1 - t);
        st.step(t, y, hs, ynew, err);
        t += hs;
        y.swap(ynew);
        st.k1.swap(st.k7);
    }
    return y;
}

}  // namespace rnf
