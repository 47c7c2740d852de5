#include "rnfilter/ode.hpp"

#include "testnets.hpp"

#include <doctest.h>

#include <cmath>

using namespace rnf;

namespace {

const OdeRhs decay = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy = -y; };

Eigen::VectorXd one(double v) {
    Eigen::VectorXd y(1);
    y << v;
    return y;
}

}  // namespace

TEST_CASE("exponential decay hits the closed form") {
    const Eigen::VectorXd y1 = integrate(decay, one(1.0), 0.0, 1.0);
    CHECK(std::abs(y1[0] - std::exp(-1.0)) < 1e-8);
}

TEST_CASE("zero right-hand side returns the initial state exactly") {
    const OdeRhs zero = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        dy = Eigen::VectorXd::Zero(y.size());
    };
    const Eigen::VectorXd y1 = integrate(zero, one(3.25), 0.0, 7.0);
    CHECK(y1[0] == 3.25);
}

TEST_CASE("dense trail matches the closed form between steps") {
    std::vector<double> grid;
    for (int k = 0; k <= 100; ++k) grid.push_back(0.01 * k);
    DenseTrail trail;
    integrate(decay, one(1.0), 0.0, 1.0, StepControl{}, grid, &trail);
    REQUIRE(trail.times.size() == grid.size());
    for (size_t k = 0; k < grid.size(); ++k)
        CHECK(std::abs(trail.states[k][0] - std::exp(-grid[k])) < 1e-7);
}

TEST_CASE("fixed-step global error scales like h^5") {
    const double h = 0.05;
    const double exact = std::exp(-1.0);
    const double e1 = std::abs(integrate_fixed_step(decay, one(1.0), 0.0, 1.0, h)[0] - exact);
    const double e2 =
        std::abs(integrate_fixed_step(decay, one(1.0), 0.0, 1.0, h / 2)[0] - exact);
    const double ratio = e1 / e2;
    CHECK(ratio > 24.0);
    CHECK(ratio < 40.0);
}

TEST_CASE("halving tolerances moves the endpoint by less than the coarse tolerance") {
    const ReactionNetwork net = testnets::limit_cycle();
    const OdeRhs rhs = [&](double, const Eigen::VectorXd& z, Eigen::VectorXd& dz) {
        dz = net.rate_equation_rhs(z);
    };
    Eigen::VectorXd z0(3);
    z0 << 1.0, 1.0, 1.0;
    StepControl coarse;
    coarse.abs_tol = coarse.rel_tol = 1e-8;
    StepControl fine;
    fine.abs_tol = fine.rel_tol = 5e-9;
    const Eigen::VectorXd a = integrate(rhs, z0, 0.0, 10.0, coarse);
    const Eigen::VectorXd b = integrate(rhs, z0, 0.0, 10.0, fine);
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(a[i] - b[i]) < coarse.abs_tol + coarse.rel_tol * std::abs(a[i]));
}

TEST_CASE("integration is bit-deterministic") {
    const ReactionNetwork net = testnets::limit_cycle();
    const OdeRhs rhs = [&](double, const Eigen::VectorXd& z, Eigen::VectorXd& dz) {
        dz = net.rate_equation_rhs(z);
    };
    Eigen::VectorXd z0(3);
    z0 << 1.0, 2.0, 3.0;
    const Eigen::VectorXd a = integrate(rhs, z0, 0.0, 5.0);
    const Eigen::VectorXd b = integrate(rhs, z0, 0.0, 5.0);
    CHECK(a == b);
}

TEST_CASE("perturbed limit-cycle start approaches a closed orbit") {
    const ReactionNetwork net = testnets::limit_cycle();
    const OdeRhs rhs = [&](double, const Eigen::VectorXd& z, Eigen::VectorXd& dz) {
        dz = net.rate_equation_rhs(z);
    };
    Eigen::VectorXd z0(3);
    z0 << 2.1 + 1e-6, 2.1, 2.1;

    std::vector<double> grid;
    for (int k = 0; k <= 3000; ++k) grid.push_back(0.01 * k);
    DenseTrail trail;
    integrate(rhs, z0, 0.0, 30.0, StepControl{}, grid, &trail);

    // Upward crossings of the plane z1 = 2.1.
    std::vector<Eigen::Vector3d> crossings;
    for (size_t k = 1; k < trail.times.size(); ++k) {
        const double a = trail.states[k - 1][0] - 2.1;
        const double b = trail.states[k][0] - 2.1;
        if (a < 0.0 && b >= 0.0) {
            const double w = -a / (b - a);
            crossings.push_back(((1.0 - w) * trail.states[k - 1] + w * trail.states[k]));
        }
    }
    REQUIRE(crossings.size() >= 3);
    const auto& c1 = crossings[crossings.size() - 2];
    const auto& c2 = crossings[crossings.size() - 1];
    CHECK((c2 - c1).norm() < 1e-3);
}

TEST_CASE("failure modes raise OdeError") {
    SUBCASE("non-finite derivative") {
        const OdeRhs bad = [](double, const Eigen::VectorXd&, Eigen::VectorXd& dy) {
            dy = Eigen::VectorXd::Constant(1, std::nan(""));
        };
        CHECK_THROWS_AS((void)integrate(bad, one(1.0), 0.0, 1.0), OdeError);
    }
    SUBCASE("step budget exceeded") {
        StepControl ctrl;
        ctrl.max_steps = 3;
        CHECK_THROWS_AS((void)integrate(decay, one(1.0), 0.0, 1e6, ctrl), OdeError);
    }
    SUBCASE("finite-time blow-up underflows the step size") {
        const OdeRhs blowup = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
            dy = y.array().square();
        };
        CHECK_THROWS_AS((void)integrate(blowup, one(1.0), 0.0, 2.0), OdeError);
    }
}
