#include "rnfilter/network.hpp"

#include "rnfilter/numeric.hpp"

#include "oracles.hpp"
#include "testnets.hpp"

#include <doctest.h>

#include <random>

using namespace rnf;

namespace {

/// Independent propensity oracle: plain factorial products, no shared code
/// with ReactionNetwork::propensity.
double propensity_oracle(const Reaction& r, const Eigen::VectorXi& x, bool binomial) {
    double f = r.rate;
    for (const auto& [idx, nu] : r.reactants) {
        double g = 1.0;
        for (int t = 0; t < nu; ++t) g *= x[idx] - t;
        if (binomial) {
            double fact = 1.0;
            for (int t = 2; t <= nu; ++t) fact *= t;
            g /= fact;
        }
        f *= std::max(g, 0.0);
    }
    return f;
}

}  // namespace

TEST_CASE("bistable file parses to the expected network") {
    const ReactionNetwork net = testnets::bistable();
    CHECK(net.num_species() == 1);
    CHECK(net.num_reactions() == 4);
    CHECK(net.omega() == 100.0);

    Eigen::MatrixXi expected(1, 4);
    expected << 1, -1, 1, -1;
    CHECK(net.net_effect_matrix() == expected);

    // count-scale rates recovered from the concentration-scale file
    const Eigen::VectorXd k = net.rate_constants();
    CHECK(k[0] == doctest::Approx(2250.0).epsilon(1e-14));
    CHECK(k[1] == doctest::Approx(37.5).epsilon(1e-14));
    CHECK(k[2] == doctest::Approx(0.18).epsilon(1e-14));
    CHECK(k[3] == doctest::Approx(2.5e-4).epsilon(1e-14));
}

TEST_CASE("null reaction X -> X is legal and has a zero net-effect column") {
    const ReactionNetwork net = parse_network("species: X\nreaction r: X -> X @ 1.0");
    CHECK(net.num_reactions() == 1);
    CHECK(net.net_effect_matrix()(0, 0) == 0);
}

TEST_CASE("limit-cycle net effect matrix") {
    const ReactionNetwork net = testnets::limit_cycle();
    Eigen::MatrixXi expected(3, 5);
    expected << 1, -1, 0, -1, 0,
                0,  0, -1, 0, 1,
                0,  0,  0, 1, -1;
    CHECK(net.net_effect_matrix() == expected);
}

TEST_CASE("parser rejects malformed input with line/column positions") {
    SUBCASE("nonpositive rate") {
        CHECK_THROWS_AS(parse_network("species: X\nreaction r: 2 X -> 3 X @ -1"), ParseError);
    }
    SUBCASE("unknown species") {
        try {
            parse_network("species: X\nreaction r: Y -> 0 @ rate=1");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
            CHECK(e.column() > 1);
            CHECK(std::string(e.what()).find("unknown species") != std::string::npos);
        }
    }
    SUBCASE("syntax error") {
        try {
            parse_network("species: X\nreaction r: X -> 0 rate=1");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
        }
    }
    SUBCASE("reaction order above three") {
        CHECK_THROWS_AS(parse_network("species: X\nreaction r: 4 X -> 0 @ rate=1"), ParseError);
    }
    SUBCASE("rate_scaled without omega") {
        CHECK_THROWS_AS(parse_network("species: X\nreaction r: X -> 0 @ rate_scaled=1"),
                        ParseError);
    }
    SUBCASE("duplicate omega") {
        CHECK_THROWS_AS(parse_network("species: X\nomega: 1\nomega: 2\nreaction r: X -> 0 @ 1"),
                        ParseError);
    }
}

TEST_CASE("propensity values on the benchmark networks") {
    const ReactionNetwork bistable = testnets::bistable();

    Eigen::VectorXi x(1);
    x << 0;
    Eigen::VectorXd h = bistable.propensity(x);
    CHECK(h[0] == doctest::Approx(2250.0));
    CHECK(h[1] == 0.0);
    CHECK(h[2] == 0.0);
    CHECK(h[3] == 0.0);

    x << 2;
    h = bistable.propensity(x);
    CHECK(h[0] == doctest::Approx(2250.0));
    CHECK(h[1] == doctest::Approx(75.0));
    CHECK(h[2] == doctest::Approx(0.36));
    CHECK(h[3] == 0.0);

    const ReactionNetwork cycle = parse_network(
        "species: X1, X2, X3\n"
        "reaction r1: X1 -> 2 X1 @ rate=1\n"
        "reaction r2: X1 + X2 -> X2 @ rate=1\n"
        "reaction r3: X2 -> 0 @ rate=1\n"
        "reaction r4: X1 -> X3 @ rate=1\n"
        "reaction r5: X3 -> X2 @ rate=1\n");
    Eigen::VectorXi y(3);
    y << 1, 2, 3;
    const Eigen::VectorXd hc = cycle.propensity(y);
    CHECK(hc[0] == 1.0);
    CHECK(hc[1] == 2.0);
    CHECK(hc[2] == 2.0);
    CHECK(hc[3] == 1.0);
    CHECK(hc[4] == 3.0);

    Eigen::VectorXi neg(1);
    neg << -1;
    CHECK_THROWS_AS((void)bistable.propensity(neg), std::invalid_argument);
}

TEST_CASE("propensity is nonnegative and vanishes without enough reactants") {
    std::mt19937_64 rng(11);
    for (const auto& net : {testnets::bistable(), testnets::limit_cycle()}) {
        std::uniform_int_distribution<int> d(0, 6);
        for (int trial = 0; trial < 200; ++trial) {
            Eigen::VectorXi x(net.num_species());
            for (int i = 0; i < net.num_species(); ++i) x[i] = d(rng);
            const Eigen::VectorXd h = net.propensity(x);
            for (int j = 0; j < net.num_reactions(); ++j) {
                CHECK(h[j] >= 0.0);
                bool starved = false;
                for (const auto& [idx, nu] : net.reactions()[static_cast<size_t>(j)].reactants)
                    starved = starved || x[idx] < nu;
                if (starved) CHECK(h[j] == 0.0);
                CHECK(h[j] ==
                      doctest::Approx(propensity_oracle(net.reactions()[static_cast<size_t>(j)],
                                                        x, false))
                          .epsilon(1e-14));
            }
        }
    }
}

TEST_CASE("binomial convention divides by reactant factorials") {
    const ReactionNetwork net = parse_network(
        "species: X\nconvention: binomial\nreaction r: 3 X -> 2 X @ rate=6\n");
    Eigen::VectorXi x(1);
    x << 5;
    // 6 * C(5,3) = 60
    CHECK(net.propensity(x)[0] == 60.0);
}

TEST_CASE("propensity jacobian: bistable column and finite differences") {
    const ReactionNetwork net = testnets::bistable();
    const Eigen::VectorXd k = net.rate_constants();

    Eigen::VectorXd x(1);
    x << 1.0;
    const Eigen::MatrixXd J = net.propensity_jacobian(x);
    CHECK(J(0, 0) == 0.0);
    CHECK(J(1, 0) == doctest::Approx(k[1]).epsilon(1e-14));
    CHECK(J(2, 0) == doctest::Approx(k[2]).epsilon(1e-14));
    CHECK(J(3, 0) == doctest::Approx(-k[3]).epsilon(1e-14));

    // first-order networks have a constant jacobian
    const ReactionNetwork chain = testnets::linear_chain();
    Eigen::VectorXd a = Eigen::VectorXd::Constant(3, 1.3);
    Eigen::VectorXd b = Eigen::VectorXd::Constant(3, 4.2);
    CHECK(chain.propensity_jacobian(a).isApprox(chain.propensity_jacobian(b), 1e-14));

    // limit-cycle at the origin keeps only the linear coefficients
    const ReactionNetwork cycle = testnets::limit_cycle();
    const Eigen::MatrixXd J0 = cycle.propensity_jacobian(Eigen::VectorXd::Zero(3));
    const Eigen::VectorXd kc = cycle.rate_constants();
    CHECK(J0(0, 0) == doctest::Approx(kc[0]));
    CHECK(J0(1, 0) == 0.0);  // bilinear term has no constant derivative at 0
    CHECK(J0(1, 1) == 0.0);

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (const auto& net2 : {testnets::bistable(), testnets::limit_cycle()}) {
        for (int trial = 0; trial < 100; ++trial) {
            Eigen::VectorXd z(net2.num_species());
            for (int i = 0; i < net2.num_species(); ++i) z[i] = u(rng);
            const Eigen::MatrixXd jac = net2.propensity_jacobian(z);
            for (int j = 0; j < net2.num_reactions(); ++j) {
                for (int i = 0; i < net2.num_species(); ++i) {
                    const double fd = oracle::central_diff(
                        [&](const Eigen::VectorXd& p) { return net2.propensity_real(p)[j]; }, z,
                        i, 1e-6);
                    CHECK(jac(j, i) ==
                          doctest::Approx(fd).epsilon(1e-6).scale(std::abs(jac(j, i)) + 1.0));
                }
            }
        }
    }
}

TEST_CASE("rate constant rescaling") {
    const ReactionNetwork net = testnets::bistable();
    const Eigen::VectorXd k = net.rate_constants();
    const Eigen::VectorXd kt =
        rescale_rate_constants(net, k, RescaleDirection::CountToConcentration);
    CHECK(kt[0] == doctest::Approx(22.5).epsilon(1e-14));
    CHECK(kt[1] == doctest::Approx(37.5).epsilon(1e-14));
    CHECK(kt[2] == doctest::Approx(18.0).epsilon(1e-14));
    CHECK(kt[3] == doctest::Approx(2.5).epsilon(1e-14));

    const Eigen::VectorXd back =
        rescale_rate_constants(net, kt, RescaleDirection::ConcentrationToCount);
    for (int j = 0; j < 4; ++j) CHECK(back[j] == doctest::Approx(k[j]).epsilon(1e-12));

    // omega = 1 is the identity
    const ReactionNetwork id = testnets::immigration_death();
    const Eigen::VectorXd ki = id.rate_constants();
    CHECK(rescale_rate_constants(id, ki, RescaleDirection::CountToConcentration) == ki);

    // limit cycle: only the bimolecular rate changes
    const ReactionNetwork cycle = testnets::limit_cycle();
    const Eigen::VectorXd kc = cycle.rate_constants();
    const Eigen::VectorXd kct =
        rescale_rate_constants(cycle, kc, RescaleDirection::CountToConcentration);
    for (int j = 0; j < 5; ++j) {
        if (j == 1)
            CHECK(kct[j] == doctest::Approx(100.0 * kc[j]));
        else
            CHECK(kct[j] == kc[j]);
    }
}

TEST_CASE("rate equation right-hand side") {
    const ReactionNetwork cycle = testnets::limit_cycle();
    Eigen::VectorXd z(3);
    z << 2.1, 2.1, 2.1;
    CHECK(cycle.rate_equation_rhs(z).norm() < 1e-12);
    CHECK(cycle.rate_equation_rhs(Eigen::VectorXd::Zero(3)).norm() == 0.0);

    // bistable: cubic with zeros near 1.06, 2.10, 4.04
    const ReactionNetwork bistable = testnets::bistable();
    // rhs(z) = 22.5 - 37.5 z + 18 z^2 - 2.5 z^3
    const auto roots = real_cubic_roots(-2.5, 18.0, -37.5, 22.5);
    REQUIRE(roots.size() == 3);
    CHECK(std::abs(roots[0] - 1.06) < 0.01);
    CHECK(std::abs(roots[1] - 2.10) < 0.01);
    CHECK(std::abs(roots[2] - 4.04) < 0.01);
    for (double r : roots) {
        Eigen::VectorXd zr(1);
        zr << r;
        CHECK(std::abs(bistable.rate_equation_rhs(zr)[0]) < 1e-9);
    }
}

TEST_CASE("rate equation is the large-omega limit of the propensities") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    const double omega_big = 1e6;
    for (const auto& net : {testnets::bistable(), testnets::limit_cycle()}) {
        // same concentration-scale dynamics at a huge omega: rebuild the
        // count-scale rates from the original scaled constants
        const Eigen::VectorXd kt = rescale_rate_constants(
            net, net.rate_constants(), RescaleDirection::CountToConcentration);
        std::vector<Reaction> rescaled = net.reactions();
        for (size_t j = 0; j < rescaled.size(); ++j)
            rescaled[j].rate =
                kt[static_cast<int>(j)] / std::pow(omega_big, rescaled[j].order() - 1);
        const ReactionNetwork big(net.species(), rescaled, omega_big, net.convention());

        for (int trial = 0; trial < 30; ++trial) {
            Eigen::VectorXd z(net.num_species());
            for (int i = 0; i < net.num_species(); ++i) z[i] = u(rng);
            const Eigen::VectorXd lhs = big.rate_equation_rhs(z);
            const Eigen::VectorXd rhs = big.net_effect_matrix().cast<double>() *
                                        big.propensity_real(omega_big * z) / omega_big;
            for (int i = 0; i < net.num_species(); ++i)
                CHECK(lhs[i] ==
                      doctest::Approx(rhs[i]).epsilon(1e-4).scale(1.0 + std::abs(lhs[i])));
        }
    }
}

TEST_CASE("propensity polynomials expand exactly") {
    const ReactionNetwork bistable = testnets::bistable();
    const Eigen::VectorXd k = bistable.rate_constants();

    // k4 x(x-1)(x-2) = k4 (x^3 - 3x^2 + 2x)
    const auto& p4 = bistable.propensity_polynomials()[3];
    CHECK(p4.denom == 1);
    CHECK(p4.coeffs.at({1}) == 2);
    CHECK(p4.coeffs.at({2}) == -3);
    CHECK(p4.coeffs.at({3}) == 1);
    CHECK(p4.rate == k[3]);

    // bilinear term in the limit cycle: single cross monomial
    const ReactionNetwork cycle = testnets::limit_cycle();
    const auto& p2 = cycle.propensity_polynomials()[1];
    CHECK(p2.coeffs.size() == 1);
    CHECK(p2.coeffs.at({1, 1, 0}) == 1);

    // constant birth reaction
    const auto& p1 = bistable.propensity_polynomials()[0];
    CHECK(p1.coeffs.size() == 1);
    CHECK(p1.coeffs.at({0}) == 1);

    // integer-exact evaluation agrees with propensity() bit for bit
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> d(0, 12);
    for (const auto& net : {testnets::bistable(), testnets::limit_cycle()}) {
        for (int trial = 0; trial < 100; ++trial) {
            Eigen::VectorXi x(net.num_species());
            for (int i = 0; i < net.num_species(); ++i) x[i] = d(rng);
            const Eigen::VectorXd h = net.propensity(x);
            for (int j = 0; j < net.num_reactions(); ++j)
                CHECK(net.propensity_polynomials()[static_cast<size_t>(j)].eval_counts(x) ==
                      h[j]);
        }
    }
}

TEST_CASE("parse -> serialize -> parse preserves semantic content") {
    for (const char* text : {testnets::kBistable, testnets::kLimitCycle,
                             testnets::kImmigrationDeath, testnets::kLinearChain}) {
        const ReactionNetwork a = parse_network(text);
        const ReactionNetwork b = parse_network(serialize_network(a));
        CHECK(a.species() == b.species());
        CHECK(a.omega() == b.omega());
        CHECK(a.convention() == b.convention());
        REQUIRE(a.num_reactions() == b.num_reactions());
        for (int j = 0; j < a.num_reactions(); ++j) {
            const auto& ra = a.reactions()[static_cast<size_t>(j)];
            const auto& rb = b.reactions()[static_cast<size_t>(j)];
            CHECK(ra.reactants == rb.reactants);
            CHECK(ra.products == rb.products);
            CHECK(ra.rate == rb.rate);
        }
    }
}
