#pragma once

#include "rnfilter/polynomial.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace rnf {

/// Mass-action propensity convention. FallingFactorial gives
/// h_j(x) = k_j * prod_i x_i (x_i - 1) ... (x_i - nu_ij + 1); Binomial
/// divides each factor by nu_ij!.
enum class PropensityConvention { FallingFactorial, Binomial };

enum class RescaleDirection { CountToConcentration, ConcentrationToCount };

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line, int col);
    int line() const { return line_; }
    int column() const { return col_; }

private:
    int line_;
    int col_;
};

struct Reaction {
    std::string label;
    std::map<int, int> reactants;  // species index -> stoichiometric coefficient
    std::map<int, int> products;
    double rate = 0.0;  // count-scale rate constant

    int order() const;
};

/// Expanded propensity kept in integer-exact form:
///   h_j(x) = rate * (sum of integer-coefficient monomials)(x) / denom.
/// denom is 1 for the falling-factorial convention and the product of
/// reactant-coefficient factorials for the binomial one; the monomial sum
/// evaluated at integer states is always divisible by denom.
struct PropensityPolynomial {
    double rate = 0.0;
    std::int64_t denom = 1;
    std::map<std::vector<int>, std::int64_t> coeffs;

    /// Exact evaluation at an integer state (int64 accumulation).
    double eval_counts(const Eigen::VectorXi& x) const;

    /// Double-coefficient view (rate * coeff / denom per term).
    Polynomial as_polynomial(int nvars) const;
};

/// A chemical reaction network: species, reactions with mass-action
/// propensities, and the concentration scale factor omega. Immutable after
/// construction; safe to share across threads.
class ReactionNetwork {
public:
    ReactionNetwork(std::vector<std::string> species, std::vector<Reaction> reactions,
                    double omega,
                    PropensityConvention convention = PropensityConvention::FallingFactorial);

    int num_species() const { return static_cast<int>(species_.size()); }
    int num_reactions() const { return static_cast<int>(reactions_.size()); }
    const std::vector<std::string>& species() const { return species_; }
    const std::vector<Reaction>& reactions() const { return reactions_; }
    double omega() const { return omega_; }
    PropensityConvention convention() const { return convention_; }

    /// n x m matrix of per-reaction state changes (products - reactants).
    const Eigen::MatrixXi& net_effect_matrix() const { return net_effect_; }

    Eigen::VectorXd rate_constants() const;

    /// Mass-action propensities at an integer state; exact combinatorial
    /// evaluation, zero whenever some x_i < nu_ij. Throws on negative x.
    Eigen::VectorXd propensity(const Eigen::VectorXi& x) const;

    /// Polynomial extension of the propensities to real arguments.
    Eigen::VectorXd propensity_real(const Eigen::VectorXd& x) const;

    /// m x n matrix of exact partial derivatives of the polynomial extension.
    Eigen::MatrixXd propensity_jacobian(const Eigen::VectorXd& x) const;

    /// Right-hand side A * h~(z) of the deterministic rate equation, where
    /// h~ is the concentration-scale propensity (falling factorials
    /// degenerate to plain powers, rates rescaled by omega).
    Eigen::VectorXd rate_equation_rhs(const Eigen::VectorXd& z) const;

    const std::vector<PropensityPolynomial>& propensity_polynomials() const {
        return exact_polys_;
    }
    /// Count-scale propensities as double-coefficient polynomials in x.
    const std::vector<Polynomial>& propensity_polys() const { return polys_; }
    /// Concentration-scale propensities h~ as polynomials in z.
    const std::vector<Polynomial>& concentration_polys() const { return conc_polys_; }

private:
    std::vector<std::string> species_;
    std::vector<Reaction> reactions_;
    double omega_;
    PropensityConvention convention_;

    Eigen::MatrixXi net_effect_;
    std::vector<PropensityPolynomial> exact_polys_;
    std::vector<Polynomial> polys_;
    std::vector<std::vector<Polynomial>> jac_polys_;  // [reaction][species]
    std::vector<Polynomial> conc_polys_;
};

/// k~_j = omega^(sum_i nu_ij - 1) * k_j, or its inverse. The round trip is
/// the identity up to floating-point rounding.
Eigen::VectorXd rescale_rate_constants(const ReactionNetwork& net, const Eigen::VectorXd& k,
                                       RescaleDirection direction);

ReactionNetwork parse_network(const std::string& text);
ReactionNetwork parse_network_file(const std::string& path);
std::string serialize_network(const ReactionNetwork& net);

}  // namespace rnf
