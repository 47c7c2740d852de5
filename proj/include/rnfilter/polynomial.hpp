#pragma once

#include <Eigen/Core>

#include <map>
#include <vector>

namespace rnf {

/// Sparse multivariate polynomial with real coefficients, keyed by exponent
/// vectors. Terms live in a std::map, so iteration (and hence evaluation)
/// order is the lexicographic order on exponents and is deterministic.
class Polynomial {
public:
    using Exponents = std::vector<int>;

    Polynomial() = default;
    explicit Polynomial(int nvars) : nvars_(nvars) {}

    static Polynomial constant(int nvars, double c);
    static Polynomial monomial(int nvars, Exponents expo, double c);

    int nvars() const { return nvars_; }
    bool empty() const { return terms_.empty(); }
    int degree() const;

    /// Adds coeff * x^expo, coalescing with an existing term if present.
    void add_term(const Exponents& expo, double coeff);

    double eval(const Eigen::VectorXd& x) const;
    double eval1(double x) const;  // univariate shorthand

    Polynomial derivative(int var) const;

    /// Substitutes x_i -> s * x_i for every variable.
    Polynomial scaled_vars(double s) const;

    Polynomial& operator+=(const Polynomial& rhs);
    Polynomial& operator*=(double s);

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator+(Polynomial a, const Polynomial& b) {
        a += b;
        return a;
    }
    friend Polynomial operator*(Polynomial a, double s) {
        a *= s;
        return a;
    }
    friend Polynomial operator*(double s, Polynomial a) {
        a *= s;
        return a;
    }

    const std::map<Exponents, double>& terms() const { return terms_; }

private:
    int nvars_ = 0;
    std::map<Exponents, double> terms_;
};

/// x^e by repeated multiplication; exact for small integer arguments.
double ipow(double x, int e);

}  // namespace rnf
