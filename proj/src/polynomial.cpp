#include "rnfilter/polynomial.hpp"

#include <numeric>
#include <stdexcept>

namespace rnf {

double ipow(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

Polynomial Polynomial::constant(int nvars, double c) {
    Polynomial p(nvars);
    p.add_term(Exponents(static_cast<size_t>(nvars), 0), c);
    return p;
}

Polynomial Polynomial::monomial(int nvars, Exponents expo, double c) {
    if (static_cast<int>(expo.size()) != nvars)
        throw std::invalid_argument("monomial: exponent vector has wrong length");
    Polynomial p(nvars);
    p.add_term(expo, c);
    return p;
}

int Polynomial::degree() const {
    int d = 0;
    for (const auto& [expo, coeff] : terms_)
        d = std::max(d, std::accumulate(expo.begin(), expo.end(), 0));
    return d;
}

void Polynomial::add_term(const Exponents& expo, double coeff) {
    if (static_cast<int>(expo.size()) != nvars_)
        throw std::invalid_argument("add_term: exponent vector has wrong length");
    auto it = terms_.find(expo);
    if (it == terms_.end()) {
        if (coeff != 0.0) terms_.emplace(expo, coeff);
    } else {
        it->second += coeff;
        if (it->second == 0.0) terms_.erase(it);
    }
}

double Polynomial::eval(const Eigen::VectorXd& x) const {
    if (x.size() != nvars_)
        throw std::invalid_argument("Polynomial::eval: wrong argument dimension");
    double acc = 0.0;
    for (const auto& [expo, coeff] : terms_) {
        double term = coeff;
        for (int i = 0; i < nvars_; ++i) term *= ipow(x[i], expo[static_cast<size_t>(i)]);
        acc += term;
    }
    return acc;
}

double Polynomial::eval1(double x) const {
    Eigen::VectorXd v(1);
    v[0] = x;
    return eval(v);
}

Polynomial Polynomial::derivative(int var) const {
    Polynomial d(nvars_);
    for (const auto& [expo, coeff] : terms_) {
        int e = expo[static_cast<size_t>(var)];
        if (e == 0) continue;
        Exponents de = expo;
        de[static_cast<size_t>(var)] = e - 1;
        d.add_term(de, coeff * e);
    }
    return d;
}

Polynomial Polynomial::scaled_vars(double s) const {
    Polynomial r(nvars_);
    for (const auto& [expo, coeff] : terms_) {
        int total = std::accumulate(expo.begin(), expo.end(), 0);
        r.add_term(expo, coeff * ipow(s, total));
    }
    return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& rhs) {
    if (rhs.nvars_ != nvars_)
        throw std::invalid_argument("Polynomial += : mismatched variable counts");
    for (const auto& [expo, coeff] : rhs.terms_) add_term(expo, coeff);
    return *this;
}

Polynomial& Polynomial::operator*=(double s) {
    if (s == 0.0) {
        terms_.clear();
        return *this;
    }
    for (auto& [expo, coeff] : terms_) coeff *= s;
    return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.nvars_ != b.nvars_)
        throw std::invalid_argument("Polynomial * : mismatched variable counts");
    Polynomial r(a.nvars_);
    for (const auto& [ea, ca] : a.terms_) {
        for (const auto& [eb, cb] : b.terms_) {
            Polynomial::Exponents e(ea.size());
            for (size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
            r.add_term(e, ca * cb);
        }
    }
    return r;
}

}  // namespace rnf
