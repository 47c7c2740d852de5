#include "rnfilter/network.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rnf {

namespace {

std::int64_t factorial64(int n) {
    std::int64_t f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

/// Univariate falling factorial x(x-1)...(x-nu+1) as integer coefficients,
/// keyed by exponent.
std::map<int, std::int64_t> falling_factorial_coeffs(int nu) {
    std::map<int, std::int64_t> poly{{0, 1}};
    for (int t = 0; t < nu; ++t) {
        std::map<int, std::int64_t> next;
        for (const auto& [e, c] : poly) {
            next[e + 1] += c;
            if (t != 0) next[e] -= c * t;
        }
        poly = std::move(next);
    }
    return poly;
}

std::int64_t ipow64(std::int64_t x, int e) {
    std::int64_t r = 1;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

}  // namespace

ParseError::ParseError(const std::string& what, int line, int col)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(col) +
                         ": " + what),
      line_(line),
      col_(col) {}

int Reaction::order() const {
    int s = 0;
    for (const auto& [idx, nu] : reactants) s += nu;
    return s;
}

double PropensityPolynomial::eval_counts(const Eigen::VectorXi& x) const {
    std::int64_t acc = 0;
    for (const auto& [expo, c] : coeffs) {
        std::int64_t term = c;
        for (size_t i = 0; i < expo.size(); ++i)
            term *= ipow64(x[static_cast<Eigen::Index>(i)], expo[i]);
        acc += term;
    }
    return rate * static_cast<double>(acc / denom);
}

Polynomial PropensityPolynomial::as_polynomial(int nvars) const {
    Polynomial p(nvars);
    for (const auto& [expo, c] : coeffs)
        p.add_term(expo, rate * static_cast<double>(c) / static_cast<double>(denom));
    return p;
}

ReactionNetwork::ReactionNetwork(std::vector<std::string> species, std::vector<Reaction> reactions,
                                 double omega, PropensityConvention convention)
    : species_(std::move(species)),
      reactions_(std::move(reactions)),
      omega_(omega),
      convention_(convention) {
    const int n = num_species();
    const int m = num_reactions();
    if (n < 1) throw std::invalid_argument("network needs at least one species");
    if (m < 1) throw std::invalid_argument("network needs at least one reaction");
    if (!(omega_ > 0.0)) throw std::invalid_argument("omega must be positive");

    for (const auto& r : reactions_) {
        auto check_side = [&](const std::map<int, int>& side) {
            for (const auto& [idx, nu] : side) {
                if (idx < 0 || idx >= n)
                    throw std::invalid_argument("reaction references unknown species index");
                if (nu < 0) throw std::invalid_argument("stoichiometric coefficients must be >= 0");
            }
        };
        check_side(r.reactants);
        check_side(r.products);
        if (r.order() > 3)
            throw std::invalid_argument("reaction order > 3 is not supported (reaction " +
                                        r.label + ")");
        if (r.rate < 0.0 || !std::isfinite(r.rate))
            throw std::invalid_argument("rate constant must be finite and >= 0");
    }

    net_effect_ = Eigen::MatrixXi::Zero(n, m);
    for (int j = 0; j < m; ++j) {
        for (const auto& [idx, nu] : reactions_[static_cast<size_t>(j)].products)
            net_effect_(idx, j) += nu;
        for (const auto& [idx, nu] : reactions_[static_cast<size_t>(j)].reactants)
            net_effect_(idx, j) -= nu;
    }

    // Expand each propensity once; everything downstream reads the cache.
    exact_polys_.reserve(static_cast<size_t>(m));
    for (const auto& r : reactions_) {
        PropensityPolynomial pp;
        pp.rate = r.rate;
        pp.denom = 1;
        pp.coeffs[std::vector<int>(static_cast<size_t>(n), 0)] = 1;
        for (const auto& [idx, nu] : r.reactants) {
            if (nu == 0) continue;
            if (convention_ == PropensityConvention::Binomial) pp.denom *= factorial64(nu);
            auto factor = falling_factorial_coeffs(nu);
            std::map<std::vector<int>, std::int64_t> next;
            for (const auto& [expo, c] : pp.coeffs) {
                for (const auto& [e1, c1] : factor) {
                    auto ne = expo;
                    ne[static_cast<size_t>(idx)] += e1;
                    next[ne] += c * c1;
                }
            }
            pp.coeffs = std::move(next);
        }
        exact_polys_.push_back(std::move(pp));
    }

    polys_.reserve(static_cast<size_t>(m));
    jac_polys_.reserve(static_cast<size_t>(m));
    for (const auto& pp : exact_polys_) {
        Polynomial p = pp.as_polynomial(n);
        std::vector<Polynomial> row;
        row.reserve(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) row.push_back(p.derivative(i));
        polys_.push_back(std::move(p));
        jac_polys_.push_back(std::move(row));
    }

    const Eigen::VectorXd ktilde =
        rescale_rate_constants(*this, rate_constants(), RescaleDirection::CountToConcentration);
    conc_polys_.reserve(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) {
        const auto& r = reactions_[static_cast<size_t>(j)];
        std::vector<int> expo(static_cast<size_t>(n), 0);
        double denom = 1.0;
        for (const auto& [idx, nu] : r.reactants) {
            expo[static_cast<size_t>(idx)] = nu;
            if (convention_ == PropensityConvention::Binomial)
                denom *= static_cast<double>(factorial64(nu));
        }
        conc_polys_.push_back(Polynomial::monomial(n, expo, ktilde[j] / denom));
    }
}

Eigen::VectorXd ReactionNetwork::rate_constants() const {
    Eigen::VectorXd k(num_reactions());
    for (int j = 0; j < num_reactions(); ++j) k[j] = reactions_[static_cast<size_t>(j)].rate;
    return k;
}

Eigen::VectorXd ReactionNetwork::propensity(const Eigen::VectorXi& x) const {
    const int n = num_species();
    const int m = num_reactions();
    if (x.size() != n) throw std::invalid_argument("propensity: state has wrong dimension");
    for (int i = 0; i < n; ++i)
        if (x[i] < 0) throw std::invalid_argument("propensity: negative state component");

    Eigen::VectorXd h(m);
    for (int j = 0; j < m; ++j) {
        const auto& r = reactions_[static_cast<size_t>(j)];
        std::int64_t f = 1;
        for (const auto& [idx, nu] : r.reactants) {
            std::int64_t g = 1;
            for (int t = 0; t < nu; ++t) g *= static_cast<std::int64_t>(x[idx]) - t;
            if (g <= 0) {
                f = 0;
                break;
            }
            if (convention_ == PropensityConvention::Binomial) g /= factorial64(nu);
            f *= g;
        }
        h[j] = r.rate * static_cast<double>(f);
    }
    return h;
}

Eigen::VectorXd ReactionNetwork::propensity_real(const Eigen::VectorXd& x) const {
    const int m = num_reactions();
    if (x.size() != num_species())
        throw std::invalid_argument("propensity_real: state has wrong dimension");
    Eigen::VectorXd h(m);
    for (int j = 0; j < m; ++j) {
        const auto& r = reactions_[static_cast<size_t>(j)];
        double f = r.rate;
        for (const auto& [idx, nu] : r.reactants) {
            for (int t = 0; t < nu; ++t) f *= x[idx] - t;
            if (convention_ == PropensityConvention::Binomial)
                f /= static_cast<double>(factorial64(nu));
        }
        h[j] = f;
    }
    return h;
}

Eigen::MatrixXd ReactionNetwork::propensity_jacobian(const Eigen::VectorXd& x) const {
    const int n = num_species();
    const int m = num_reactions();
    Eigen::MatrixXd J(m, n);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < n; ++i)
            J(j, i) = jac_polys_[static_cast<size_t>(j)][static_cast<size_t>(i)].eval(x);
    return J;
}

Eigen::VectorXd ReactionNetwork::rate_equation_rhs(const Eigen::VectorXd& z) const {
    const int m = num_reactions();
    Eigen::VectorXd ht(m);
    for (int j = 0; j < m; ++j) ht[j] = conc_polys_[static_cast<size_t>(j)].eval(z);
    return net_effect_.cast<double>() * ht;
}

Eigen::VectorXd rescale_rate_constants(const ReactionNetwork& net, const Eigen::VectorXd& k,
                                       RescaleDirection direction) {
    if (k.size() != net.num_reactions())
        throw std::invalid_argument("rescale_rate_constants: wrong vector length");
    Eigen::VectorXd out(k.size());
    for (int j = 0; j < net.num_reactions(); ++j) {
        const int order = net.reactions()[static_cast<size_t>(j)].order();
        const double factor = std::pow(net.omega(), order - 1);
        out[j] = direction == RescaleDirection::CountToConcentration ? k[j] * factor
                                                                     : k[j] / factor;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

struct LineScanner {
    const std::string& s;
    int line_no;
    size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, line_no, static_cast<int>(pos) + 1);
    }
    void skip_ws() {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    }
    bool at_end() {
        skip_ws();
        return pos >= s.size();
    }
    bool try_consume(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    void expect(char c, const std::string& what) {
        if (!try_consume(c)) fail("expected '" + std::string(1, c) + "' " + what);
    }
    bool try_consume_word(const std::string& w) {
        skip_ws();
        if (s.compare(pos, w.size(), w) == 0) {
            size_t after = pos + w.size();
            if (after >= s.size() || !(std::isalnum(static_cast<unsigned char>(s[after])) ||
                                       s[after] == '_')) {
                pos = after;
                return true;
            }
        }
        return false;
    }
    std::string identifier() {
        skip_ws();
        size_t start = pos;
        if (pos < s.size() &&
            (std::isalpha(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) {
            ++pos;
            while (pos < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
                ++pos;
        }
        if (pos == start) fail("expected an identifier");
        return s.substr(start, pos - start);
    }
    bool peek_digit() {
        skip_ws();
        return pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]));
    }
    long integer() {
        skip_ws();
        size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos == start) fail("expected an integer");
        return std::stol(s.substr(start, pos - start));
    }
    double real() {
        skip_ws();
        const char* begin = s.c_str() + pos;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) fail("expected a number");
        pos += static_cast<size_t>(end - begin);
        return v;
    }
};

struct PendingReaction {
    Reaction reaction;
    bool scaled = false;
    double raw_rate = 0.0;
    int line_no = 0;
    int rate_col = 0;
};

std::map<int, int> parse_side(LineScanner& sc, const std::map<std::string, int>& species_index) {
    std::map<int, int> side;
    sc.skip_ws();
    // A bare "0" denotes the empty side.
    if (sc.pos < sc.s.size() && sc.s[sc.pos] == '0') {
        size_t after = sc.pos + 1;
        bool lone = after >= sc.s.size() ||
                    !(std::isalnum(static_cast<unsigned char>(sc.s[after])) || sc.s[after] == '_');
        if (lone) {
            sc.pos = after;
            return side;
        }
    }
    while (true) {
        int coeff = 1;
        if (sc.peek_digit()) {
            coeff = static_cast<int>(sc.integer());
            if (coeff <= 0) sc.fail("stoichiometric coefficient must be positive");
        }
        sc.skip_ws();
        size_t name_col = sc.pos;
        std::string name = sc.identifier();
        auto it = species_index.find(name);
        if (it == species_index.end()) {
            sc.pos = name_col;
            sc.fail("unknown species '" + name + "'");
        }
        side[it->second] += coeff;
        if (!sc.try_consume('+')) break;
    }
    return side;
}

}  // namespace

ReactionNetwork parse_network(const std::string& text) {
    std::vector<std::string> raw_lines;
    {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) raw_lines.push_back(line);
    }
    auto strip_comment = [](std::string l) {
        size_t h = l.find('#');
        if (h != std::string::npos) l.erase(h);
        return l;
    };

    std::vector<std::string> species;
    std::map<std::string, int> species_index;
    double omega = 1.0;
    bool omega_declared = false;
    PropensityConvention convention = PropensityConvention::FallingFactorial;
    std::vector<std::pair<int, std::string>> reaction_lines;

    for (size_t li = 0; li < raw_lines.size(); ++li) {
        std::string l = strip_comment(raw_lines[li]);
        LineScanner sc{l, static_cast<int>(li) + 1};
        if (sc.at_end()) continue;
        if (sc.try_consume_word("species")) {
            sc.expect(':', "after 'species'");
            while (true) {
                std::string name = sc.identifier();
                if (species_index.count(name)) sc.fail("duplicate species '" + name + "'");
                species_index[name] = static_cast<int>(species.size());
                species.push_back(name);
                if (!sc.try_consume(',')) break;
            }
            if (!sc.at_end()) sc.fail("trailing input after species list");
        } else if (sc.try_consume_word("omega")) {
            sc.expect(':', "after 'omega'");
            double v = sc.real();
            if (!(v > 0.0)) sc.fail("omega must be positive");
            if (omega_declared) sc.fail("omega declared twice");
            omega = v;
            omega_declared = true;
            if (!sc.at_end()) sc.fail("trailing input after omega");
        } else if (sc.try_consume_word("convention")) {
            sc.expect(':', "after 'convention'");
            if (sc.try_consume_word("falling"))
                convention = PropensityConvention::FallingFactorial;
            else if (sc.try_consume_word("binomial"))
                convention = PropensityConvention::Binomial;
            else
                sc.fail("convention must be 'falling' or 'binomial'");
            if (!sc.at_end()) sc.fail("trailing input after convention");
        } else if (sc.try_consume_word("reaction")) {
            reaction_lines.emplace_back(static_cast<int>(li) + 1, l);
        } else {
            sc.fail("expected 'species', 'omega', 'convention' or 'reaction'");
        }
    }

    std::vector<PendingReaction> pending;
    for (const auto& [line_no, l] : reaction_lines) {
        LineScanner sc{l, line_no};
        sc.try_consume_word("reaction");
        PendingReaction pr;
        pr.line_no = line_no;
        pr.reaction.label = sc.identifier();
        sc.expect(':', "after reaction label");
        pr.reaction.reactants = parse_side(sc, species_index);
        sc.skip_ws();
        if (sc.s.compare(sc.pos, 2, "->") != 0) sc.fail("expected '->'");
        sc.pos += 2;
        pr.reaction.products = parse_side(sc, species_index);
        sc.expect('@', "before the rate");
        sc.skip_ws();
        pr.rate_col = static_cast<int>(sc.pos) + 1;
        if (sc.try_consume_word("rate_scaled")) {
            sc.expect('=', "after 'rate_scaled'");
            pr.scaled = true;
            pr.raw_rate = sc.real();
        } else if (sc.try_consume_word("rate")) {
            sc.expect('=', "after 'rate'");
            pr.raw_rate = sc.real();
        } else {
            pr.raw_rate = sc.real();
        }
        if (!(pr.raw_rate > 0.0))
            throw ParseError("rate must be positive", line_no, pr.rate_col);
        if (!sc.at_end()) sc.fail("trailing input after rate");
        if (pr.reaction.order() > 3)
            throw ParseError("reaction order > 3 is not supported", line_no, 1);
        pending.push_back(std::move(pr));
    }

    if (species.empty()) throw ParseError("no species declared", 1, 1);
    if (pending.empty()) throw ParseError("no reactions declared", 1, 1);

    std::vector<Reaction> reactions;
    reactions.reserve(pending.size());
    for (auto& pr : pending) {
        if (pr.scaled) {
            if (!omega_declared)
                throw ParseError("rate_scaled requires an omega declaration", pr.line_no,
                                 pr.rate_col);
            pr.reaction.rate = pr.raw_rate / std::pow(omega, pr.reaction.order() - 1);
        } else {
            pr.reaction.rate = pr.raw_rate;
        }
        reactions.push_back(std::move(pr.reaction));
    }

    return ReactionNetwork(std::move(species), std::move(reactions), omega, convention);
}

ReactionNetwork parse_network_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open network file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_network(buf.str());
}

std::string serialize_network(const ReactionNetwork& net) {
    std::ostringstream out;
    out << "species: ";
    for (int i = 0; i < net.num_species(); ++i) {
        if (i) out << ", ";
        out << net.species()[static_cast<size_t>(i)];
    }
    out << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", net.omega());
    out << "omega: " << buf << "\n";
    out << "convention: "
        << (net.convention() == PropensityConvention::Binomial ? "binomial" : "falling") << "\n";
    auto side_str = [&](const std::map<int, int>& side) {
        if (side.empty()) return std::string("0");
        std::string s;
        bool first = true;
        for (const auto& [idx, nu] : side) {
            if (!first) s += " + ";
            first = false;
            if (nu != 1) s += std::to_string(nu) + " ";
            s += net.species()[static_cast<size_t>(idx)];
        }
        return s;
    };
    for (const auto& r : net.reactions()) {
        std::snprintf(buf, sizeof buf, "%.17g", r.rate);
        out << "reaction " << r.label << ": " << side_str(r.reactants) << " -> "
            << side_str(r.products) << " @ rate=" << buf << "\n";
    }
    return out.str();
}

}  // namespace rnf
