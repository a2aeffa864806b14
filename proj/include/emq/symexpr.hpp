#pragma once

#include "emq/phasespace.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace emq {

// One monomial: product of symbol powers times exp of a linear form.
// pows is sorted by symbol id with nonzero exponents; weights likewise.
// Dynamical symbols never carry negative exponents; parameters may.
struct TermKey {
    std::vector<std::pair<int, int>> pows;
    std::vector<std::pair<int, Quad>> weights;

    bool operator==(const TermKey& o) const;
    bool operator<(const TermKey& o) const;

    int exponent_of(int sym) const;
    bool has_weight(int sym) const;
};

// Exact symbolic expression: finite sum of Quad-coefficient terms over one
// phase space.  Canonical form (sorted keys, no zero coefficients) makes
// equality, hashing by string, and serialization deterministic.
class SymExpr {
public:
    SymExpr() = default;
    explicit SymExpr(std::shared_ptr<const PhaseSpace> sp) : sp_(std::move(sp)) {}

    static SymExpr zero(std::shared_ptr<const PhaseSpace> sp) { return SymExpr(std::move(sp)); }
    static SymExpr constant(std::shared_ptr<const PhaseSpace> sp, Quad c);
    static SymExpr symbol(std::shared_ptr<const PhaseSpace> sp, int id, int exponent = 1);

    const std::shared_ptr<const PhaseSpace>& space() const { return sp_; }
    const std::map<TermKey, Quad>& terms() const { return ts_; }
    bool is_zero() const { return ts_.empty(); }
    int term_count() const { return int(ts_.size()); }

    bool is_constant() const;
    Quad constant_value() const;   // throws unless constant (zero counts, value 0)
    bool depends_on(int sym) const;
    bool has_exp() const;

    // single term with invertible content: nonzero coefficient, no exp part,
    // and only parameter symbols in the monomial
    bool is_invertible_term() const;
    SymExpr inverse_term() const;

    SymExpr operator-() const;
    SymExpr operator+(const SymExpr& o) const;
    SymExpr operator-(const SymExpr& o) const;
    SymExpr operator*(const SymExpr& o) const;
    SymExpr& operator+=(const SymExpr& o) { *this = *this + o; return *this; }
    SymExpr& operator-=(const SymExpr& o) { *this = *this - o; return *this; }
    SymExpr& operator*=(const SymExpr& o) { *this = *this * o; return *this; }
    bool operator==(const SymExpr& o) const;
    bool operator!=(const SymExpr& o) const { return !(*this == o); }

    SymExpr scaled(const Quad& c) const;

    void add_term(const TermKey& k, const Quad& c);   // merges, drops zeros

private:
    std::shared_ptr<const PhaseSpace> sp_;
    std::map<TermKey, Quad> ts_;
};

SymExpr pow_int(const SymExpr& e, int n);   // n < 0 needs an invertible term
SymExpr differentiate(const SymExpr& e, int sym);
SymExpr poisson(const SymExpr& a, const SymExpr& b);

// Simultaneous substitution.  Bindings must all live in one target space
// (defaulting to the source space); unbound symbols resolve by name in the
// target.  A symbol appearing inside an exp() may only be bound to a linear
// form with numeric coefficients and no constant part.
SymExpr substitute(const SymExpr& e, const std::map<int, SymExpr>& bindings,
                   std::shared_ptr<const PhaseSpace> target = nullptr);

double evaluate(const SymExpr& e, const std::map<int, double>& values);
Rat evaluate_rat(const SymExpr& e, const std::map<int, Rat>& values);

// polynomial structure in one symbol (rejects exp-dependence on it)
int degree_in(const SymExpr& e, int sym);
SymExpr coeff_in(const SymExpr& e, int sym, int k);

// exact quotient A/B, or nullopt when B does not divide A;
// B must be a single nonzero term without exp part
std::optional<SymExpr> divide_exact(const SymExpr& a, const SymExpr& b);

std::string serialize(const SymExpr& e);

} // namespace emq
