#include "emq/symexpr.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace emq {

bool TermKey::operator==(const TermKey& o) const {
    return pows == o.pows && weights == o.weights;
}

bool TermKey::operator<(const TermKey& o) const {
    if (pows != o.pows) return pows < o.pows;
    if (weights.size() != o.weights.size()) return weights.size() < o.weights.size();
    for (size_t i = 0; i < weights.size(); ++i) {
        if (weights[i].first != o.weights[i].first)
            return weights[i].first < o.weights[i].first;
        int c = weights[i].second.order(o.weights[i].second);
        if (c != 0) return c < 0;
    }
    return false;
}

int TermKey::exponent_of(int sym) const {
    for (const auto& [s, e] : pows)
        if (s == sym) return e;
    return 0;
}

bool TermKey::has_weight(int sym) const {
    for (const auto& [s, w] : weights)
        if (s == sym) return true;
    return false;
}

namespace {

void require_space(const SymExpr& a, const SymExpr& b) {
    if (a.space().get() != b.space().get())
        throw EmqError("expressions belong to different phase spaces");
}

TermKey merge_keys(const PhaseSpace& sp, const TermKey& x, const TermKey& y) {
    TermKey r;
    {
        size_t i = 0, j = 0;
        while (i < x.pows.size() || j < y.pows.size()) {
            if (j == y.pows.size() || (i < x.pows.size() && x.pows[i].first < y.pows[j].first)) {
                r.pows.push_back(x.pows[i++]);
            } else if (i == x.pows.size() || y.pows[j].first < x.pows[i].first) {
                r.pows.push_back(y.pows[j++]);
            } else {
                int e = x.pows[i].second + y.pows[j].second;
                if (e != 0) r.pows.emplace_back(x.pows[i].first, e);
                ++i;
                ++j;
            }
        }
    }
    for (const auto& [s, e] : r.pows)
        if (e < 0 && sp.is_dynamical(s))
            throw EmqError("negative power of dynamical symbol '" + sp.name(s) + "'");
    {
        size_t i = 0, j = 0;
        while (i < x.weights.size() || j < y.weights.size()) {
            if (j == y.weights.size() ||
                (i < x.weights.size() && x.weights[i].first < y.weights[j].first)) {
                r.weights.push_back(x.weights[i++]);
            } else if (i == x.weights.size() || y.weights[j].first < x.weights[i].first) {
                r.weights.push_back(y.weights[j++]);
            } else {
                Quad w = x.weights[i].second + y.weights[j].second;
                if (!w.is_zero()) r.weights.emplace_back(x.weights[i].first, w);
                ++i;
                ++j;
            }
        }
    }
    return r;
}

} // namespace

SymExpr SymExpr::constant(std::shared_ptr<const PhaseSpace> sp, Quad c) {
    SymExpr e(std::move(sp));
    if (!c.is_zero()) e.ts_[TermKey{}] = std::move(c);
    return e;
}

SymExpr SymExpr::symbol(std::shared_ptr<const PhaseSpace> sp, int id, int exponent) {
    if (id < 0 || id >= sp->size()) throw EmqError("symbol id out of range");
    if (exponent < 0 && sp->is_dynamical(id))
        throw EmqError("negative power of dynamical symbol '" + sp->name(id) + "'");
    SymExpr e(std::move(sp));
    if (exponent != 0) {
        TermKey k;
        k.pows.emplace_back(id, exponent);
        e.ts_[k] = Quad(1);
    } else {
        e.ts_[TermKey{}] = Quad(1);
    }
    return e;
}

bool SymExpr::is_constant() const {
    return ts_.empty() || (ts_.size() == 1 && ts_.begin()->first.pows.empty() &&
                           ts_.begin()->first.weights.empty());
}

Quad SymExpr::constant_value() const {
    if (ts_.empty()) return Quad(0);
    if (!is_constant()) throw EmqError("expression is not constant");
    return ts_.begin()->second;
}

bool SymExpr::depends_on(int sym) const {
    for (const auto& [k, c] : ts_) {
        (void)c;
        if (k.exponent_of(sym) != 0 || k.has_weight(sym)) return true;
    }
    return false;
}

bool SymExpr::has_exp() const {
    for (const auto& [k, c] : ts_) {
        (void)c;
        if (!k.weights.empty()) return true;
    }
    return false;
}

bool SymExpr::is_invertible_term() const {
    if (ts_.size() != 1) return false;
    const TermKey& k = ts_.begin()->first;
    if (!k.weights.empty()) return false;
    for (const auto& [s, e] : k.pows) {
        (void)e;
        if (sp_->is_dynamical(s)) return false;
    }
    return true;
}

SymExpr SymExpr::inverse_term() const {
    if (!is_invertible_term())
        throw EmqError("division requires a single constant term (parameters only)");
    TermKey k = ts_.begin()->first;
    for (auto& [s, e] : k.pows) {
        (void)s;
        e = -e;
    }
    SymExpr r(sp_);
    r.ts_[k] = ts_.begin()->second.inverse();
    return r;
}

void SymExpr::add_term(const TermKey& k, const Quad& c) {
    if (c.is_zero()) return;
    auto it = ts_.find(k);
    if (it == ts_.end()) {
        ts_.emplace(k, c);
    } else {
        it->second += c;
        if (it->second.is_zero()) ts_.erase(it);
    }
}

SymExpr SymExpr::operator-() const {
    SymExpr r(sp_);
    for (const auto& [k, c] : ts_) r.ts_.emplace(k, -c);
    return r;
}

SymExpr SymExpr::operator+(const SymExpr& o) const {
    require_space(*this, o);
    SymExpr r = *this;
    for (const auto& [k, c] : o.ts_) r.add_term(k, c);
    return r;
}

SymExpr SymExpr::operator-(const SymExpr& o) const {
    require_space(*this, o);
    SymExpr r = *this;
    for (const auto& [k, c] : o.ts_) r.add_term(k, -c);
    return r;
}

SymExpr SymExpr::operator*(const SymExpr& o) const {
    require_space(*this, o);
    SymExpr r(sp_);
    for (const auto& [ka, ca] : ts_)
        for (const auto& [kb, cb] : o.ts_)
            r.add_term(merge_keys(*sp_, ka, kb), ca * cb);
    return r;
}

bool SymExpr::operator==(const SymExpr& o) const {
    return sp_.get() == o.sp_.get() && ts_ == o.ts_;
}

SymExpr SymExpr::scaled(const Quad& c) const {
    SymExpr r(sp_);
    if (c.is_zero()) return r;
    for (const auto& [k, v] : ts_) r.ts_.emplace(k, v * c);
    return r;
}

SymExpr pow_int(const SymExpr& e, int n) {
    if (n < 0) {
        SymExpr inv = e.inverse_term();
        return pow_int(inv, -n);
    }
    SymExpr r = SymExpr::constant(e.space(), Quad(1));
    for (int i = 0; i < n; ++i) r = r * e;
    return r;
}

SymExpr differentiate(const SymExpr& e, int sym) {
    const auto sp = e.space();
    SymExpr r(sp);
    for (const auto& [k, c] : e.terms()) {
        int ex = k.exponent_of(sym);
        if (ex != 0) {
            TermKey nk = k;
            for (auto it = nk.pows.begin(); it != nk.pows.end(); ++it) {
                if (it->first == sym) {
                    if (it->second == 1)
                        nk.pows.erase(it);
                    else
                        it->second -= 1;
                    break;
                }
            }
            r.add_term(nk, c * Quad(ex));
        }
        for (const auto& [s, w] : k.weights) {
            if (s == sym) {
                r.add_term(k, c * w);
                break;
            }
        }
    }
    return r;
}

SymExpr poisson(const SymExpr& a, const SymExpr& b) {
    require_space(a, b);
    const auto sp = a.space();
    SymExpr r(sp);
    for (const auto& [q, p] : sp->bracket_pairs()) {
        r += differentiate(a, q) * differentiate(b, p);
        r -= differentiate(a, p) * differentiate(b, q);
    }
    return r;
}

SymExpr substitute(const SymExpr& e, const std::map<int, SymExpr>& bindings,
                   std::shared_ptr<const PhaseSpace> target) {
    const auto src = e.space();
    if (!target) {
        for (const auto& [s, b] : bindings) {
            (void)s;
            target = b.space();
            break;
        }
        if (!target) target = src;
    }
    for (const auto& [s, b] : bindings) {
        if (s < 0 || s >= src->size()) throw EmqError("binding for unknown symbol id");
        if (b.space().get() != target.get())
            throw EmqError("bindings live in different phase spaces");
    }
    bool cross = target.get() != src.get();

    // resolve an unbound source symbol in the target space
    auto carry = [&](int s) -> int {
        if (!cross) return s;
        int id = target->find(src->name(s));
        if (id < 0)
            throw EmqError("symbol '" + src->name(s) + "' has no counterpart in target space");
        return id;
    };

    SymExpr result(target);
    for (const auto& [k, c] : e.terms()) {
        SymExpr term = SymExpr::constant(target, c);
        for (const auto& [s, ex] : k.pows) {
            auto it = bindings.find(s);
            if (it == bindings.end()) {
                term = term * SymExpr::symbol(target, carry(s), ex);
            } else if (ex >= 0) {
                term = term * pow_int(it->second, ex);
            } else {
                term = term * pow_int(it->second.inverse_term(), -ex);
            }
        }
        // rebuild the exp part; bound symbols must expand to linear forms
        TermKey wk;
        std::map<int, Quad> acc;
        for (const auto& [s, w] : k.weights) {
            auto it = bindings.find(s);
            if (it == bindings.end()) {
                acc[carry(s)] += w;
                continue;
            }
            for (const auto& [bk, bc] : it->second.terms()) {
                if (!bk.weights.empty())
                    throw EmqError("exp-argument binding for '" + src->name(s) +
                                   "' must be free of exp");
                if (bk.pows.empty())
                    throw EmqError("exp-argument binding for '" + src->name(s) +
                                   "' has a constant part");
                if (bk.pows.size() != 1 || bk.pows[0].second != 1)
                    throw EmqError("exp-argument binding for '" + src->name(s) +
                                   "' is not linear");
                acc[bk.pows[0].first] += w * bc;
            }
        }
        for (const auto& [s, w] : acc)
            if (!w.is_zero()) wk.weights.emplace_back(s, w);
        if (!wk.weights.empty()) {
            SymExpr wexpr(target);
            wexpr.add_term(wk, Quad(1));
            term = term * wexpr;
        }
        result += term;
    }
    return result;
}

double evaluate(const SymExpr& e, const std::map<int, double>& values) {
    const auto sp = e.space();
    auto val = [&](int s) -> double {
        auto it = values.find(s);
        if (it == values.end())
            throw EmqError("no value bound for symbol '" + sp->name(s) + "'");
        return it->second;
    };
    double total = 0.0;
    for (const auto& [k, c] : e.terms()) {
        double t = c.to_double();
        for (const auto& [s, ex] : k.pows) t *= std::pow(val(s), ex);
        double arg = 0.0;
        for (const auto& [s, w] : k.weights) arg += w.to_double() * val(s);
        if (arg != 0.0) t *= std::exp(arg);
        total += t;
    }
    return total;
}

Rat evaluate_rat(const SymExpr& e, const std::map<int, Rat>& values) {
    const auto sp = e.space();
    auto val = [&](int s) -> const Rat& {
        auto it = values.find(s);
        if (it == values.end())
            throw EmqError("no value bound for symbol '" + sp->name(s) + "'");
        return it->second;
    };
    Rat total(0);
    for (const auto& [k, c] : e.terms()) {
        if (!c.is_rational())
            throw EmqError("sqrt2 coefficient has no rational value");
        Rat t = c.a;
        for (const auto& [s, ex] : k.pows) {
            const Rat& v = val(s);
            if (ex < 0 && v == 0) throw EmqError("negative power of zero value");
            Rat p(1);
            for (int i = 0; i < std::abs(ex); ++i) p *= v;
            if (ex < 0) p = 1 / p;
            t *= p;
        }
        for (const auto& [s, w] : k.weights) {
            if (!w.is_rational())
                throw EmqError("sqrt2 exp-weight has no rational value");
            if (w.a * val(s) != 0)
                throw EmqError("exp of nonzero argument is not rational");
        }
        total += t;
    }
    return total;
}

int degree_in(const SymExpr& e, int sym) {
    int d = 0;
    for (const auto& [k, c] : e.terms()) {
        (void)c;
        if (k.has_weight(sym))
            throw EmqError("expression is not polynomial in '" + e.space()->name(sym) + "'");
        d = std::max(d, k.exponent_of(sym));
    }
    return d;
}

SymExpr coeff_in(const SymExpr& e, int sym, int kdeg) {
    SymExpr r(e.space());
    for (const auto& [k, c] : e.terms()) {
        if (k.has_weight(sym))
            throw EmqError("expression is not polynomial in '" + e.space()->name(sym) + "'");
        if (k.exponent_of(sym) != kdeg) continue;
        TermKey nk = k;
        for (auto it = nk.pows.begin(); it != nk.pows.end(); ++it) {
            if (it->first == sym) {
                nk.pows.erase(it);
                break;
            }
        }
        r.add_term(nk, c);
    }
    return r;
}

std::optional<SymExpr> divide_exact(const SymExpr& a, const SymExpr& b) {
    require_space(a, b);
    if (b.is_zero()) throw EmqError("division by zero expression");
    if (b.term_count() != 1 || !b.terms().begin()->first.weights.empty())
        return std::nullopt;
    const TermKey& bk = b.terms().begin()->first;
    const Quad binv = b.terms().begin()->second.inverse();
    const auto sp = a.space();
    SymExpr q(sp);
    for (const auto& [k, c] : a.terms()) {
        TermKey nk;
        nk.weights = k.weights;
        // subtract bk's exponents from k's
        std::map<int, int> ex;
        for (const auto& [s, e] : k.pows) ex[s] += e;
        for (const auto& [s, e] : bk.pows) ex[s] -= e;
        for (const auto& [s, e] : ex) {
            if (e == 0) continue;
            if (e < 0 && sp->is_dynamical(s)) return std::nullopt;
            nk.pows.emplace_back(s, e);
        }
        q.add_term(nk, c * binv);
    }
    return q;
}

namespace {

std::string monomial_str(const PhaseSpace& sp, const TermKey& k) {
    std::ostringstream out;
    bool first = true;
    auto emit = [&](int s, int e) {
        if (!first) out << "*";
        first = false;
        out << sp.name(s);
        if (e != 1) out << "^" << e;
    };
    // parameter factors read as coefficients, so they go in front
    for (const auto& [s, e] : k.pows)
        if (sp.is_param(s)) emit(s, e);
    for (const auto& [s, e] : k.pows)
        if (!sp.is_param(s)) emit(s, e);
    if (!k.weights.empty()) {
        if (!first) out << "*";
        out << "exp(";
        bool w1 = true;
        for (const auto& [s, w] : k.weights) {
            std::string ws = w.str();
            if (w1) {
                if (ws == "1")
                    out << sp.name(s);
                else if (ws == "-1")
                    out << "-" << sp.name(s);
                else
                    out << ws << "*" << sp.name(s);
            } else {
                if (ws == "1")
                    out << "+" << sp.name(s);
                else if (ws == "-1")
                    out << "-" << sp.name(s);
                else if (!ws.empty() && (ws[0] == '-' || ws[0] == '('))
                    out << (ws[0] == '-' ? "" : "+") << ws << "*" << sp.name(s);
                else
                    out << "+" << ws << "*" << sp.name(s);
            }
            w1 = false;
        }
        out << ")";
    }
    return out.str();
}

} // namespace

std::string serialize(const SymExpr& e) {
    if (e.is_zero()) return "0";
    const auto& sp = *e.space();
    std::ostringstream out;
    bool first = true;
    for (const auto& [k, c] : e.terms()) {
        std::string mono = monomial_str(sp, k);
        std::string cs = c.str();
        bool neg = !cs.empty() && cs[0] == '-';
        std::string body;
        if (mono.empty()) {
            body = neg ? cs.substr(1) : cs;
        } else if (cs == "1") {
            body = mono;
        } else if (cs == "-1") {
            body = mono;
            neg = true;
        } else {
            body = (neg ? cs.substr(1) : cs) + "*" + mono;
        }
        if (first) {
            out << (neg ? "-" : "") << body;
            first = false;
        } else {
            out << (neg ? " - " : " + ") << body;
        }
    }
    return out.str();
}

} // namespace emq
