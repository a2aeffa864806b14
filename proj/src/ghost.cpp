#include "emq/ghost.hpp"

#include "emq/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace emq {

std::string CRat::str() const {
    std::ostringstream os;
    if (im == 0) {
        os << re.get_str();
    } else if (re == 0) {
        os << im.get_str() << "*i";
    } else {
        os << "(" << re.get_str() << (im > 0 ? "+" : "") << im.get_str() << "*i)";
    }
    return os.str();
}

int GenMask::count() const {
    return std::popcount(lo) + std::popcount(hi);
}

namespace {

// number of set bits of a strictly above position j
int count_above(const GenMask& a, int j) {
    if (j >= 64) {
        int s = j - 63;   // shift within hi, in [1, 64]
        return s >= 64 ? 0 : std::popcount(a.hi >> s);
    }
    int from_lo = j == 63 ? 0 : std::popcount(a.lo >> (j + 1));
    return from_lo + std::popcount(a.hi);
}

} // namespace

int merge_sign(const GenMask& a, const GenMask& b) {
    int parity = 0;
    for (int w = 0; w < 2; ++w) {
        std::uint64_t bits = w == 0 ? b.lo : b.hi;
        int base = w == 0 ? 0 : 64;
        while (bits) {
            int j = base + std::countr_zero(bits);
            parity ^= count_above(a, j) & 1;
            bits &= bits - 1;
        }
    }
    return parity ? -1 : 1;
}

GrassmannAlgebra::GrassmannAlgebra(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.empty()) throw EmqError("exterior algebra needs at least one generator");
    if (names_.size() > 128)
        throw EmqError("generator budget exceeded: " + std::to_string(names_.size()) +
                       " > 128");
}

GrassmannElement GrassmannElement::zero(std::shared_ptr<const GrassmannAlgebra> alg) {
    GrassmannElement e;
    e.alg_ = std::move(alg);
    return e;
}

GrassmannElement GrassmannElement::scalar(std::shared_ptr<const GrassmannAlgebra> alg,
                                          const CRat& c) {
    GrassmannElement e;
    e.alg_ = std::move(alg);
    if (!c.is_zero()) e.terms_[GenMask{}] = c;
    return e;
}

GrassmannElement GrassmannElement::generator(std::shared_ptr<const GrassmannAlgebra> alg,
                                             int i) {
    if (i < 0 || i >= alg->size())
        throw EmqError("generator index out of range: " + std::to_string(i));
    GrassmannElement e;
    e.alg_ = std::move(alg);
    GenMask m;
    m.set(i);
    e.terms_[m] = CRat(Rat(1));
    return e;
}

CRat GrassmannElement::coeff(const GenMask& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? CRat() : it->second;
}

void GrassmannElement::add_term(const GenMask& m, const CRat& c) {
    if (c.is_zero()) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) {
        terms_.emplace(m, c);
    } else {
        it->second = it->second + c;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

namespace {

void require_same_algebra(const GrassmannElement& a, const GrassmannElement& b) {
    if (a.algebra() && b.algebra() && a.algebra() != b.algebra())
        throw EmqError("elements belong to different exterior algebras");
}

} // namespace

GrassmannElement GrassmannElement::operator+(const GrassmannElement& o) const {
    require_same_algebra(*this, o);
    GrassmannElement r = *this;
    if (!r.alg_) r.alg_ = o.alg_;
    for (const auto& [m, c] : o.terms_) r.add_term(m, c);
    return r;
}

GrassmannElement GrassmannElement::operator-(const GrassmannElement& o) const {
    return *this + (-o);
}

GrassmannElement GrassmannElement::operator-() const {
    GrassmannElement r = *this;
    for (auto& [m, c] : r.terms_) c = -c;
    return r;
}

GrassmannElement GrassmannElement::scaled(const CRat& c) const {
    GrassmannElement r;
    r.alg_ = alg_;
    if (c.is_zero()) return r;
    for (const auto& [m, v] : terms_) r.terms_[m] = v * c;
    return r;
}

GrassmannElement GrassmannElement::operator*(const GrassmannElement& o) const {
    require_same_algebra(*this, o);
    GrassmannElement r;
    r.alg_ = alg_ ? alg_ : o.alg_;
    for (const auto& [ma, ca] : terms_) {
        for (const auto& [mb, cb] : o.terms_) {
            if (ma.overlaps(mb)) continue;   // repeated generator squares to zero
            CRat c = ca * cb;
            if (merge_sign(ma, mb) < 0) c = -c;
            r.add_term(ma.unite(mb), c);
        }
    }
    return r;
}

bool GrassmannElement::operator==(const GrassmannElement& o) const {
    require_same_algebra(*this, o);
    return terms_ == o.terms_;
}

std::string GrassmannElement::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << c.str();
        for (int i = 0; i < (alg_ ? alg_->size() : 128); ++i) {
            if (!m.test(i)) continue;
            os << "*" << (alg_ ? alg_->name(i) : std::to_string(i));
        }
    }
    return os.str();
}

GrassmannElement grassmann_eval(const SymExpr& e, const std::map<int, GrassmannElement>& vals,
                                const std::map<int, Rat>& params) {
    if (vals.empty()) throw EmqError("lattice evaluation needs at least one bound symbol");
    auto alg = vals.begin()->second.algebra();
    GrassmannElement acc = GrassmannElement::zero(alg);
    const auto& sp = e.space();
    for (const auto& [key, coeff] : e.terms()) {
        if (!key.weights.empty())
            throw EmqError("exponential factors are not supported on the ghost lattice");
        if (!coeff.is_rational())
            throw EmqError("irrational coefficients are not supported on the ghost lattice");
        Rat scale = coeff.a;
        GrassmannElement term = GrassmannElement::scalar(alg, CRat(Rat(1)));
        for (const auto& [sym, ex] : key.pows) {
            auto vit = vals.find(sym);
            if (vit != vals.end()) {
                if (ex < 0) throw EmqError("negative power of a lattice field");
                for (int k = 0; k < ex; ++k) term = term * vit->second;
                continue;
            }
            auto pit = params.find(sym);
            if (pit == params.end())
                throw EmqError("unbound symbol in lattice evaluation: " +
                               (sp ? sp->name(sym) : std::to_string(sym)));
            if (pit->second == 0 && ex < 0) throw EmqError("division by zero parameter");
            int mag = ex < 0 ? -ex : ex;
            Rat p = 1;
            for (int k = 0; k < mag; ++k) p *= pit->second;
            if (ex < 0) p = Rat(1) / p;
            scale *= p;
        }
        acc = acc + term.scaled(CRat(scale));
    }
    return acc;
}

namespace {

using Elems = std::vector<std::vector<GrassmannElement>>;

struct GhostArgs {
    Elems x;    // field values, even elements
    Elems cb;   // antighosts, odd
    Elems c;    // ghosts, odd
};

// lattice action value on arbitrary even field arguments:
//   A = sum_{t<=T-2} sum_a xbar_a(t) (x_a(t+1) - x_a(t) - dt f_a(x(t)))
GrassmannElement assemble_action_value(const LatticeAction& act, const Elems& x) {
    auto alg = act.alg;
    GrassmannElement a = GrassmannElement::zero(alg);
    const CRat dt{act.dt, Rat(0)};
    for (int t = 0; t + 1 < act.slices; ++t) {
        std::map<int, GrassmannElement> slice;
        for (int b = 0; b < act.n; ++b) slice[act.sp->coord(b)] = x[size_t(b)][size_t(t)];
        for (int aa = 0; aa < act.n; ++aa) {
            GrassmannElement fa = grassmann_eval(act.f[size_t(aa)], slice, act.params);
            GrassmannElement diff =
                x[size_t(aa)][size_t(t + 1)] - x[size_t(aa)][size_t(t)] - fa.scaled(dt);
            a = a + x[size_t(act.n + aa)][size_t(t)] * diff;
        }
    }
    return a;
}

// S = sum_mt lambda_mt dA/dx_mt - i sum c bar_m H_mn c_n, with the gradient and
// second-derivative stencils evaluated on the supplied (possibly shifted)
// arguments.  The optional breaking term sum_mt lambda_mt x_mt dt rides along.
GrassmannElement assemble_s(const LatticeAction& act, const GhostArgs& args) {
    auto alg = act.alg;
    const int N = act.n;
    const int T = act.slices;
    GrassmannElement S = GrassmannElement::zero(alg);
    const CRat dt{act.dt, Rat(0)};
    const CRat minus_i{Rat(0), Rat(-1)};

    // first and second derivatives of the flow, as expressions
    std::vector<std::vector<SymExpr>> df(static_cast<std::size_t>(N));
    std::vector<std::vector<std::vector<SymExpr>>> d2f(static_cast<std::size_t>(N));
    for (int a = 0; a < N; ++a) {
        df[size_t(a)].resize(size_t(N));
        d2f[size_t(a)].resize(size_t(N));
        for (int b = 0; b < N; ++b) {
            df[size_t(a)][size_t(b)] = differentiate(act.f[size_t(a)], act.sp->coord(b));
            d2f[size_t(a)][size_t(b)].resize(size_t(N));
            for (int c = 0; c < N; ++c)
                d2f[size_t(a)][size_t(b)][size_t(c)] =
                    differentiate(df[size_t(a)][size_t(b)], act.sp->coord(c));
        }
    }

    // per-slice evaluations on the given arguments
    std::vector<std::vector<GrassmannElement>> fval(static_cast<std::size_t>(T));
    std::vector<std::vector<std::vector<GrassmannElement>>> dfval(static_cast<std::size_t>(T));
    std::vector<std::vector<std::vector<std::vector<GrassmannElement>>>> d2fval(
        static_cast<std::size_t>(T));
    for (int t = 0; t + 1 < T; ++t) {
        std::map<int, GrassmannElement> slice;
        for (int b = 0; b < N; ++b) slice[act.sp->coord(b)] = args.x[size_t(b)][size_t(t)];
        fval[size_t(t)].resize(size_t(N));
        dfval[size_t(t)].assign(size_t(N), std::vector<GrassmannElement>(size_t(N)));
        d2fval[size_t(t)].assign(
            size_t(N),
            std::vector<std::vector<GrassmannElement>>(size_t(N),
                                                       std::vector<GrassmannElement>(size_t(N))));
        for (int a = 0; a < N; ++a) {
            fval[size_t(t)][size_t(a)] = grassmann_eval(act.f[size_t(a)], slice, act.params);
            for (int b = 0; b < N; ++b) {
                dfval[size_t(t)][size_t(a)][size_t(b)] =
                    df[size_t(a)][size_t(b)].is_zero()
                        ? GrassmannElement::zero(alg)
                        : grassmann_eval(df[size_t(a)][size_t(b)], slice, act.params);
                for (int c = 0; c < N; ++c)
                    d2fval[size_t(t)][size_t(a)][size_t(b)][size_t(c)] =
                        d2f[size_t(a)][size_t(b)][size_t(c)].is_zero()
                            ? GrassmannElement::zero(alg)
                            : grassmann_eval(d2f[size_t(a)][size_t(b)][size_t(c)], slice,
                                             act.params);
            }
        }
    }

    auto xbar = [&](int b, int s) -> const GrassmannElement& {
        return args.x[size_t(N + b)][size_t(s)];
    };

    // multiplier part: lambda contracted with the action gradient
    for (int a = 0; a < N; ++a) {
        for (int t = 0; t < T; ++t) {
            // d/dxbar_a(t)
            if (t + 1 < T) {
                GrassmannElement g = args.x[size_t(a)][size_t(t + 1)] -
                                     args.x[size_t(a)][size_t(t)] -
                                     fval[size_t(t)][size_t(a)].scaled(dt);
                S = S + g.scaled(CRat(act.lambda[size_t(N + a)][size_t(t)]));
            }
            // d/dx_a(t)
            GrassmannElement g = GrassmannElement::zero(alg);
            if (t >= 1) g = g + xbar(a, t - 1);
            if (t + 1 < T) {
                g = g - xbar(a, t);
                GrassmannElement drift = GrassmannElement::zero(alg);
                for (int b = 0; b < N; ++b)
                    drift = drift + xbar(b, t) * dfval[size_t(t)][size_t(b)][size_t(a)];
                g = g - drift.scaled(dt);
            }
            S = S + g.scaled(CRat(act.lambda[size_t(a)][size_t(t)]));
        }
    }

    // ghost part: -i cbar H c over the nonzero stencil entries, both
    // orientations of each mixed block
    GrassmannElement ghost = GrassmannElement::zero(alg);
    for (int t = 0; t + 1 < T; ++t) {
        for (int a = 0; a < N; ++a) {
            // (xbar_a(t), x_a(t+1)): +1
            ghost = ghost + args.cb[size_t(N + a)][size_t(t)] * args.c[size_t(a)][size_t(t + 1)];
            ghost = ghost + args.cb[size_t(a)][size_t(t + 1)] * args.c[size_t(N + a)][size_t(t)];
            for (int b = 0; b < N; ++b) {
                // (xbar_a(t), x_b(t)): -delta_ab - dt df_a/dx_b
                GrassmannElement entry = dfval[size_t(t)][size_t(a)][size_t(b)].scaled(-dt);
                if (a == b) entry = entry - GrassmannElement::scalar(alg, CRat(Rat(1)));
                if (!entry.is_zero()) {
                    ghost = ghost + args.cb[size_t(N + a)][size_t(t)] * entry *
                                        args.c[size_t(b)][size_t(t)];
                    ghost = ghost + args.cb[size_t(b)][size_t(t)] * entry *
                                        args.c[size_t(N + a)][size_t(t)];
                }
            }
        }
        // (x_b(t), x_c(t)): -dt sum_a xbar_a(t) d2f_a/dx_b dx_c
        for (int b = 0; b < N; ++b) {
            for (int c = 0; c < N; ++c) {
                GrassmannElement curv = GrassmannElement::zero(alg);
                for (int aa = 0; aa < N; ++aa)
                    curv = curv +
                           xbar(aa, t) * d2fval[size_t(t)][size_t(aa)][size_t(b)][size_t(c)];
                if (curv.is_zero()) continue;
                ghost = ghost + args.cb[size_t(b)][size_t(t)] * curv.scaled(-dt) *
                                    args.c[size_t(c)][size_t(t)];
            }
        }
    }
    S = S + ghost.scaled(minus_i);

    if (act.broken) {
        for (int m = 0; m < act.nfields; ++m)
            for (int t = 0; t < T; ++t)
                S = S + args.x[size_t(m)][size_t(t)].scaled(
                            CRat(act.lambda[size_t(m)][size_t(t)] * act.dt));
    }
    return S;
}

GhostArgs scalar_args(const LatticeAction& act) {
    GhostArgs args;
    args.x.assign(size_t(act.nfields), std::vector<GrassmannElement>(size_t(act.slices)));
    args.cb = args.x;
    args.c = args.x;
    for (int m = 0; m < act.nfields; ++m) {
        for (int t = 0; t < act.slices; ++t) {
            args.x[size_t(m)][size_t(t)] =
                GrassmannElement::scalar(act.alg, CRat(act.fields[size_t(m)][size_t(t)]));
            args.cb[size_t(m)][size_t(t)] =
                GrassmannElement::generator(act.alg, act.cbar_gen(m, t));
            args.c[size_t(m)][size_t(t)] = GrassmannElement::generator(act.alg, act.c_gen(m, t));
        }
    }
    return args;
}

} // namespace

LatticeAction discretize_action(const ExtendedSystem& sys, int slices, const Rat& dt,
                                const std::vector<std::vector<Rat>>& fields,
                                const std::vector<std::vector<Rat>>& lambda,
                                const std::map<int, Rat>& params) {
    if (slices < 3) throw EmqError("time grid too small: need at least 3 slices");
    if (dt <= 0) throw EmqError("time step must be positive");
    LatticeAction act;
    act.sp = sys.sp;
    act.f = sys.f;
    act.params = params;
    act.n = sys.n();
    act.nfields = 2 * act.n;
    act.slices = slices;
    act.dt = dt;
    for (const auto& fa : act.f)
        if (fa.has_exp())
            throw EmqError("flow has exponential terms; the ghost lattice needs a polynomial flow");
    if (int(fields.size()) != act.nfields || int(lambda.size()) != act.nfields)
        throw EmqError("field table must cover all " + std::to_string(act.nfields) + " fields");
    for (int m = 0; m < act.nfields; ++m)
        if (int(fields[size_t(m)].size()) != slices || int(lambda[size_t(m)].size()) != slices)
            throw EmqError("field table must cover all " + std::to_string(slices) + " slices");
    act.fields = fields;
    act.lambda = lambda;

    int ngen = 2 * act.nfields * slices + 3;
    if (ngen > 128)
        throw EmqError("generator budget exceeded: " + std::to_string(ngen) + " > 128");
    std::vector<std::string> names(static_cast<std::size_t>(ngen));
    for (int m = 0; m < act.nfields; ++m) {
        std::string field = m < act.n ? act.sp->name(act.sp->coord(m))
                                      : act.sp->name(act.sp->aux_coord(m - act.n));
        for (int t = 0; t < slices; ++t) {
            names[size_t(act.c_gen(m, t))] = "c(" + field + "," + std::to_string(t) + ")";
            names[size_t(act.cbar_gen(m, t))] = "cb(" + field + "," + std::to_string(t) + ")";
        }
    }
    names[size_t(act.eps_gen())] = "eps";
    names[size_t(act.theta_gen())] = "theta";
    names[size_t(act.thetabar_gen())] = "thetab";
    act.alg = std::make_shared<const GrassmannAlgebra>(std::move(names));

    act.S = assemble_s(act, scalar_args(act));
    return act;
}

LatticeAction break_symmetry(const LatticeAction& act) {
    LatticeAction b = act;
    b.broken = true;
    b.S = assemble_s(b, scalar_args(b));
    return b;
}

bool action_structure_ok(const LatticeAction& act) {
    const int nc = act.nfields * act.slices;
    for (const auto& [m, c] : act.S.terms()) {
        (void)c;
        if (m.empty()) continue;
        if (m.count() != 2) return false;
        int ghosts = 0, antighosts = 0;
        for (int i = 0; i < act.alg->size(); ++i) {
            if (!m.test(i)) continue;
            if (i < nc)
                ++ghosts;
            else if (i < 2 * nc)
                ++antighosts;
        }
        if (ghosts != 1 || antighosts != 1) return false;
    }
    return true;
}

GrassmannElement brst_check(const LatticeAction& act) {
    GhostArgs args = scalar_args(act);
    GrassmannElement eps = GrassmannElement::generator(act.alg, act.eps_gen());
    for (int m = 0; m < act.nfields; ++m) {
        for (int t = 0; t < act.slices; ++t) {
            // x -> x + eps c, cbar -> cbar - i eps lambda, c and lambda fixed
            args.x[size_t(m)][size_t(t)] =
                args.x[size_t(m)][size_t(t)] + eps * args.c[size_t(m)][size_t(t)];
            args.cb[size_t(m)][size_t(t)] =
                args.cb[size_t(m)][size_t(t)] +
                eps.scaled(CRat(Rat(0), -act.lambda[size_t(m)][size_t(t)]));
        }
    }
    return assemble_s(act, args) - act.S;
}

GrassmannElement superfield_check(const LatticeAction& act) {
    GrassmannElement th = GrassmannElement::generator(act.alg, act.theta_gen());
    GrassmannElement thb = GrassmannElement::generator(act.alg, act.thetabar_gen());
    const CRat i_c = CRat::i_unit();

    Elems phi(size_t(act.nfields), std::vector<GrassmannElement>(size_t(act.slices)));
    for (int m = 0; m < act.nfields; ++m) {
        for (int t = 0; t < act.slices; ++t) {
            GrassmannElement c = GrassmannElement::generator(act.alg, act.c_gen(m, t));
            GrassmannElement cb = GrassmannElement::generator(act.alg, act.cbar_gen(m, t));
            phi[size_t(m)][size_t(t)] =
                GrassmannElement::scalar(act.alg, CRat(act.fields[size_t(m)][size_t(t)])) +
                (th * c).scaled(i_c) - (thb * cb).scaled(i_c) +
                (thb * th).scaled(CRat(Rat(0), -act.lambda[size_t(m)][size_t(t)]));
        }
    }

    GrassmannElement val = assemble_action_value(act, phi);

    // integrate out the superspace pair: with theta and thetab on the two top
    // generator slots, the top-form coefficient of each term picks up exactly
    // one reordering sign
    GrassmannElement out = GrassmannElement::zero(act.alg);
    for (const auto& [mask, cf] : val.terms()) {
        if (!mask.test(act.theta_gen()) || !mask.test(act.thetabar_gen())) continue;
        GenMask rest = mask;
        rest.clear(act.theta_gen());
        rest.clear(act.thetabar_gen());
        GrassmannElement piece = GrassmannElement::zero(act.alg);
        piece.add_term(rest, -cf);
        out = out + piece;
    }

    return out - act.S.scaled(CRat(Rat(0), Rat(-1)));
}

BrstSweepResult brst_sweep(const ExtendedSystem& sys, int slices_lo, int slices_hi,
                           int trials, std::uint64_t seed, const std::map<int, Rat>& params,
                           bool parallel) {
    if (slices_lo < 3 || slices_hi < slices_lo)
        throw EmqError("invalid slice range for the sweep");
    struct Config {
        int slices;
        std::uint64_t index;
    };
    std::vector<Config> configs;
    for (int s = slices_lo; s <= slices_hi; ++s)
        for (int k = 0; k < trials; ++k)
            configs.push_back({s, std::uint64_t(configs.size())});

    BrstSweepResult res;
    res.configs = int(configs.size());
    res.flags.assign(configs.size(), 0);

    const int nf = 2 * sys.n();
    auto run_one = [&](std::size_t idx) -> std::uint8_t {
        const Config& cfg = configs[idx];
        std::uint64_t s0 = sample_seed(seed, cfg.index);
        std::uint64_t state = s0;
        auto next_rat = [&]() {
            state = splitmix64(state);
            long num = long(state % 19u) - 9;
            long den = long((state >> 32) % 4u) + 1;
            Rat r(num);
            r /= den;
            return r;
        };
        std::vector<std::vector<Rat>> fields(size_t(nf), std::vector<Rat>(size_t(cfg.slices)));
        std::vector<std::vector<Rat>> lambda = fields;
        for (auto& row : fields)
            for (auto& v : row) v = next_rat();
        for (auto& row : lambda)
            for (auto& v : row) v = next_rat();
        try {
            LatticeAction act =
                discretize_action(sys, cfg.slices, Rat(1) / 8, fields, lambda, params);
            bool ok = brst_check(act).is_zero() && superfield_check(act).is_zero() &&
                      action_structure_ok(act);
            return ok ? 1 : 0;
        } catch (const EmqError&) {
            return 0;
        }
    };

#ifdef EMQ_HAVE_OPENMP
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long long i = 0; i < (long long)configs.size(); ++i)
            res.flags[size_t(i)] = run_one(size_t(i));
    } else {
        for (std::size_t i = 0; i < configs.size(); ++i) res.flags[i] = run_one(i);
    }
#else
    (void)parallel;
    for (std::size_t i = 0; i < configs.size(); ++i) res.flags[i] = run_one(i);
#endif

    for (auto f : res.flags)
        if (!f) ++res.failures;
    return res;
}

double euler_functional_check(const ActionFn& action, int nfields, int slices,
                              const std::vector<double>& alpha,
                              const std::vector<std::vector<double>>& point, double delta) {
    if (int(alpha.size()) != nfields) throw EmqError("alpha must have one weight per field");
    if (int(point.size()) != nfields) throw EmqError("point must cover all fields");
    for (const auto& row : point)
        if (int(row.size()) != slices) throw EmqError("point must cover all slices");
    if (delta <= 0) throw EmqError("finite-difference step must be positive");

    double base = action(point);
    double contracted = 0.0;
    std::vector<std::vector<double>> work = point;
    for (int m = 0; m < nfields; ++m) {
        if (alpha[size_t(m)] == 0.0) continue;
        for (int t = 0; t < slices; ++t) {
            double x0 = point[size_t(m)][size_t(t)];
            work[size_t(m)][size_t(t)] = x0 + delta;
            double up = action(work);
            work[size_t(m)][size_t(t)] = x0 - delta;
            double dn = action(work);
            work[size_t(m)][size_t(t)] = x0;
            contracted += alpha[size_t(m)] * x0 * (up - dn) / (2.0 * delta);
        }
    }
    return std::abs(base - contracted);
}

ActionFn lattice_action_fn(const ExtendedSystem& sys, int slices, double dt,
                          const std::map<int, double>& params) {
    if (slices < 3) throw EmqError("time grid too small: need at least 3 slices");
    const int n = sys.n();
    auto sp = sys.sp;
    auto f = sys.f;
    return [n, sp, f, slices, dt, params](const std::vector<std::vector<double>>& v) {
        if (int(v.size()) != 2 * n) throw EmqError("value table must cover all fields");
        double a = 0.0;
        for (int t = 0; t + 1 < slices; ++t) {
            std::map<int, double> slice = params;
            for (int b = 0; b < n; ++b) slice[sp->coord(b)] = v[size_t(b)][size_t(t)];
            for (int aa = 0; aa < n; ++aa) {
                double fa = evaluate(f[size_t(aa)], slice);
                a += v[size_t(n + aa)][size_t(t)] *
                     (v[size_t(aa)][size_t(t + 1)] - v[size_t(aa)][size_t(t)] - dt * fa);
            }
        }
        return a;
    };
}

AlphaReport alpha_structure_check(const std::vector<std::vector<Rat>>& B) {
    const int N = int(B.size());
    if (N == 0) throw EmqError("kinetic matrix is empty");
    for (const auto& row : B)
        if (int(row.size()) != N) throw EmqError("kinetic matrix must be square");
    for (int i = 0; i < N; ++i)
        for (int j = 0; j <= i; ++j)
            if (B[size_t(i)][size_t(j)] != 0)
                throw EmqError("kinetic matrix must be strictly upper triangular");
    if (N % 2 != 0)
        throw EmqError("kinetic matrix has odd dimension; no half-rank weight matrix exists");

    AlphaReport rep;
    rep.alpha.assign(size_t(N), Rat(0));
    for (int m = 0; m < N; ++m) {
        bool row_nz = false, col_nz = false;
        for (int i = 0; i < N; ++i) {
            if (B[size_t(m)][size_t(i)] != 0) row_nz = true;
            if (B[size_t(i)][size_t(m)] != 0) col_nz = true;
        }
        if (row_nz && col_nz)
            throw EmqError("no idempotent weight assignment: a variable both drives and is driven");
        if (!row_nz && !col_nz)
            throw EmqError("kinetic form does not involve every variable");
        rep.alpha[size_t(m)] = col_nz ? Rat(1) : Rat(0);
        if (col_nz) ++rep.rank;
    }
    if (2 * rep.rank != N)
        throw EmqError("idempotent weights have rank " + std::to_string(rep.rank) +
                       ", expected " + std::to_string(N / 2));

    // certify (B - B^T) alpha = B, B alpha = B, B^T alpha = 0 entrywise
    rep.identities_ok = true;
    for (int i = 0; i < N && rep.identities_ok; ++i) {
        for (int j = 0; j < N; ++j) {
            const Rat& aj = rep.alpha[size_t(j)];
            Rat anti = (B[size_t(i)][size_t(j)] - B[size_t(j)][size_t(i)]) * aj;
            Rat ba = B[size_t(i)][size_t(j)] * aj;
            Rat bta = B[size_t(j)][size_t(i)] * aj;
            if (anti != B[size_t(i)][size_t(j)] || ba != B[size_t(i)][size_t(j)] || bta != 0) {
                rep.identities_ok = false;
                break;
            }
        }
    }

    // support: every nonzero entry couples a weight-0 row to a weight-1 column
    rep.block_ok = true;
    for (int i = 0; i < N && rep.block_ok; ++i)
        for (int j = 0; j < N; ++j)
            if (B[size_t(i)][size_t(j)] != 0 &&
                (rep.alpha[size_t(i)] != 0 || rep.alpha[size_t(j)] != 1)) {
                rep.block_ok = false;
                break;
            }
    return rep;
}

} // namespace emq
