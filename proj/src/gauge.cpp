#include "emq/gauge.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace emq {
namespace {

bool param_const(const SymExpr& e) {
    const auto sp = e.space();
    for (const auto& [k, c] : e.terms()) {
        (void)c;
        if (!k.weights.empty()) return false;
        for (const auto& [s, ex] : k.pows) {
            (void)ex;
            if (sp->is_dynamical(s)) return false;
        }
    }
    return true;
}

bool integer_tag(const std::string& tag, int& value) {
    if (tag.empty() || tag.size() > 6) return false;
    for (char ch : tag)
        if (!std::isdigit(static_cast<unsigned char>(ch))) return false;
    value = std::stoi(tag);
    return true;
}

} // namespace

CanonicalMap make_canonical_map(const ExtendedSystem& sys,
                                const std::vector<std::string>& labels,
                                const std::vector<std::vector<SymExpr>>& matrix,
                                const std::vector<SymExpr>& offset) {
    const auto sp = sys.sp;
    const int dim = sp->phase_dim();
    const int n = sys.n();
    if (int(labels.size()) != dim || int(matrix.size()) != dim || int(offset.size()) != dim)
        throw EmqError("canonical map needs " + std::to_string(dim) + " labeled rows");

    CanonicalMap map;
    map.sp_old = sp;
    map.labels = labels;
    map.mat = matrix;
    map.offset = offset;
    map.n_constraint_pairs = n;

    for (int r = 0; r < dim; ++r) {
        if (int(matrix[size_t(r)].size()) != dim)
            throw EmqError("row '" + labels[size_t(r)] + "' has the wrong width");
        SymExpr row = offset[size_t(r)];
        if (!param_const(row))
            throw EmqError("offset of row '" + labels[size_t(r)] + "' is not a parameter constant");
        for (int a = 0; a < dim; ++a) {
            const SymExpr& entry = matrix[size_t(r)][size_t(a)];
            if (!param_const(entry))
                throw EmqError("entry (" + labels[size_t(r)] + ", " + sp->name(sp->phase_symbol(a)) +
                               ") is not a parameter constant");
            if (!entry.is_zero())
                row += entry * SymExpr::symbol(sp, sp->phase_symbol(a));
        }
        map.rows.push_back(row);
    }

    // pair rows by tag: each tag names one P row and one Q row
    struct TagRows {
        int p = -1, q = -1;
        int first_seen = 0;
    };
    std::map<std::string, TagRows> tags;
    for (int r = 0; r < dim; ++r) {
        const std::string& lb = labels[size_t(r)];
        if (lb.size() < 2 || (lb[0] != 'P' && lb[0] != 'Q'))
            throw EmqError("label '" + lb + "' must start with P or Q followed by a tag");
        std::string tag = lb.substr(1);
        auto [it, fresh] = tags.try_emplace(tag);
        if (fresh) it->second.first_seen = r;
        int& slot = (lb[0] == 'P') ? it->second.p : it->second.q;
        if (slot >= 0) throw EmqError("duplicate label '" + lb + "'");
        slot = r;
    }
    std::vector<CanonicalMap::PairInfo> constraint_pairs(size_t(n), CanonicalMap::PairInfo{});
    std::vector<std::pair<int, CanonicalMap::PairInfo>> physical;  // keyed by first appearance
    CanonicalMap::PairInfo gauge_pair{};
    bool have_gauge = false;
    for (auto& [tag, rows] : tags) {
        if (rows.p < 0 || rows.q < 0)
            throw EmqError("tag '" + tag + "' needs both a P and a Q row");
        CanonicalMap::PairInfo info{tag, rows.p, rows.q};
        int tv = 0;
        if (integer_tag(tag, tv)) {
            if (tv == 1) {
                gauge_pair = info;
                have_gauge = true;
            } else if (tv >= 2 && tv <= n + 1) {
                constraint_pairs[size_t(tv - 2)] = info;
            } else {
                throw EmqError("integer tag '" + tag + "' does not match any constraint pair");
            }
        } else {
            physical.emplace_back(rows.first_seen, info);
        }
    }
    if (!have_gauge) throw EmqError("no gauge pair (tag 1) among the labels");
    for (int i = 0; i < n; ++i)
        if (constraint_pairs[size_t(i)].tag.empty())
            throw EmqError("missing constraint pair with tag " + std::to_string(i + 2));
    if (int(physical.size()) != n - 1)
        throw EmqError("expected " + std::to_string(n - 1) + " physical pairs, got " +
                       std::to_string(physical.size()));
    std::sort(physical.begin(), physical.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    map.pairs.push_back(gauge_pair);
    for (auto& pi : constraint_pairs) map.pairs.push_back(pi);
    for (auto& [seen, pi] : physical) {
        (void)seen;
        map.pairs.push_back(pi);
    }

    // new frame: (Q, P) per pair in gauge, constraint, physical order
    std::vector<std::pair<std::string, std::string>> qp;
    for (const auto& pi : map.pairs)
        qp.emplace_back(labels[size_t(pi.q_row)], labels[size_t(pi.p_row)]);
    std::vector<std::string> params;
    for (int id : sp->param_ids()) params.push_back(sp->name(id));
    map.sp_new = PhaseSpace::plain(qp, params);

    // exact symplectic certificate: brackets of the rows must reproduce the
    // target pairing {Q_t, P_t} = 1, all other brackets zero
    std::vector<std::vector<int>> jw(size_t(dim), std::vector<int>(size_t(dim), 0));
    for (const auto& pi : map.pairs) {
        jw[size_t(pi.q_row)][size_t(pi.p_row)] = 1;
        jw[size_t(pi.p_row)][size_t(pi.q_row)] = -1;
    }
    for (int r = 0; r < dim; ++r)
        for (int s = r + 1; s < dim; ++s) {
            SymExpr br = poisson(map.rows[size_t(r)], map.rows[size_t(s)]);
            SymExpr want = SymExpr::constant(sp, Quad(jw[size_t(r)][size_t(s)]));
            if (br != want)
                throw EmqError("map is not symplectic: {" + labels[size_t(r)] + ", " +
                               labels[size_t(s)] + "} = " + serialize(br));
        }

    // closed-form inverse Minv = J M^T Jw^-1, written out through the pairings
    // T[b][r] = (M^T Jw^-1)[b][r]
    std::vector<std::vector<SymExpr>> T(size_t(dim),
                                        std::vector<SymExpr>(size_t(dim), SymExpr::zero(sp)));
    for (const auto& pi : map.pairs)
        for (int b = 0; b < dim; ++b) {
            T[size_t(b)][size_t(pi.q_row)] = matrix[size_t(pi.p_row)][size_t(b)];
            T[size_t(b)][size_t(pi.p_row)] = -matrix[size_t(pi.q_row)][size_t(b)];
        }
    std::vector<std::vector<SymExpr>> minv(size_t(dim),
                                           std::vector<SymExpr>(size_t(dim), SymExpr::zero(sp)));
    for (const auto& [zq, zp] : sp->bracket_pairs())
        for (int r = 0; r < dim; ++r) {
            minv[size_t(zq)][size_t(r)] = T[size_t(zp)][size_t(r)];
            minv[size_t(zp)][size_t(r)] = -T[size_t(zq)][size_t(r)];
        }
    for (int r = 0; r < dim; ++r)
        for (int s = 0; s < dim; ++s) {
            SymExpr acc(sp);
            for (int a = 0; a < dim; ++a)
                acc += matrix[size_t(r)][size_t(a)] * minv[size_t(a)][size_t(s)];
            if (acc != SymExpr::constant(sp, Quad(r == s ? 1 : 0)))
                throw EmqError("inverse check failed at (" + labels[size_t(r)] + ", " +
                               labels[size_t(s)] + "): " + serialize(acc));
        }

    // old symbol -> new-frame expression, z = Minv (w - offset)
    for (int a = 0; a < dim; ++a) {
        SymExpr e(map.sp_new);
        for (int r = 0; r < dim; ++r) {
            const SymExpr& mv = minv[size_t(a)][size_t(r)];
            if (mv.is_zero()) continue;
            SymExpr mv_new = substitute(mv, {}, map.sp_new);
            SymExpr w = SymExpr::symbol(map.sp_new, map.sp_new->require(labels[size_t(r)]));
            e += mv_new * (w - substitute(offset[size_t(r)], {}, map.sp_new));
        }
        map.bind_[sp->phase_symbol(a)] = e;
    }
    return map;
}

SymExpr transform(const CanonicalMap& map, const SymExpr& e) {
    if (e.space() != map.sp_old)
        throw EmqError("expression lives in a different space than the map");
    return substitute(e, map.bindings(), map.sp_new);
}

GaugeReport validate_gauge(const ExtendedSystem& sys, const InfoLossSet& cs,
                           const SymExpr& chi) {
    GaugeReport rep;
    rep.commutes = true;
    for (const SymExpr& c : sys.constraints) {
        rep.chi_phi_i.push_back(poisson(chi, c));
        if (!rep.chi_phi_i.back().is_zero()) rep.commutes = false;
    }
    rep.chi_phi = poisson(chi, cs.first_class);
    rep.nondegenerate = !rep.chi_phi.is_zero();
    return rep;
}

void check_map_rows(const ExtendedSystem& sys, const CanonicalMap& map, const SymExpr& chi) {
    const auto& pairs = map.pairs;
    if (map.rows[size_t(pairs[0].p_row)] != chi)
        throw EmqError("row '" + map.labels[size_t(pairs[0].p_row)] +
                       "' does not reproduce the gauge condition");
    for (int i = 0; i < map.n_constraint_pairs; ++i) {
        const auto& pi = pairs[size_t(1 + i)];
        if (map.rows[size_t(pi.p_row)] != sys.constraints[size_t(2 * i)])
            throw EmqError("row '" + map.labels[size_t(pi.p_row)] +
                           "' does not reproduce its constraint");
        if (map.rows[size_t(pi.q_row)] != sys.constraints[size_t(2 * i + 1)])
            throw EmqError("row '" + map.labels[size_t(pi.q_row)] +
                           "' does not reproduce its constraint");
    }
}

ReducedSystem reduce(const ExtendedSystem& sys, const InfoLossSet& cs,
                     const SymExpr& chi, const CanonicalMap& map) {
    GaugeReport rep = validate_gauge(sys, cs, chi);
    if (!rep.commutes)
        throw EmqError("gauge condition does not commute with the second-class constraints");
    if (!rep.nondegenerate)
        throw EmqError("gauge condition commutes with the conserved constraint and fixes nothing");
    check_map_rows(sys, map, chi);

    const auto znew = map.sp_new;
    std::map<int, SymExpr> surface;
    surface[map.gauge_p()] = SymExpr::zero(znew);
    for (int i = 0; i < map.n_constraint_pairs; ++i) {
        surface[map.constraint_p(i)] = SymExpr::zero(znew);
        surface[map.constraint_q(i)] = SymExpr::zero(znew);
    }

    ReducedSystem red;
    red.chi = chi;
    red.first_class = cs.first_class;
    red.K = substitute(transform(map, sys.H), surface);
    red.phi_gamma = substitute(transform(map, cs.first_class), surface);
    if (red.phi_gamma.is_zero())
        throw EmqError("constraint vanishes identically on the gauge slice");

    const int q1 = map.gauge_q();
    SymExpr num(znew), den(znew);
    const int deg = degree_in(red.phi_gamma, q1);
    if (deg == 1) {
        den = coeff_in(red.phi_gamma, q1, 1);
        num = -coeff_in(red.phi_gamma, q1, 0);
        red.gribov_degree = 1;
    } else if (deg == 2) {
        SymExpr c2 = coeff_in(red.phi_gamma, q1, 2);
        SymExpr c1 = coeff_in(red.phi_gamma, q1, 1);
        SymExpr c0 = coeff_in(red.phi_gamma, q1, 0);
        SymExpr disc = c1 * c1 - SymExpr::constant(znew, Quad(4)) * c2 * c0;
        if (!disc.is_zero())
            throw EmqError("quadratic slice is not a perfect square; no rational root");
        den = c2 + c2;
        num = -c1;
        red.gribov_degree = 2;
    } else {
        throw EmqError("constraint has degree " + std::to_string(deg) +
                       " in the gauge coordinate; cannot solve the slice");
    }
    red.q1star_fn = RatFn{num, den};
    red.q1star = divide_exact(num, den);

    if (red.q1star) {
        std::map<int, SymExpr> root;
        root[q1] = *red.q1star;
        SymExpr ks = substitute(red.K, root);
        red.kstar_fn = RatFn{ks, SymExpr::constant(znew, Quad(1))};
        red.kstar = ks;
    } else {
        const int kdeg = degree_in(red.K, q1);
        SymExpr acc(znew);
        for (int j = 0; j <= kdeg; ++j)
            acc += coeff_in(red.K, q1, j) * pow_int(num, j) * pow_int(den, kdeg - j);
        red.kstar_fn = RatFn{acc, pow_int(den, kdeg)};
        red.kstar = divide_exact(acc, pow_int(den, kdeg));
    }
    return red;
}

BracketCheck reduced_bracket_check(const ExtendedSystem& sys, const CanonicalMap& map,
                                   const ReducedSystem& red, const SymExpr& f,
                                   const SymExpr& g) {
    (void)sys;
    if (!red.q1star)
        throw EmqError("bracket restriction needs a polynomial root for the gauge coordinate");
    const auto znew = map.sp_new;
    std::map<int, SymExpr> star;
    star[map.gauge_p()] = SymExpr::zero(znew);
    star[map.gauge_q()] = *red.q1star;
    for (int i = 0; i < map.n_constraint_pairs; ++i) {
        star[map.constraint_p(i)] = SymExpr::zero(znew);
        star[map.constraint_q(i)] = SymExpr::zero(znew);
    }

    BracketCheck chk;
    SymExpr fs = substitute(transform(map, f), star);
    SymExpr gs = substitute(transform(map, g), star);
    chk.lhs = substitute(transform(map, poisson(f, g)), star);
    chk.rhs = SymExpr::zero(znew);
    for (int i = 0; i < map.n_physical(); ++i) {
        const int qb = map.physical_q(i), pb = map.physical_p(i);
        chk.rhs += differentiate(fs, qb) * differentiate(gs, pb) -
                   differentiate(fs, pb) * differentiate(gs, qb);
    }
    chk.residual = chk.lhs - chk.rhs;
    return chk;
}

} // namespace emq
