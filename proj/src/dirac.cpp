#include "emq/dirac.hpp"

namespace emq {

namespace {

// Gaussian elimination over Q(sqrt2); rhs rows are expressions
std::vector<SymExpr> solve_const_system(std::vector<std::vector<Quad>> m,
                                        std::vector<SymExpr> rhs, Quad* det_out) {
    const int n = int(m.size());
    Quad det(1);
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        for (int r = col; r < n; ++r)
            if (!m[size_t(r)][size_t(col)].is_zero()) {
                piv = r;
                break;
            }
        if (piv < 0) throw EmqError("constraint bracket matrix is singular");
        if (piv != col) {
            std::swap(m[size_t(piv)], m[size_t(col)]);
            std::swap(rhs[size_t(piv)], rhs[size_t(col)]);
            det = -det;
        }
        Quad p = m[size_t(col)][size_t(col)];
        det *= p;
        Quad pinv = p.inverse();
        for (int c = col; c < n; ++c) m[size_t(col)][size_t(c)] *= pinv;
        rhs[size_t(col)] = rhs[size_t(col)].scaled(pinv);
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            Quad factor = m[size_t(r)][size_t(col)];
            if (factor.is_zero()) continue;
            for (int c = col; c < n; ++c)
                m[size_t(r)][size_t(c)] -= factor * m[size_t(col)][size_t(c)];
            rhs[size_t(r)] -= rhs[size_t(col)].scaled(factor);
        }
    }
    if (det_out) *det_out = det;
    return rhs;
}

Quad quad_det(std::vector<std::vector<Quad>> m) {
    const int n = int(m.size());
    Quad det(1);
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        for (int r = col; r < n; ++r)
            if (!m[size_t(r)][size_t(col)].is_zero()) {
                piv = r;
                break;
            }
        if (piv < 0) return Quad(0);
        if (piv != col) {
            std::swap(m[size_t(piv)], m[size_t(col)]);
            det = -det;
        }
        Quad p = m[size_t(col)][size_t(col)];
        det *= p;
        Quad pinv = p.inverse();
        for (int r = col + 1; r < n; ++r) {
            Quad factor = m[size_t(r)][size_t(col)] * pinv;
            if (factor.is_zero()) continue;
            for (int c = col; c < n; ++c)
                m[size_t(r)][size_t(c)] -= factor * m[size_t(col)][size_t(c)];
        }
    }
    return det;
}

} // namespace

ExtendedSystem build_extended_system(std::shared_ptr<const PhaseSpace> sp,
                                     std::vector<SymExpr> f) {
    if (!sp->is_doubled())
        throw EmqError("extended system requires a doubled phase space");
    const int n = sp->n_pairs();
    if (int(f.size()) != n)
        throw EmqError("flow component count does not match coordinate count");
    for (int a = 0; a < n; ++a) {
        const SymExpr& fa = f[size_t(a)];
        if (fa.space().get() != sp.get())
            throw EmqError("flow component lives in the wrong phase space");
        for (int b = 0; b < n; ++b) {
            if (fa.depends_on(sp->momentum(b)) || fa.depends_on(sp->aux_coord(b)) ||
                fa.depends_on(sp->aux_momentum(b)))
                throw EmqError("flow component f_" + sp->name(sp->coord(a)) +
                               " must depend on coordinates only");
        }
    }

    ExtendedSystem sys;
    sys.sp = sp;
    sys.f = std::move(f);
    sys.H = SymExpr::zero(sp);
    sys.Hbar = SymExpr::zero(sp);
    sys.lag_pot = SymExpr::zero(sp);
    for (int a = 0; a < n; ++a) {
        auto p = SymExpr::symbol(sp, sp->momentum(a));
        auto qb = SymExpr::symbol(sp, sp->aux_coord(a));
        sys.H += p * sys.f[size_t(a)];
        sys.Hbar += qb * sys.f[size_t(a)];
        sys.vel_coeff.push_back(qb);
        sys.constraints.push_back(p - qb);
        sys.constraints.push_back(SymExpr::symbol(sp, sp->aux_momentum(a)));
    }
    sys.lag_pot = -sys.Hbar;
    return sys;
}

SymExpr on_constraint_surface(const ExtendedSystem& sys, const SymExpr& e) {
    std::map<int, SymExpr> bind;
    for (int a = 0; a < sys.n(); ++a) {
        bind[sys.sp->momentum(a)] = SymExpr::symbol(sys.sp, sys.sp->aux_coord(a));
        bind[sys.sp->aux_momentum(a)] = SymExpr::zero(sys.sp);
    }
    return substitute(e, bind);
}

MultiplierSolution solve_multipliers(const ExtendedSystem& sys) {
    const int m = 2 * sys.n();
    MultiplierSolution out;
    out.bracket.assign(size_t(m), std::vector<SymExpr>(size_t(m), SymExpr::zero(sys.sp)));
    std::vector<std::vector<Quad>> b;
    b.assign(size_t(m), std::vector<Quad>(size_t(m)));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            SymExpr br = poisson(sys.constraints[size_t(i)], sys.constraints[size_t(j)]);
            if (!br.is_constant())
                throw EmqError("primary constraint bracket is not constant");
            out.bracket[size_t(i)][size_t(j)] = br;
            b[size_t(i)][size_t(j)] = br.constant_value();
        }
    std::vector<SymExpr> rhs;
    for (int i = 0; i < m; ++i)
        rhs.push_back(-poisson(sys.constraints[size_t(i)], sys.Hbar));
    out.u = solve_const_system(b, std::move(rhs), &out.det);
    out.total_h = sys.Hbar;
    for (int j = 0; j < m; ++j)
        out.total_h += out.u[size_t(j)] * sys.constraints[size_t(j)];
    return out;
}

ChargeSpec make_charge(const ExtendedSystem& sys, SymExpr C, SymExpr coeff) {
    if (C.space().get() != sys.sp.get() || coeff.space().get() != sys.sp.get())
        throw EmqError("charge lives in the wrong phase space");
    bool aux = false;
    for (int a = 0; a < sys.n(); ++a) {
        if (C.depends_on(sys.sp->momentum(a)) || C.depends_on(sys.sp->aux_momentum(a)))
            throw EmqError("charge must not depend on momenta");
        if (C.depends_on(sys.sp->aux_coord(a))) aux = true;
    }
    for (int i = 0; i < sys.sp->phase_dim(); ++i)
        if (coeff.depends_on(i))
            throw EmqError("charge coefficient must be a parameter constant");
    return {std::move(C), std::move(coeff), aux};
}

std::vector<ChargeCheck> verify_charges(const ExtendedSystem& sys,
                                        const std::vector<ChargeSpec>& charges) {
    std::vector<ChargeCheck> out;
    for (const auto& ch : charges) {
        ChargeCheck r{SymExpr::zero(sys.sp), false, SymExpr::zero(sys.sp), true};
        r.bracket_with_h = poisson(ch.C, sys.H);
        r.conserved = r.bracket_with_h.is_zero();
        if (ch.has_aux) {
            for (int a = 0; a < sys.n(); ++a)
                r.compat += differentiate(ch.C, sys.sp->aux_coord(a)) *
                            differentiate(sys.Hbar, sys.sp->coord(a));
            r.compat_ok = r.compat.is_zero();
        }
        out.push_back(std::move(r));
    }
    return out;
}

HSplit build_h_split(const ExtendedSystem& sys, const std::vector<ChargeSpec>& charges) {
    if (charges.empty()) throw EmqError("splitting H requires at least one charge");
    HSplit out{SymExpr::zero(sys.sp), {}, {}, false, false};
    for (const auto& ch : charges) out.s += ch.coeff * ch.C;
    SymExpr den = out.s.scaled(Quad(4));
    SymExpr hp = sys.H + out.s;
    SymExpr hm = sys.H - out.s;
    out.plus = {hp * hp, den};
    out.minus = {hm * hm, den};
    out.difference_ok = (out.plus.num - out.minus.num) == (sys.H * den);
    out.minus_is_square = out.minus.num == hm * hm;
    return out;
}

InfoLossSet information_loss_constraint(const ExtendedSystem& sys,
                                        const std::vector<ChargeSpec>& charges) {
    const int n = sys.n();
    const int m = 2 * n + 1;
    InfoLossSet out;
    out.phi0 = sys.Hbar;
    for (const auto& ch : charges) out.phi0 -= ch.coeff * ch.C;

    out.all.push_back(out.phi0);
    for (const auto& c : sys.constraints) out.all.push_back(c);

    out.e.assign(size_t(m), SymExpr::zero(sys.sp));
    out.e[0] = SymExpr::constant(sys.sp, Quad(1));
    for (int a = 0; a < n; ++a) {
        out.e[size_t(1 + 2 * a)] = differentiate(out.phi0, sys.sp->aux_coord(a));
        out.e[size_t(2 + 2 * a)] = -differentiate(out.phi0, sys.sp->coord(a));
    }

    out.bracket.assign(size_t(m), std::vector<SymExpr>(size_t(m), SymExpr::zero(sys.sp)));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            out.bracket[size_t(i)][size_t(j)] = poisson(out.all[size_t(i)], out.all[size_t(j)]);

    out.kernel_ok = true;
    for (int j = 0; j < m; ++j) {
        SymExpr col = SymExpr::zero(sys.sp);
        for (int i = 0; i < m; ++i)
            col += out.e[size_t(i)] * out.bracket[size_t(i)][size_t(j)];
        if (!col.is_zero()) out.kernel_ok = false;
    }

    std::vector<std::vector<Quad>> minor(size_t(2 * n), std::vector<Quad>(size_t(2 * n)));
    for (int i = 0; i < 2 * n; ++i)
        for (int j = 0; j < 2 * n; ++j) {
            const SymExpr& br = out.bracket[size_t(i + 1)][size_t(j + 1)];
            if (!br.is_constant())
                throw EmqError("second-class bracket block is not constant");
            minor[size_t(i)][size_t(j)] = br.constant_value();
        }
    out.minor_det = quad_det(minor);
    out.rank_ok = !out.minor_det.is_zero();

    out.first_class = SymExpr::zero(sys.sp);
    for (int i = 0; i < m; ++i)
        out.first_class += out.e[size_t(i)] * out.all[size_t(i)];

    SymExpr d2 = SymExpr::zero(sys.sp);
    for (int i = 0; i < m; ++i)
        d2 += out.e[size_t(i)] * poisson(out.all[size_t(i)], sys.Hbar);
    out.d2_ok = d2.is_zero();

    out.weak_first_class = true;
    for (int j = 0; j < m; ++j) {
        SymExpr br = poisson(out.first_class, out.all[size_t(j)]);
        if (!on_constraint_surface(sys, br).is_zero()) out.weak_first_class = false;
    }

    SymExpr target = sys.H;
    for (const auto& ch : charges) target -= ch.coeff * ch.C;
    out.weak_identity_ok =
        on_constraint_surface(sys, out.first_class) == on_constraint_surface(sys, target);

    out.classes.push_back("first-class combination");
    for (int i = 0; i < 2 * n; ++i) out.classes.push_back("second-class");
    return out;
}

} // namespace emq
