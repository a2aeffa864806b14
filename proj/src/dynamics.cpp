#include "emq/dynamics.hpp"
#include "emq/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace emq {

namespace {

// Flow data prepared once per trajectory: symbol ids for q/qb and the
// Jacobian entries J[b][a] = df_b/dq_a as expressions.
struct Flow {
    int n = 0;
    std::vector<int> qsym, qbsym;
    std::vector<SymExpr> f;
    std::vector<std::vector<SymExpr>> jac;
    std::map<int, double> vals;  // params plus current coordinates

    Flow(const ExtendedSystem& sys, const std::map<int, double>& params)
        : n(sys.n()), f(sys.f), vals(params) {
        for (int a = 0; a < n; ++a) {
            qsym.push_back(sys.sp->coord(a));
            qbsym.push_back(sys.sp->aux_coord(a));
        }
        jac.resize(static_cast<std::size_t>(n));
        for (int b = 0; b < n; ++b)
            for (int a = 0; a < n; ++a)
                jac[static_cast<std::size_t>(b)].push_back(
                    differentiate(sys.f[static_cast<std::size_t>(b)], qsym[static_cast<std::size_t>(a)]));
    }

    // J and f at the point q; J is row-major, J[b*n+a] = df_b/dq_a.
    void eval(const std::vector<double>& q, std::vector<double>& fv,
              std::vector<double>& J) {
        for (int a = 0; a < n; ++a) vals[qsym[static_cast<std::size_t>(a)]] = q[static_cast<std::size_t>(a)];
        for (int b = 0; b < n; ++b) {
            fv[static_cast<std::size_t>(b)] = evaluate(f[static_cast<std::size_t>(b)], vals);
            for (int a = 0; a < n; ++a)
                J[static_cast<std::size_t>(b * n + a)] =
                    evaluate(jac[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)], vals);
        }
    }
};

// Joint state: q, qb, K (row-major n*n), divint.
struct State {
    std::vector<double> q, qb, K;
    double div = 0.0;
};

State axpy(const State& s, double h, const State& d) {
    State out = s;
    for (std::size_t i = 0; i < out.q.size(); ++i) out.q[i] += h * d.q[i];
    for (std::size_t i = 0; i < out.qb.size(); ++i) out.qb[i] += h * d.qb[i];
    for (std::size_t i = 0; i < out.K.size(); ++i) out.K[i] += h * d.K[i];
    out.div += h * d.div;
    return out;
}

State deriv(Flow& fl, const State& s) {
    const int n = fl.n;
    State d;
    d.q.resize(static_cast<std::size_t>(n));
    d.qb.assign(static_cast<std::size_t>(n), 0.0);
    d.K.assign(static_cast<std::size_t>(n * n), 0.0);
    std::vector<double> J(static_cast<std::size_t>(n * n));
    fl.eval(s.q, d.q, J);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            d.qb[static_cast<std::size_t>(a)] -=
                s.qb[static_cast<std::size_t>(b)] * J[static_cast<std::size_t>(b * n + a)];
    for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c) {
            double acc = 0.0;
            for (int b = 0; b < n; ++b)
                acc -= J[static_cast<std::size_t>(b * n + a)] * s.K[static_cast<std::size_t>(b * n + c)];
            d.K[static_cast<std::size_t>(a * n + c)] = acc;
        }
    d.div = 0.0;
    for (int a = 0; a < n; ++a) d.div += J[static_cast<std::size_t>(a * n + a)];
    return d;
}

bool finite_state(const State& s) {
    for (double v : s.q) if (!std::isfinite(v)) return false;
    for (double v : s.qb) if (!std::isfinite(v)) return false;
    for (double v : s.K) if (!std::isfinite(v)) return false;
    return std::isfinite(s.div);
}

double det_dense(std::vector<double> A, int n) {
    double d = 1.0;
    for (int c = 0; c < n; ++c) {
        int p = c;
        for (int r = c + 1; r < n; ++r)
            if (std::fabs(A[static_cast<std::size_t>(r * n + c)]) >
                std::fabs(A[static_cast<std::size_t>(p * n + c)]))
                p = r;
        if (A[static_cast<std::size_t>(p * n + c)] == 0.0) return 0.0;
        if (p != c) {
            for (int k = 0; k < n; ++k)
                std::swap(A[static_cast<std::size_t>(c * n + k)], A[static_cast<std::size_t>(p * n + k)]);
            d = -d;
        }
        const double piv = A[static_cast<std::size_t>(c * n + c)];
        d *= piv;
        for (int r = c + 1; r < n; ++r) {
            const double m = A[static_cast<std::size_t>(r * n + c)] / piv;
            for (int k = c; k < n; ++k)
                A[static_cast<std::size_t>(r * n + k)] -= m * A[static_cast<std::size_t>(c * n + k)];
        }
    }
    return d;
}

long long step_count(double span, double dt, const char* what) {
    if (!(dt > 0.0)) throw EmqError(std::string(what) + ": step must be positive");
    if (span < 0.0) throw EmqError(std::string(what) + ": horizon must be nonnegative");
    const long long s = static_cast<long long>(std::llround(span / dt));
    if (std::fabs(static_cast<double>(s) * dt - span) > 1e-9 * std::max(1.0, std::fabs(span)))
        throw EmqError(std::string(what) + ": horizon is not a whole number of steps");
    return s;
}

}  // namespace

Trajectory integrate(const ExtendedSystem& sys,
                     const std::vector<double>& q0,
                     const std::vector<double>& qb0,
                     double t2, double dt,
                     const std::map<int, double>& params) {
    const int n = sys.n();
    if (static_cast<int>(q0.size()) != n || static_cast<int>(qb0.size()) != n)
        throw EmqError("integrate: initial state has the wrong dimension");
    const long long steps = step_count(t2, dt, "integrate");

    Flow fl(sys, params);
    Trajectory traj;
    traj.sys = sys;
    traj.params = params;
    traj.t1 = 0.0;
    traj.t2 = t2;
    traj.dt = dt;
    traj.n = n;

    State s;
    s.q = q0;
    s.qb = qb0;
    s.K.assign(static_cast<std::size_t>(n * n), 0.0);
    for (int a = 0; a < n; ++a) s.K[static_cast<std::size_t>(a * n + a)] = 1.0;
    s.div = 0.0;

    auto store = [&](double t, const State& st) {
        traj.times.push_back(t);
        traj.q.push_back(st.q);
        traj.qb.push_back(st.qb);
        std::vector<std::vector<double>> K(static_cast<std::size_t>(n));
        for (int a = 0; a < n; ++a)
            K[static_cast<std::size_t>(a)].assign(
                st.K.begin() + a * n, st.K.begin() + (a + 1) * n);
        traj.k.push_back(std::move(K));
        traj.divint.push_back(st.div);
    };
    store(0.0, s);

    for (long long i = 0; i < steps; ++i) {
        const State k1 = deriv(fl, s);
        const State k2 = deriv(fl, axpy(s, dt / 2, k1));
        const State k3 = deriv(fl, axpy(s, dt / 2, k2));
        const State k4 = deriv(fl, axpy(s, dt, k3));
        State next = s;
        const double w = dt / 6;
        for (std::size_t j = 0; j < next.q.size(); ++j)
            next.q[j] += w * (k1.q[j] + 2 * k2.q[j] + 2 * k3.q[j] + k4.q[j]);
        for (std::size_t j = 0; j < next.qb.size(); ++j)
            next.qb[j] += w * (k1.qb[j] + 2 * k2.qb[j] + 2 * k3.qb[j] + k4.qb[j]);
        for (std::size_t j = 0; j < next.K.size(); ++j)
            next.K[j] += w * (k1.K[j] + 2 * k2.K[j] + 2 * k3.K[j] + k4.K[j]);
        next.div += w * (k1.div + 2 * k2.div + 2 * k3.div + k4.div);

        const double t = static_cast<double>(i + 1) * dt;
        if (!finite_state(next)) {
            traj.truncated = true;
            char buf[96];
            std::snprintf(buf, sizeof buf, "non-finite state reached at t=%.9g", t);
            traj.diagnostic = buf;
            traj.t2 = traj.times.back();
            return traj;
        }
        s = std::move(next);
        store(t, s);
    }
    return traj;
}

std::vector<double> conservation_report(const Trajectory& traj,
                                        const std::vector<SymExpr>& charges) {
    std::map<int, double> vals(traj.params);
    auto bind = [&](int slice) {
        for (int a = 0; a < traj.n; ++a) {
            vals[traj.sys.sp->coord(a)] = traj.q[static_cast<std::size_t>(slice)][static_cast<std::size_t>(a)];
            vals[traj.sys.sp->aux_coord(a)] = traj.qb[static_cast<std::size_t>(slice)][static_cast<std::size_t>(a)];
        }
    };
    std::vector<double> drift;
    for (const SymExpr& c : charges) {
        bind(0);
        const double c0 = evaluate(c, vals);
        double worst = 0.0;
        for (int i = 1; i < traj.slices(); ++i) {
            bind(i);
            worst = std::max(worst, std::fabs(evaluate(c, vals) - c0));
        }
        drift.push_back(worst / std::max(1.0, std::fabs(c0)));
    }
    return drift;
}

IdentityCheck detm_identity_check(const Trajectory& traj) {
    Flow fl(traj.sys, traj.params);
    const int n = traj.n;
    std::vector<double> fv(static_cast<std::size_t>(n)), J(static_cast<std::size_t>(n * n));
    std::vector<double> M(static_cast<std::size_t>(n * n));
    IdentityCheck out;
    out.lhs = 1.0;
    for (int i = 0; i + 1 < traj.slices(); ++i) {
        fl.eval(traj.q[static_cast<std::size_t>(i)], fv, J);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                M[static_cast<std::size_t>(a * n + b)] =
                    (a == b ? 1.0 : 0.0) + 0.5 * traj.dt * J[static_cast<std::size_t>(a * n + b)];
        out.lhs *= det_dense(M, n);
    }
    out.rhs = std::exp(0.5 * traj.divint.back());
    out.rel_err = std::fabs(out.lhs - out.rhs) / std::max(std::fabs(out.rhs), 1e-300);
    return out;
}

IdentityCheck wronskian_check(const Trajectory& traj) {
    const double d1 = slice_detk(traj, 0);
    if (d1 == 0.0)
        throw EmqError("wronskian_check: fundamental matrix is singular at the first slice");
    IdentityCheck out;
    out.lhs = slice_detk(traj, traj.slices() - 1) / d1;
    out.rhs = std::exp(-traj.divint.back());
    out.rel_err = std::fabs(out.lhs - out.rhs) / std::max(std::fabs(out.rhs), 1e-300);
    return out;
}

double slice_detk(const Trajectory& traj, int slice) {
    const int n = traj.n;
    std::vector<double> A(static_cast<std::size_t>(n * n));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            A[static_cast<std::size_t>(a * n + b)] =
                traj.k[static_cast<std::size_t>(slice)][static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    return det_dense(std::move(A), n);
}

std::string trajectory_csv(const Trajectory& traj) {
    std::string out = "t";
    char buf[64];
    for (int a = 1; a <= traj.n; ++a) {
        std::snprintf(buf, sizeof buf, ",q_%d", a);
        out += buf;
    }
    for (int a = 1; a <= traj.n; ++a) {
        std::snprintf(buf, sizeof buf, ",qb_%d", a);
        out += buf;
    }
    out += ",detK,divint\n";
    auto put = [&](double v, char lead) {
        std::snprintf(buf, sizeof buf, "%c%.17g", lead, v);
        out += buf;
    };
    for (int i = 0; i < traj.slices(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", traj.times[static_cast<std::size_t>(i)]);
        out += buf;
        for (int a = 0; a < traj.n; ++a)
            put(traj.q[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)], ',');
        for (int a = 0; a < traj.n; ++a)
            put(traj.qb[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)], ',');
        put(slice_detk(traj, i), ',');
        put(traj.divint[static_cast<std::size_t>(i)], ',');
        out += '\n';
    }
    return out;
}

namespace {

// One Euler-Maruyama path; amp = sqrt(2*hbar*dtau).  eng == nullptr runs the
// noiseless flow through the identical update expression, so a zero-amplitude
// noisy path lands on bitwise the same endpoint.
void em_path(const GradientFn& grad, int dim, std::vector<double>& q,
             long long steps, double dtau, double amp, std::mt19937_64* eng) {
    std::vector<double> g(static_cast<std::size_t>(dim));
    std::normal_distribution<double> nd(0.0, 1.0);
    for (long long i = 0; i < steps; ++i) {
        grad(q, g);
        for (int a = 0; a < dim; ++a) {
            const double draw = eng ? nd(*eng) : 0.0;
            q[static_cast<std::size_t>(a)] += -dtau * g[static_cast<std::size_t>(a)] + amp * draw;
        }
    }
}

}  // namespace

LangevinResult langevin_ensemble(const GradientFn& grad, int dim,
                                 const std::vector<double>& q0,
                                 double hbar, int samples,
                                 double tau_end, double dtau,
                                 std::uint64_t seed, bool parallel) {
    if (dim <= 0 || static_cast<int>(q0.size()) != dim)
        throw EmqError("langevin_ensemble: bad dimension");
    if (samples <= 0) throw EmqError("langevin_ensemble: sample count must be positive");
    if (hbar < 0.0) throw EmqError("langevin_ensemble: hbar must be nonnegative");
    const long long steps = step_count(tau_end, dtau, "langevin_ensemble");

    LangevinResult res;
    res.samples = samples;
    res.tau_end = tau_end;
    res.dtau = dtau;
    res.hbar = hbar;

    res.det_final = q0;
    em_path(grad, dim, res.det_final, steps, dtau, 0.0, nullptr);

    const double amp = std::sqrt(2.0 * hbar * dtau);
    res.sq_dev.assign(static_cast<std::size_t>(samples), 0.0);

    auto run_sample = [&](int s) {
        std::mt19937_64 eng(sample_seed(seed, static_cast<std::uint64_t>(s)));
        std::vector<double> q = q0;
        em_path(grad, dim, q, steps, dtau, amp, &eng);
        double acc = 0.0;
        for (int a = 0; a < dim; ++a) {
            const double d = q[static_cast<std::size_t>(a)] - res.det_final[static_cast<std::size_t>(a)];
            acc += d * d;
        }
        res.sq_dev[static_cast<std::size_t>(s)] = acc;
    };

#ifdef EMQ_HAVE_OPENMP
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int s = 0; s < samples; ++s) run_sample(s);
    } else {
        for (int s = 0; s < samples; ++s) run_sample(s);
    }
#else
    (void)parallel;
    for (int s = 0; s < samples; ++s) run_sample(s);
#endif

    // Serial reduction in sample order keeps the result independent of the
    // thread count.
    double total = 0.0;
    for (double v : res.sq_dev) total += v;
    res.msd = total / static_cast<double>(samples);
    return res;
}

}  // namespace emq
