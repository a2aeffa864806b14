#pragma once

#include "emq/dirac.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace emq {

// Numeric trajectory of the doubled system on [t1, t2] with fixed step dt.
// Slice i holds q(t_i), qb(t_i), the fundamental matrix K(t_i) of the mirror
// equation (K(t1) = identity), and the running integral of div f.  If the
// state leaves the finite range the trajectory is cut short and `truncated`
// carries a diagnostic; everything stored is still valid up to the last slice.
struct Trajectory {
    ExtendedSystem sys;
    std::map<int, double> params;

    double t1 = 0.0, t2 = 0.0, dt = 0.0;
    int n = 0;

    std::vector<double> times;
    std::vector<std::vector<double>> q;    // [slice][a]
    std::vector<std::vector<double>> qb;   // [slice][a]
    std::vector<std::vector<std::vector<double>>> k;  // [slice][a][b], row-major
    std::vector<double> divint;            // [slice]

    bool truncated = false;
    std::string diagnostic;

    int slices() const { return static_cast<int>(times.size()); }
};

// Classic fourth-order Runge-Kutta on the joint state
//   dq_a/dt  = f_a(q)
//   dqb_a/dt = -sum_b qb_b J_ba,   J_ba = df_b/dq_a
//   dK/dt    = -J^T K
//   d(divint)/dt = tr J
// with all stages sharing the same J(q).  The horizon must be a whole number
// of steps.  q0/qb0 are in coordinate order 0..n-1.
Trajectory integrate(const ExtendedSystem& sys,
                     const std::vector<double>& q0,
                     const std::vector<double>& qb0,
                     double t2, double dt,
                     const std::map<int, double>& params = {});

// Worst relative drift of each charge over the trajectory:
//   max_t |C(t) - C(t1)| / max(1, |C(t1)|).
// Charges may involve q, qb and parameters.
std::vector<double> conservation_report(const Trajectory& traj,
                                        const std::vector<SymExpr>& charges);

struct IdentityCheck {
    double lhs = 0.0, rhs = 0.0, rel_err = 0.0;
};

// Determinant of the retarded lattice operator d/dt + J with the half-weight
// convention on the diagonal: lhs = prod_i det(I + dt/2 J(t_i)) over the left
// endpoint of every step, rhs = exp(divint/2).  The identity holds up to a
// discretisation error that is first order in dt.
IdentityCheck detm_identity_check(const Trajectory& traj);

// detK(t2)/detK(t1) against exp(-divint).  Throws if detK(t1) vanishes.
IdentityCheck wronskian_check(const Trajectory& traj);

// Determinant of K at a given slice (partial-pivot elimination).
double slice_detk(const Trajectory& traj, int slice);

// CSV dump, one row per slice:
//   t,q_1..q_N,qb_1..qb_N,detK,divint
// with %.17g formatting (round-trips doubles).
std::string trajectory_csv(const Trajectory& traj);

// Gradient callback for the relaxation flow: out = dA/dq at q.  Must be safe
// to call concurrently; the ensemble runs it from worker threads.
using GradientFn =
    std::function<void(const std::vector<double>& q, std::vector<double>& out)>;

struct LangevinResult {
    int samples = 0;
    double tau_end = 0.0, dtau = 0.0, hbar = 0.0;
    std::vector<double> det_final;   // noiseless endpoint, dim entries
    std::vector<double> sq_dev;      // per-sample |q - det_final|^2, sample order
    double msd = 0.0;                // mean of sq_dev
};

// Euler-Maruyama ensemble for dq/dtau = -grad A(q) + nu with white noise of
// variance 2*hbar per unit tau.  Each sample owns a counter-seeded generator,
// so the parallel and serial paths produce bitwise identical results; the
// reduction always runs serially in sample order.
LangevinResult langevin_ensemble(const GradientFn& grad, int dim,
                                 const std::vector<double>& q0,
                                 double hbar, int samples,
                                 double tau_end, double dtau,
                                 std::uint64_t seed, bool parallel = true);

}  // namespace emq
