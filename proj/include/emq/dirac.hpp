#pragma once

#include "emq/symexpr.hpp"

#include <vector>

namespace emq {

// First-order system q'_a = f_a(q) promoted to the extended phase space.
// The auxiliary pair (qb, pb) enters through the velocity-linear Lagrangian
// qb.(q' - f); its Hamiltonian Hbar = sum qb_a f_a carries the dynamics while
// the definitions of the momenta survive as the constraint set
//   phi1_a = p_a - qb_a,   phi2_a = pb_a
// stored interleaved: constraints[2a] = phi1_a, constraints[2a+1] = phi2_a.
struct ExtendedSystem {
    std::shared_ptr<const PhaseSpace> sp;
    std::vector<SymExpr> f;
    SymExpr H;        // sum p_a f_a, the generator on the constraint surface
    SymExpr Hbar;     // sum qb_a f_a
    std::vector<SymExpr> vel_coeff;   // dL/dq'_a = qb_a
    SymExpr lag_pot;                  // -sum qb_a f_a
    std::vector<SymExpr> constraints; // 2N primary constraints, interleaved

    int n() const { return int(f.size()); }
};

ExtendedSystem build_extended_system(std::shared_ptr<const PhaseSpace> sp,
                                     std::vector<SymExpr> f);

// replace p_a -> qb_a, pb_a -> 0 (evaluation on the primary surface)
SymExpr on_constraint_surface(const ExtendedSystem& sys, const SymExpr& e);

struct MultiplierSolution {
    std::vector<std::vector<SymExpr>> bracket; // {phi_i, phi_j}, 2N x 2N
    Quad det;                                  // of the bracket matrix
    std::vector<SymExpr> u;                    // multipliers fixed by consistency
    SymExpr total_h;                           // Hbar + sum u_j phi_j
};

// The constraint brackets form a constant invertible matrix, so every
// multiplier is fixed: solve {phi_i, Hbar} + sum_j u_j {phi_i, phi_j} = 0.
MultiplierSolution solve_multipliers(const ExtendedSystem& sys);

struct ChargeSpec {
    SymExpr C;       // function of coordinates (and possibly auxiliaries)
    SymExpr coeff;   // parameter constant a_i
    bool has_aux;
};

ChargeSpec make_charge(const ExtendedSystem& sys, SymExpr C, SymExpr coeff);

struct ChargeCheck {
    SymExpr bracket_with_h;   // {C, H}
    bool conserved;
    SymExpr compat;           // sum_a dC/dqb_a . dHbar/dq_a (aux charges only)
    bool compat_ok;
};

std::vector<ChargeCheck> verify_charges(const ExtendedSystem& sys,
                                        const std::vector<ChargeSpec>& charges);

struct RatFn {
    SymExpr num, den;
};

// H = H+ - H- with H+- = (H +- S)^2 / 4S, S = sum a_i C_i.  Kept as exact
// numerator/denominator pairs; the identities certifying the split are
//   num+ - num- = H . 4S      (difference recovers H)
//   num- = (H - S)^2          (H- vanishes where H = S)
struct HSplit {
    SymExpr s;
    RatFn plus, minus;
    bool difference_ok;
    bool minus_is_square;
};

HSplit build_h_split(const ExtendedSystem& sys, const std::vector<ChargeSpec>& charges);

struct InfoLossSet {
    SymExpr phi0;                    // Hbar - sum a_i C_i
    std::vector<SymExpr> all;        // [phi0, phi1_1, phi2_1, ...]
    std::vector<SymExpr> e;          // null vector of the bracket matrix
    SymExpr first_class;             // phi = sum e_i all_i
    std::vector<std::vector<SymExpr>> bracket;   // (2N+1)^2
    std::vector<std::string> classes;            // per constraint in `all`

    bool kernel_ok;        // e.M = 0 exactly
    Quad minor_det;        // det of the second-class 2N x 2N block
    bool rank_ok;          // minor invertible: rank 2N, nullity 1
    bool d2_ok;            // sum e_i {phi_i, Hbar} = 0 exactly
    bool weak_first_class; // {phi, phi_j} = 0 after surface substitution
    bool weak_identity_ok; // phi == H - S on the surface
};

InfoLossSet information_loss_constraint(const ExtendedSystem& sys,
                                        const std::vector<ChargeSpec>& charges);

} // namespace emq
