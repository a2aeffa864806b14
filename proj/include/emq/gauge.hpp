#pragma once

#include "emq/dirac.hpp"

#include <optional>
#include <string>

namespace emq {

// Linear canonical change of frame w = M z + offset on the ordered phase
// vector z = (q, p, qb, pb).  Labels name the new variables; each tag pairs a
// P row with a Q row ({Q, P} = +1).  Tag "1" is the gauge pair, integer tags
// 2..N+1 carry the second-class constraints, the rest are physical.
class CanonicalMap {
public:
    struct PairInfo {
        std::string tag;
        int p_row, q_row;   // row indices into labels/matrix
    };

    std::shared_ptr<const PhaseSpace> sp_old, sp_new;
    std::vector<std::string> labels;
    std::vector<std::vector<SymExpr>> mat;   // entries: parameter constants (old space)
    std::vector<SymExpr> offset;
    std::vector<SymExpr> rows;               // w_r as an old-space expression

    std::vector<PairInfo> pairs;             // gauge, constraints ascending, physical
    int n_constraint_pairs = 0;

    int gauge_q() const { return sp_new->coord(0); }       // Q1 symbol id
    int gauge_p() const { return sp_new->momentum(0); }    // P1 symbol id
    int constraint_q(int i) const { return sp_new->coord(1 + i); }
    int constraint_p(int i) const { return sp_new->momentum(1 + i); }
    int physical_q(int i) const { return sp_new->coord(1 + n_constraint_pairs + i); }
    int physical_p(int i) const { return sp_new->momentum(1 + n_constraint_pairs + i); }
    int n_physical() const { return sp_new->n_pairs() - 1 - n_constraint_pairs; }

    const std::map<int, SymExpr>& bindings() const { return bind_; }

    friend CanonicalMap make_canonical_map(const ExtendedSystem&,
                                           const std::vector<std::string>&,
                                           const std::vector<std::vector<SymExpr>>&,
                                           const std::vector<SymExpr>&);

private:
    std::map<int, SymExpr> bind_;   // old symbol -> new-space expression
};

// Builds the map, checks the label partition, certifies {w_r, w_s} = J_w
// entry by entry in exact arithmetic, and inverts through the symplectic
// closed form Minv = J M^T Jw^-1 (verified by M Minv = 1).
CanonicalMap make_canonical_map(const ExtendedSystem& sys,
                                const std::vector<std::string>& labels,
                                const std::vector<std::vector<SymExpr>>& matrix,
                                const std::vector<SymExpr>& offset);

SymExpr transform(const CanonicalMap& map, const SymExpr& e);

struct GaugeReport {
    std::vector<SymExpr> chi_phi_i;   // brackets with the 2N second-class constraints
    bool commutes;                    // all of them vanish identically
    SymExpr chi_phi;                  // bracket with the first-class constraint
    bool nondegenerate;               // not identically zero
    bool ok() const { return commutes && nondegenerate; }
};

GaugeReport validate_gauge(const ExtendedSystem& sys, const InfoLossSet& cs,
                           const SymExpr& chi);

// row_checks: P1 must reproduce chi, P(1+i)/Q(1+i) the interleaved constraints
void check_map_rows(const ExtendedSystem& sys, const CanonicalMap& map, const SymExpr& chi);

struct ReducedSystem {
    SymExpr chi;          // old frame
    SymExpr first_class;  // old frame
    SymExpr K;            // new frame, physical variables + Q1
    SymExpr phi_gamma;    // first-class constraint on Gamma*, polynomial in Q1

    int gribov_degree = 0;          // 1, or 2 with vanishing discriminant
    RatFn q1star_fn;                // root of phi_gamma as an exact pair
    std::optional<SymExpr> q1star;  // polynomial form when the division is exact
    RatFn kstar_fn;
    std::optional<SymExpr> kstar;
};

ReducedSystem reduce(const ExtendedSystem& sys, const InfoLossSet& cs,
                     const SymExpr& chi, const CanonicalMap& map);

struct BracketCheck {
    SymExpr lhs;       // full-space bracket, transformed and restricted
    SymExpr rhs;       // physical-pair bracket of the starred functions
    SymExpr residual;  // lhs - rhs
};

BracketCheck reduced_bracket_check(const ExtendedSystem& sys, const CanonicalMap& map,
                                   const ReducedSystem& red, const SymExpr& f,
                                   const SymExpr& g);

} // namespace emq
