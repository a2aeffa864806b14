#pragma once

#include "emq/symexpr.hpp"

#include <string>
#include <vector>

namespace emq {

struct SpectrumReport {
    double L = 0.0;
    int n = 0;
    bool periodic = false;
    std::vector<double> eigenvalues;   // ascending, k entries
    std::vector<double> reference;     // analytic values where known
    double max_abs_dev = 0.0;          // against reference, when attached
};

// Lowest k eigenvalues of  kinetic * d^2/dx^2 + V(x)  by central differences.
// Dirichlet walls at +-L put n interior points at spacing h = 2L/(n+1) and
// give a symmetric tridiagonal matrix (solved by dstev); the periodic variant
// wraps n points at spacing h = 2L/n and goes through the dense symmetric
// solver.  V may reference at most one symbol.
SpectrumReport grid_spectrum_1d(double kinetic, const SymExpr& potential,
                                double L, int n, int k, bool periodic = false);

// Attach analytic reference values and record the worst deviation over the
// shared prefix.
void attach_reference(SpectrumReport& rep, const std::vector<double>& ref);

struct PartitionCheck {
    double z_spectrum = 0.0;
    double z_reference = 0.0;
    double rel_err = 0.0;
    double tail_estimate = 0.0;   // weight of the last kept level
};

// Sum exp(-beta E_n) over the report and compare against the closed unit
// oscillator value exp(-beta/2)/(1 - exp(-beta)).  Throws when the last level
// still carries more than 1e-4 of the sum, since the truncated tail would
// then dominate the comparison.
PartitionCheck partition_check(const SpectrumReport& rep, double beta);

// Exact verification of the quartic-pair coupling constants.  The candidate
// couplings  a2 = 1/(2 m1), a1 = a2/4, d = 1/2  are substituted into
//   A = 2 d^2 (4 a1 + a2),  B = -8 sqrt2 a1 d c^2,  C = 4 a1 c^4
// and compared against the targets 1/(2 m1), 1/sqrt(m1 m2), 1/m2.  Two
// choices of the last coupling circulate: c = (a2 m2)^(-1/4), for which
// c^4 = 2 m1/m2, and the printed specialization c = 2^(3/4) (m1/m2)^(1/4),
// for which c^4 = 8 m1/m2.  Irrational quantities are compared through their
// squares plus an explicit sign, so every verdict is exact rational
// arithmetic.
struct DuffingEntry {
    std::string name;   // "A", "B", "C"
    Rat ratio_sq;       // (value/target)^2
    int sign = 1;       // sign of value/target
    bool match = false; // ratio_sq == 1 and sign == +1
};

struct DuffingReport {
    std::vector<DuffingEntry> quarter_root;  // c^4 = 2 m1/m2
    std::vector<DuffingEntry> printed;       // c^4 = 8 m1/m2
    bool all_match(bool use_printed = false) const;
};

DuffingReport duffing_constants_check(const Rat& m1, const Rat& m2);

}  // namespace emq
