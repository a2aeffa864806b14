#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "emq/dirac.hpp"
#include "emq/symexpr.hpp"

namespace emq {

// Complex number with exact rational real and imaginary parts.  The lattice
// ghost checks are contracts on the exact zero element, so nothing here is
// allowed to round.
struct CRat {
    Rat re;
    Rat im;

    CRat() : re(0), im(0) {}
    CRat(Rat r, Rat i) : re(std::move(r)), im(std::move(i)) {}
    explicit CRat(const Rat& r) : re(r), im(0) {}

    static CRat i_unit() { return CRat(Rat(0), Rat(1)); }

    bool is_zero() const { return re == 0 && im == 0; }

    CRat operator+(const CRat& o) const { return CRat(re + o.re, im + o.im); }
    CRat operator-(const CRat& o) const { return CRat(re - o.re, im - o.im); }
    CRat operator-() const { return CRat(-re, -im); }
    CRat operator*(const CRat& o) const {
        return CRat(re * o.re - im * o.im, re * o.im + im * o.re);
    }
    bool operator==(const CRat& o) const { return re == o.re && im == o.im; }
    bool operator!=(const CRat& o) const { return !(*this == o); }

    std::string str() const;
};

// Subset of generators, stored as a 128-bit mask.  Enough for every lattice
// this project builds (the largest sweep case needs 75 generators).
struct GenMask {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;

    bool test(int i) const {
        return i < 64 ? ((lo >> i) & 1u) != 0 : ((hi >> (i - 64)) & 1u) != 0;
    }
    void set(int i) {
        if (i < 64)
            lo |= std::uint64_t(1) << i;
        else
            hi |= std::uint64_t(1) << (i - 64);
    }
    void clear(int i) {
        if (i < 64)
            lo &= ~(std::uint64_t(1) << i);
        else
            hi &= ~(std::uint64_t(1) << (i - 64));
    }
    int count() const;
    bool empty() const { return lo == 0 && hi == 0; }
    bool overlaps(const GenMask& o) const { return (lo & o.lo) != 0 || (hi & o.hi) != 0; }
    GenMask unite(const GenMask& o) const { return GenMask{lo | o.lo, hi | o.hi}; }

    bool operator==(const GenMask& o) const { return lo == o.lo && hi == o.hi; }
    bool operator<(const GenMask& o) const {
        return hi != o.hi ? hi < o.hi : lo < o.lo;
    }
};

// Sign of the permutation that merges two disjoint ascending generator
// products into one ascending product.
int merge_sign(const GenMask& a, const GenMask& b);

// Finite exterior algebra on named anticommuting generators.
class GrassmannAlgebra {
public:
    explicit GrassmannAlgebra(std::vector<std::string> names);

    int size() const { return static_cast<int>(names_.size()); }
    const std::string& name(int i) const { return names_.at(static_cast<std::size_t>(i)); }

private:
    std::vector<std::string> names_;
};

// Element of the exterior algebra: a sparse map from generator subsets to
// complex rational coefficients, with the basis product e_S e_T carrying the
// merge permutation sign and vanishing on overlapping subsets.
class GrassmannElement {
public:
    GrassmannElement() = default;

    static GrassmannElement zero(std::shared_ptr<const GrassmannAlgebra> alg);
    static GrassmannElement scalar(std::shared_ptr<const GrassmannAlgebra> alg, const CRat& c);
    static GrassmannElement generator(std::shared_ptr<const GrassmannAlgebra> alg, int i);

    const std::shared_ptr<const GrassmannAlgebra>& algebra() const { return alg_; }
    bool is_zero() const { return terms_.empty(); }
    const std::map<GenMask, CRat>& terms() const { return terms_; }
    CRat coeff(const GenMask& m) const;

    GrassmannElement operator+(const GrassmannElement& o) const;
    GrassmannElement operator-(const GrassmannElement& o) const;
    GrassmannElement operator-() const;
    GrassmannElement operator*(const GrassmannElement& o) const;
    GrassmannElement scaled(const CRat& c) const;
    bool operator==(const GrassmannElement& o) const;
    bool operator!=(const GrassmannElement& o) const { return !(*this == o); }

    void add_term(const GenMask& m, const CRat& c);   // merges, drops zeros

    std::string str() const;

private:
    std::shared_ptr<const GrassmannAlgebra> alg_;
    std::map<GenMask, CRat> terms_;
};

// Evaluates a polynomial expression on even algebra elements.  Every
// dynamical symbol of e must be bound in vals; params supplies exact values
// for the remaining parameter symbols.  Exponential factors and sqrt(2)
// coefficients are rejected: the lattice works over plain rationals.
GrassmannElement grassmann_eval(const SymExpr& e,
                                const std::map<int, GrassmannElement>& vals,
                                const std::map<int, Rat>& params);

// Discretised doubled action on a finite time grid together with the ghost
// extension built from it.
//
// Field index m runs over the 2N doubled fields: m < N are the coordinates,
// m >= N the mirror coordinates.  Each field carries one value per slice and
// one multiplier value per slice.  The generator layout reserves, after the
// c and cbar families, one BRST parameter and the two superspace directions
// (kept at the top indices so the top-form coefficient needs no permutation
// bookkeeping).
struct LatticeAction {
    std::shared_ptr<const PhaseSpace> sp;
    std::vector<SymExpr> f;                 // flow of the N coordinates
    std::map<int, Rat> params;
    int n = 0;                              // coordinates
    int nfields = 0;                        // 2N
    int slices = 0;
    Rat dt;
    std::vector<std::vector<Rat>> fields;   // [m][t]
    std::vector<std::vector<Rat>> lambda;   // [m][t]
    bool broken = false;                    // explicit symmetry-breaking term on
    std::shared_ptr<const GrassmannAlgebra> alg;
    GrassmannElement S;

    int c_gen(int m, int t) const { return m * slices + t; }
    int cbar_gen(int m, int t) const { return (nfields + m) * slices + t; }
    int eps_gen() const { return 2 * nfields * slices; }
    int theta_gen() const { return 2 * nfields * slices + 1; }
    int thetabar_gen() const { return 2 * nfields * slices + 2; }
};

// Builds the lattice action for the doubled system: forward differences in
// time, both endpoint slices carried as explicit variables, no wrap-around.
// fields and lambda are [2N][slices] exact rational values.  Throws if the
// grid has fewer than three slices, if the flow contains exponentials, or if
// the generator budget of 128 is exceeded.
LatticeAction discretize_action(const ExtendedSystem& sys, int slices, const Rat& dt,
                                const std::vector<std::vector<Rat>>& fields,
                                const std::vector<std::vector<Rat>>& lambda,
                                const std::map<int, Rat>& params = {});

// Returns a copy with an extra multiplier-coordinate coupling added to S.
// The extra term is not invariant, so the variation check must fail on it.
LatticeAction break_symmetry(const LatticeAction& act);

// True if S only contains a bosonic part plus cbar-c pairs.
bool action_structure_ok(const LatticeAction& act);

// Applies the lattice symmetry (coordinates shifted by eps*c, antighosts by
// -i*eps*lambda) to a generic re-evaluation of S and returns the difference
// against the stored S.  The contract for an intact action is the exact zero
// element.
GrassmannElement brst_check(const LatticeAction& act);

// Evaluates the original action on superspace-extended fields
//   Phi = q + i theta c - i thetabar cbar - i thetabar theta lambda,
// integrates out the two superspace directions, and returns the difference
// against -i S.  Exact zero for any polynomial action.
GrassmannElement superfield_check(const LatticeAction& act);

// Deterministic randomized sweep: for each grid size in [slices_lo,
// slices_hi] runs `trials` random rational field configurations through
// brst_check and superfield_check.  flags[k] is 1 when config k passed both
// with the exact zero element.  The parallel path must match the serial path
// bit for bit.
struct BrstSweepResult {
    int configs = 0;
    int failures = 0;
    std::vector<std::uint8_t> flags;
    bool all_zero() const { return failures == 0; }
};

BrstSweepResult brst_sweep(const ExtendedSystem& sys, int slices_lo, int slices_hi,
                           int trials, std::uint64_t seed,
                           const std::map<int, Rat>& params = {}, bool parallel = true);

// Numeric check that a lattice action functional is reproduced by its
// alpha-weighted coordinate-gradient contraction.  The functional maps
// [nfields][slices] values to a number; gradients are taken by central
// differences with step delta.  Returns |A - sum_m alpha_m sum_t x_mt dA/dx_mt|.
using ActionFn = std::function<double(const std::vector<std::vector<double>>&)>;

double euler_functional_check(const ActionFn& action, int nfields, int slices,
                              const std::vector<double>& alpha,
                              const std::vector<std::vector<double>>& point,
                              double delta);

// Numeric lattice functional for a doubled system, same discretisation as
// discretize_action.
ActionFn lattice_action_fn(const ExtendedSystem& sys, int slices, double dt,
                          const std::map<int, double>& params = {});

// Kinetic-structure analysis of an upper-triangular rational matrix B read
// off a first-order Lagrangian sum_ij B_ij q_i qdot_j.  Finds the diagonal
// idempotent weight matrix alpha with
//   (B - B^T) alpha = B,   B alpha = B,   B^T alpha = 0,
// certifies rank(alpha) = N/2 and the off-diagonal block support, and rejects
// inputs without such a solution (odd dimension included).
struct AlphaReport {
    std::vector<Rat> alpha;   // diagonal entries, each 0 or 1
    int rank = 0;
    bool identities_ok = false;
    bool block_ok = false;
};

AlphaReport alpha_structure_check(const std::vector<std::vector<Rat>>& B);

} // namespace emq
