#pragma once

#include "emq/catalog.hpp"
#include "emq/report.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace emq {

struct PipelineOptions {
    std::uint64_t seed = 0;
    bool timings = false;                    // stamp runtime_ms on each record
    std::map<std::string, double> params;    // free-parameter overrides by name
};

// Numeric values for every parameter symbol: free parameters default to 1
// unless overridden, bound parameters are evaluated from their binding
// expressions (which may reference free parameters).  Rejects overrides that
// name unknown or bound parameters.
std::map<int, double> numeric_params(const BuiltSystem& b,
                                     const std::map<std::string, double>& overrides = {});

// Constraint-algebra stage: multipliers, charge conservation, the closing
// constraint and its classification.
Report analyze_report(const BuiltSystem& b, const PipelineOptions& opt = {});

// Gauge fixing and reduction: certificates for the gauge condition and the
// canonical frame, then K, Q1* and K* against the recorded anchors.
Report reduce_report(const BuiltSystem& b, const PipelineOptions& opt = {});

struct SimulateOptions {
    double t1 = 0.0;
    double t2 = 0.0;
    double dt = 0.0;
    std::vector<double> q0, qb0;    // empty: all components start at 1
    double conservation_tol = 1e-8;
};

// Trajectory stage: conserved-charge drift, the lattice determinant identity
// and the Wronskian identity.  When csv is non-null it receives the
// trajectory table with times shifted to start at t1.
Report simulate_report(const BuiltSystem& b, const SimulateOptions& sim,
                       std::string* csv, const PipelineOptions& opt = {});

// Ghost stage: randomized shift and superfield sweeps over a range of grid
// sizes plus the tampered-action control.
Report brst_report(const BuiltSystem& b, int slices_lo, int slices_hi,
                   int trials, const PipelineOptions& opt = {});

// Kinetic weight and one-variable potential read off K* after all parameter
// substitutions.  Requires a single physical pair and a Hamiltonian of the
// form c*Pbar^2 + V(Qbar) with constant c != 0.
struct GridProblem {
    double kinetic = 0.0;     // second-difference weight, -c
    SymExpr potential;        // in the physical coordinate symbol
    int coord_symbol = -1;
    bool harmonic = false;    // exactly Pbar^2/2 + Qbar^2/2
    bool free_particle = false;
};

GridProblem grid_problem(const BuiltSystem& b,
                         const std::map<std::string, double>& overrides = {});

struct SpectrumOptions {
    double box = 10.0;   // half-width L
    int n = 2000;
    int levels = 5;
};

// Spectrum stage: grid eigenvalues of the emergent Hamiltonian, checked
// against a closed reference when one exists (harmonic ladder or the exact
// lattice box spectrum of a free K*).
Report spectrum_report(const BuiltSystem& b, const SpectrumOptions& so,
                       const PipelineOptions& opt = {});

// Full per-system composition: analyze + reduce + ghost sweep + trajectory
// identities + spectrum (when a closed reference exists) + the kinetic-form
// and action-functional structure checks.
Report verify_report(const BuiltSystem& b, const PipelineOptions& opt = {});

}  // namespace emq
