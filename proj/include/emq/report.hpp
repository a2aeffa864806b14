#pragma once

#include "emq/spectra.hpp"
#include "emq/symexpr.hpp"

#include <optional>
#include <string>
#include <vector>

namespace emq {

// One verification record.  lhs/rhs are rendered values (symbolic or
// numeric); residual and tolerance carry the comparison that decided the
// status.  "info" records report context and never affect the overall
// verdict.
struct CheckRecord {
    std::string id;
    std::string description;
    std::string status;   // "pass", "fail" or "info"
    std::string lhs;
    std::string rhs;
    double residual = 0.0;
    double tolerance = 0.0;
    double runtime_ms = 0.0;

    bool passed() const { return status != "fail"; }
};

struct Report {
    std::string title;
    std::vector<CheckRecord> checks;

    // optional payloads
    std::optional<SpectrumReport> spectrum;
    std::vector<std::pair<std::string, std::string>> artifacts;   // kind -> path

    bool overall() const;
    int failures() const;
    void add(CheckRecord rec) { checks.push_back(std::move(rec)); }
};

// fixed %.17g rendering so equal doubles always print the same bytes
std::string render_double(double v);

// record builders -------------------------------------------------------

// exact symbolic equality; residual is 0 or 1
CheckRecord exact_check(std::string id, std::string description,
                        const SymExpr& lhs, const SymExpr& rhs);

// |lhs - rhs| <= tolerance
CheckRecord numeric_check(std::string id, std::string description,
                          double lhs, double rhs, double tolerance);

// value <= tolerance, for residuals already measured against zero
CheckRecord bound_check(std::string id, std::string description,
                        double value, double tolerance);

// boolean certificate
CheckRecord flag_check(std::string id, std::string description, bool ok);

// context record, never fails
CheckRecord info_note(std::string id, std::string description,
                      std::string lhs, std::string rhs = std::string());

// rendering -------------------------------------------------------------

// {grid:{L,n}, eigenvalues:[...], reference:[...], max_abs_dev}
std::string spectrum_json(const SpectrumReport& rep);

// single report object, keys sorted, trailing newline
std::string report_json(const Report& rep);

// {"overall": ..., "reports": [...]} for multi-system runs
std::string reports_json(const std::vector<Report>& reps);

// one line per check plus a verdict line, for the error stream
std::string human_summary(const Report& rep);

}  // namespace emq
