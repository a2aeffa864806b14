#include "emq/report.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace emq {

bool Report::overall() const { return failures() == 0; }

int Report::failures() const {
    int n = 0;
    for (const auto& c : checks)
        if (c.status == "fail") ++n;
    return n;
}

std::string render_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CheckRecord exact_check(std::string id, std::string description,
                        const SymExpr& lhs, const SymExpr& rhs) {
    CheckRecord rec;
    rec.id = std::move(id);
    rec.description = std::move(description);
    rec.lhs = serialize(lhs);
    rec.rhs = serialize(rhs);
    bool ok = (lhs - rhs).is_zero();
    rec.status = ok ? "pass" : "fail";
    rec.residual = ok ? 0.0 : 1.0;
    rec.tolerance = 0.0;
    return rec;
}

CheckRecord numeric_check(std::string id, std::string description,
                          double lhs, double rhs, double tolerance) {
    CheckRecord rec;
    rec.id = std::move(id);
    rec.description = std::move(description);
    rec.lhs = render_double(lhs);
    rec.rhs = render_double(rhs);
    rec.residual = std::abs(lhs - rhs);
    rec.tolerance = tolerance;
    rec.status = (std::isfinite(rec.residual) && rec.residual <= tolerance)
                     ? "pass" : "fail";
    return rec;
}

CheckRecord bound_check(std::string id, std::string description,
                        double value, double tolerance) {
    CheckRecord rec;
    rec.id = std::move(id);
    rec.description = std::move(description);
    rec.lhs = render_double(value);
    rec.rhs = "0";
    rec.residual = value;
    rec.tolerance = tolerance;
    rec.status = (std::isfinite(value) && value <= tolerance) ? "pass" : "fail";
    return rec;
}

CheckRecord flag_check(std::string id, std::string description, bool ok) {
    CheckRecord rec;
    rec.id = std::move(id);
    rec.description = std::move(description);
    rec.lhs = ok ? "true" : "false";
    rec.rhs = "true";
    rec.residual = ok ? 0.0 : 1.0;
    rec.tolerance = 0.0;
    rec.status = ok ? "pass" : "fail";
    return rec;
}

CheckRecord info_note(std::string id, std::string description,
                      std::string lhs, std::string rhs) {
    CheckRecord rec;
    rec.id = std::move(id);
    rec.description = std::move(description);
    rec.lhs = std::move(lhs);
    rec.rhs = std::move(rhs);
    rec.status = "info";
    return rec;
}

namespace {

using json = nlohmann::json;   // std::map keys, serialized in sorted order

json spectrum_to_json(const SpectrumReport& rep) {
    json j;
    j["grid"]["L"] = rep.L;
    j["grid"]["n"] = rep.n;
    j["grid"]["periodic"] = rep.periodic;
    j["eigenvalues"] = rep.eigenvalues;
    j["reference"] = rep.reference;
    j["max_abs_dev"] = rep.max_abs_dev;
    return j;
}

json report_to_json(const Report& rep) {
    json j;
    j["title"] = rep.title;
    j["overall"] = rep.overall() ? "pass" : "fail";
    j["checks"] = json::array();
    for (const auto& c : rep.checks) {
        json rec;
        rec["id"] = c.id;
        rec["description"] = c.description;
        rec["status"] = c.status;
        rec["lhs"] = c.lhs;
        rec["rhs"] = c.rhs;
        rec["residual"] = c.residual;
        rec["tolerance"] = c.tolerance;
        rec["runtime_ms"] = c.runtime_ms;
        j["checks"].push_back(std::move(rec));
    }
    if (rep.spectrum)
        j["spectrum"] = spectrum_to_json(*rep.spectrum);
    if (!rep.artifacts.empty()) {
        json a;
        for (const auto& [kind, path] : rep.artifacts)
            a[kind] = path;
        j["artifacts"] = std::move(a);
    }
    return j;
}

}  // namespace

std::string spectrum_json(const SpectrumReport& rep) {
    return spectrum_to_json(rep).dump(2) + "\n";
}

std::string report_json(const Report& rep) {
    return report_to_json(rep).dump(2) + "\n";
}

std::string reports_json(const std::vector<Report>& reps) {
    json j;
    bool all = true;
    j["reports"] = json::array();
    for (const auto& r : reps) {
        all = all && r.overall();
        j["reports"].push_back(report_to_json(r));
    }
    j["overall"] = all ? "pass" : "fail";
    return j.dump(2) + "\n";
}

std::string human_summary(const Report& rep) {
    std::ostringstream os;
    os << "== " << rep.title << " ==\n";
    for (const auto& c : rep.checks) {
        const char* tag = c.status == "pass" ? "[PASS]"
                        : c.status == "fail" ? "[FAIL]" : "[info]";
        os << tag << ' ' << c.id << ": " << c.description;
        if (c.status == "fail")
            os << "  (residual " << render_double(c.residual)
               << ", tolerance " << render_double(c.tolerance) << ")";
        os << '\n';
    }
    os << (rep.overall() ? "PASS" : "FAIL") << " (" << rep.checks.size()
       << " checks, " << rep.failures() << " failures)\n";
    return os.str();
}

}  // namespace emq
