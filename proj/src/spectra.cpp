#include "emq/spectra.hpp"

#include <lapacke.h>

#include <cmath>
#include <set>

namespace emq {

namespace {

// the single dynamical symbol of the potential, or -1 for a constant
int potential_symbol(const SymExpr& v) {
    std::set<int> syms;
    for (const auto& [key, coeff] : v.terms()) {
        for (const auto& [sym, pw] : key.pows) syms.insert(sym);
        for (const auto& [sym, w] : key.weights) syms.insert(sym);
    }
    if (syms.size() > 1)
        throw EmqError("grid_spectrum_1d: potential must involve a single variable");
    return syms.empty() ? -1 : *syms.begin();
}

}  // namespace

SpectrumReport grid_spectrum_1d(double kinetic, const SymExpr& potential,
                                double L, int n, int k, bool periodic) {
    if (!(L > 0.0)) throw EmqError("grid_spectrum_1d: domain half-width must be positive");
    if (n < 64) throw EmqError("grid_spectrum_1d: grid too coarse, need n >= 64");
    if (k < 1 || k > n) throw EmqError("grid_spectrum_1d: eigenvalue count out of range");
    if (!std::isfinite(kinetic)) throw EmqError("grid_spectrum_1d: kinetic coefficient not finite");

    const int sym = potential_symbol(potential);
    std::map<int, double> vals;
    auto vat = [&](double x) {
        if (sym >= 0) vals[sym] = x;
        const double v = evaluate(potential, vals);
        if (!std::isfinite(v))
            throw EmqError("grid_spectrum_1d: potential sample is not finite");
        return v;
    };

    SpectrumReport rep;
    rep.L = L;
    rep.n = n;
    rep.periodic = periodic;

    if (!periodic) {
        const double h = 2.0 * L / (n + 1);
        std::vector<double> diag(static_cast<std::size_t>(n)), off(static_cast<std::size_t>(n - 1));
        for (int i = 0; i < n; ++i)
            diag[static_cast<std::size_t>(i)] = -2.0 * kinetic / (h * h) + vat(-L + (i + 1) * h);
        for (int i = 0; i + 1 < n; ++i) off[static_cast<std::size_t>(i)] = kinetic / (h * h);
        // eigenvalues only, so the layout is moot; the col-major path accepts
        // a dummy unit ldz while the row-major wrapper insists on ldz >= n
        const lapack_int info = LAPACKE_dstev(LAPACK_COL_MAJOR, 'N', n, diag.data(),
                                              off.data(), nullptr, 1);
        if (info != 0) throw EmqError("grid_spectrum_1d: tridiagonal eigensolver failed");
        rep.eigenvalues.assign(diag.begin(), diag.begin() + k);
    } else {
        const double h = 2.0 * L / n;
        std::vector<double> a(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
        const double o = kinetic / (h * h);
        for (int i = 0; i < n; ++i) {
            a[static_cast<std::size_t>(i * n + i)] = -2.0 * o + vat(-L + i * h);
            const int j = (i + 1) % n;
            a[static_cast<std::size_t>(i * n + j)] += o;
            a[static_cast<std::size_t>(j * n + i)] += o;
        }
        std::vector<double> w(static_cast<std::size_t>(n));
        const lapack_int info = LAPACKE_dsyev(LAPACK_ROW_MAJOR, 'N', 'U', n, a.data(), n, w.data());
        if (info != 0) throw EmqError("grid_spectrum_1d: dense eigensolver failed");
        rep.eigenvalues.assign(w.begin(), w.begin() + k);
    }
    return rep;
}

void attach_reference(SpectrumReport& rep, const std::vector<double>& ref) {
    rep.reference = ref;
    rep.max_abs_dev = 0.0;
    const std::size_t m = std::min(rep.eigenvalues.size(), ref.size());
    for (std::size_t i = 0; i < m; ++i)
        rep.max_abs_dev = std::max(rep.max_abs_dev,
                                   std::fabs(rep.eigenvalues[i] - ref[i]));
}

PartitionCheck partition_check(const SpectrumReport& rep, double beta) {
    if (!(beta > 0.0)) throw EmqError("partition_check: temperature parameter must be positive");
    if (rep.eigenvalues.empty()) throw EmqError("partition_check: empty spectrum");

    PartitionCheck out;
    for (double e : rep.eigenvalues) out.z_spectrum += std::exp(-beta * e);
    out.tail_estimate = std::exp(-beta * rep.eigenvalues.back()) / out.z_spectrum;
    if (out.tail_estimate > 1e-4)
        throw EmqError("partition_check: spectral tail too heavy at this temperature");
    out.z_reference = std::exp(-beta / 2) / (1.0 - std::exp(-beta));
    out.rel_err = std::fabs(out.z_spectrum - out.z_reference) / out.z_reference;
    return out;
}

bool DuffingReport::all_match(bool use_printed) const {
    const auto& v = use_printed ? printed : quarter_root;
    for (const auto& e : v)
        if (!e.match) return false;
    return true;
}

DuffingReport duffing_constants_check(const Rat& m1, const Rat& m2) {
    if (m1 <= 0 || m2 <= 0)
        throw EmqError("duffing_constants_check: masses must be positive");

    const Rat a2 = Rat(1) / (2 * m1);
    const Rat a1 = a2 / 4;
    const Rat d2 = Rat(1, 4);          // d = 1/2

    const Rat target_a = Rat(1) / (2 * m1);
    const Rat target_b_sq = Rat(1) / (m1 * m2);
    const Rat target_c = Rat(1) / m2;

    auto entry = [](const std::string& name, const Rat& ratio, int sign) {
        DuffingEntry e;
        e.name = name;
        e.ratio_sq = ratio * ratio;
        e.sign = sign;
        e.match = (e.ratio_sq == 1 && sign > 0);
        return e;
    };
    auto entry_sq = [](const std::string& name, const Rat& ratio_sq, int sign) {
        DuffingEntry e;
        e.name = name;
        e.ratio_sq = ratio_sq;
        e.sign = sign;
        e.match = (ratio_sq == 1 && sign > 0);
        return e;
    };

    const Rat a_val = 2 * d2 * (4 * a1 + a2);

    DuffingReport rep;
    for (int variant = 0; variant < 2; ++variant) {
        // c^4 under the quarter-root coupling vs the printed one
        const Rat c4 = (variant == 0 ? 2 * m1 / m2 : 8 * m1 / m2);
        const Rat b_sq = 128 * a1 * a1 * d2 * c4;   // (-8 sqrt2 a1 d c^2)^2
        const Rat c_val = 4 * a1 * c4;

        std::vector<DuffingEntry> v;
        v.push_back(entry("A", a_val / target_a, a_val > 0 ? 1 : -1));
        // B carries the explicit minus sign; a1, d, c^2 are all positive
        v.push_back(entry_sq("B", b_sq / target_b_sq, -1));
        v.push_back(entry("C", c_val / target_c, c_val > 0 ? 1 : -1));
        (variant == 0 ? rep.quarter_root : rep.printed) = std::move(v);
    }
    return rep;
}

}  // namespace emq
