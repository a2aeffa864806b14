#include "emq/catalog.hpp"
#include "emq/pipeline.hpp"
#include "emq/report.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace emq;

std::uint64_t seed_from_env() {
    const char* s = std::getenv("EMERGENTQ_SEED");
    if (!s || !*s) return 0;
    return std::strtoull(s, nullptr, 10);
}

// builtin name first, file path otherwise
BuiltSystem resolve_spec(const std::string& arg) {
    for (const auto& name : builtin_names())
        if (name == arg) return instantiate(builtin(name));
    return instantiate(load_spec(arg));
}

std::map<std::string, double> parse_param_overrides(const std::vector<std::string>& args) {
    std::map<std::string, double> out;
    for (const auto& s : args) {
        auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0)
            throw EmqError("--param expects name=value, got: " + s);
        std::string value = s.substr(eq + 1);
        char* end = nullptr;
        double v = std::strtod(value.c_str(), &end);
        if (end == value.c_str() || *end != '\0')
            throw EmqError("--param value is not a number: " + s);
        out[s.substr(0, eq)] = v;
    }
    return out;
}

std::vector<double> parse_components(const std::string& text, const char* flag) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        std::string piece = text.substr(
            pos, comma == std::string::npos ? std::string::npos : comma - pos);
        char* end = nullptr;
        double v = std::strtod(piece.c_str(), &end);
        if (end == piece.c_str() || *end != '\0')
            throw EmqError(std::string(flag) + " expects comma-separated numbers, got: " + text);
        out.push_back(v);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

int emit(const Report& rep) {
    std::cout << report_json(rep);
    std::cerr << human_summary(rep);
    return rep.overall() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"constrained-dynamics pipeline: from a classical flow to its "
                 "emergent quantum Hamiltonian, with verification reports"};
    app.require_subcommand(1);

    std::uint64_t seed = seed_from_env();
    bool timings = false;
    std::vector<std::string> param_args;
    app.add_option("--seed", seed,
                   "seed for randomized sweeps (default: EMERGENTQ_SEED or 0)");
    app.add_flag("--timings", timings,
                 "stamp wall-clock runtime_ms on records (output no longer "
                 "byte-reproducible)");
    app.add_option("--param", param_args,
                   "free-parameter override, name=value (repeatable)");

    std::string spec_arg;

    auto* analyze = app.add_subcommand(
        "analyze", "constraint algebra, charge conservation, classification");
    analyze->add_option("spec", spec_arg, "builtin name or spec file")->required();
    analyze->fallthrough();

    auto* reduce = app.add_subcommand(
        "reduce", "gauge fixing, canonical frame, K, Q1*, K*");
    reduce->add_option("spec", spec_arg, "builtin name or spec file")->required();
    reduce->fallthrough();

    double t1 = 0.0, t2 = 0.0, dt = 0.0;
    std::string q0_arg, qb0_arg, out_path;
    auto* simulate = app.add_subcommand(
        "simulate", "integrate the doubled flow and test the trajectory identities");
    simulate->add_option("spec", spec_arg, "builtin name or spec file")->required();
    simulate->add_option("--t1", t1, "start time (labels only, the flow is autonomous)");
    simulate->add_option("--t2", t2, "end time")->required();
    simulate->add_option("--dt", dt, "step, must divide the horizon")->required();
    simulate->add_option("--q0", q0_arg, "initial coordinates, comma-separated");
    simulate->add_option("--qb0", qb0_arg, "initial mirror coordinates, comma-separated");
    simulate->add_option("--out", out_path, "trajectory CSV path (default <name>_trajectory.csv)");
    simulate->fallthrough();

    int slices = 6, trials = 5;
    auto* brst = app.add_subcommand(
        "brst", "exact ghost-shift and superfield checks on random lattice configs");
    brst->add_option("spec", spec_arg, "builtin name or spec file")->required();
    brst->add_option("--slices", slices, "largest grid, sweep runs 3..N");
    brst->add_option("--trials", trials, "random configurations per grid");
    brst->fallthrough();

    SpectrumOptions sopt;
    auto* spectrum = app.add_subcommand(
        "spectrum", "grid eigenvalues of the emergent Hamiltonian");
    spectrum->add_option("spec", spec_arg, "builtin name or spec file")->required();
    spectrum->add_option("--L", sopt.box, "half-width of the box");
    spectrum->add_option("--n", sopt.n, "interior grid points");
    spectrum->add_option("--levels", sopt.levels, "eigenvalues to report");
    spectrum->fallthrough();

    bool all_builtin = false;
    auto* verify = app.add_subcommand(
        "verify", "full verification suite for one system or all builtins");
    verify->add_option("spec", spec_arg, "builtin name or spec file");
    verify->add_flag("--all-builtin", all_builtin, "run every builtin system");
    verify->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        PipelineOptions opt;
        opt.seed = seed;
        opt.timings = timings;
        opt.params = parse_param_overrides(param_args);

        if (app.got_subcommand(analyze))
            return emit(analyze_report(resolve_spec(spec_arg), opt));

        if (app.got_subcommand(reduce))
            return emit(reduce_report(resolve_spec(spec_arg), opt));

        if (app.got_subcommand(simulate)) {
            auto b = resolve_spec(spec_arg);
            SimulateOptions sim;
            sim.t1 = t1;
            sim.t2 = t2;
            sim.dt = dt;
            if (!q0_arg.empty()) sim.q0 = parse_components(q0_arg, "--q0");
            if (!qb0_arg.empty()) sim.qb0 = parse_components(qb0_arg, "--qb0");
            std::string csv;
            auto rep = simulate_report(b, sim, &csv, opt);
            std::string path = out_path.empty() ? b.spec.name + "_trajectory.csv"
                                                : out_path;
            std::ofstream os(path, std::ios::binary);
            if (!os || !(os << csv) || !os.flush())
                throw EmqError("cannot write trajectory file: " + path);
            rep.artifacts.emplace_back("trajectory_csv", path);
            return emit(rep);
        }

        if (app.got_subcommand(brst))
            return emit(brst_report(resolve_spec(spec_arg), 3, slices, trials, opt));

        if (app.got_subcommand(spectrum))
            return emit(spectrum_report(resolve_spec(spec_arg), sopt, opt));

        if (app.got_subcommand(verify)) {
            if (all_builtin != spec_arg.empty()) {
                // exactly one of the two ways to pick systems
                throw EmqError("verify needs a spec argument or --all-builtin");
            }
            if (!all_builtin)
                return emit(verify_report(resolve_spec(spec_arg), opt));
            std::vector<Report> reps;
            for (const auto& name : builtin_names())
                reps.push_back(verify_report(instantiate(builtin(name)), opt));
            std::cout << reports_json(reps);
            bool ok = true;
            for (const auto& r : reps) {
                std::cerr << human_summary(r);
                ok = ok && r.overall();
            }
            return ok ? 0 : 1;
        }
    } catch (const EmqError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
