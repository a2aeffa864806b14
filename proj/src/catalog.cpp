#include "emq/catalog.hpp"
#include "emq/parser.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace emq {

namespace {

using nlohmann::json;

struct RowSpec {
    const char* label;
    const char* text;
};

// Builtins keep their frame rows as linear expressions; the stored matrix is
// read off by differentiation so the two forms can never drift apart.
MapData rows_to_mapdata(const std::shared_ptr<const PhaseSpace>& sp,
                        const std::vector<RowSpec>& rows) {
    MapData md;
    for (const auto& r : rows) {
        md.labels.push_back(r.label);
        SymExpr e = parse_expr(sp, r.text);
        SymExpr lin = SymExpr::zero(sp);
        std::vector<std::string> entries;
        for (int i = 0; i < sp->phase_dim(); ++i) {
            SymExpr d = differentiate(e, sp->phase_symbol(i));
            lin += d * SymExpr::symbol(sp, sp->phase_symbol(i));
            entries.push_back(serialize(d));
        }
        md.matrix.push_back(std::move(entries));
        md.offset.push_back(serialize(e - lin));
    }
    return md;
}

SystemSpec make_pendulum_free() {
    SystemSpec s;
    s.name = "pendulum-free";
    s.coordinates = {"x", "y"};
    s.f = {"-y", "x"};
    s.charges = {{"x^2 + y^2", "a1"}};
    s.gauge = "pb_y - y";
    s.params = {{"a1", "1/(2*m*hbar)"}, {"hbar", ""}, {"m", ""}};
    s.rescalings = {"Qbar -> Qbar/hbar"};
    s.expected_kstar = "a1*Pbar^2";
    s.expected_chi_phi = "pb_x - x";
    auto sp = PhaseSpace::doubled(s.coordinates, {"a1", "hbar", "m"});
    s.map = rows_to_mapdata(sp, {{"P1", "pb_y - y"},
                                 {"Q1", "p_y"},
                                 {"P2", "p_x - qb_x"},
                                 {"Q2", "pb_x"},
                                 {"P3", "p_y - qb_y"},
                                 {"Q3", "pb_y"},
                                 {"Pbar", "pb_x - x"},
                                 {"Qbar", "p_x"}});
    return s;
}

SystemSpec make_pendulum_oscillator() {
    SystemSpec s;
    s.name = "pendulum-oscillator";
    s.coordinates = {"x", "y"};
    s.f = {"-y", "x"};
    s.charges = {{"x^2 + y^2 + d^2*qb_x^2 + d^2*qb_y^2", "-1/(2*d)"}};
    s.gauge = "pb_y + d*p_x - y";
    s.params = {{"d", "-m*hbar/2"}, {"hbar", ""}, {"m", ""}};
    s.rescalings = {"Qbar -> Qbar/hbar"};
    s.expected_kstar = "-1/(4*d)*Pbar^2 - d*Qbar^2";
    s.expected_chi_phi = "2*pb_x - 2*x - 2*d*p_y";
    auto sp = PhaseSpace::doubled(s.coordinates, {"d", "hbar", "m"});
    s.map = rows_to_mapdata(sp, {{"P1", "pb_y + d*p_x - y"},
                                 {"Q1", "p_y"},
                                 {"P2", "p_x - qb_x"},
                                 {"Q2", "pb_x"},
                                 {"P3", "p_y - qb_y"},
                                 {"Q3", "pb_y"},
                                 {"Pbar", "pb_x + d*p_y - x"},
                                 {"Qbar", "p_x"}});
    return s;
}

SystemSpec make_roessler_duffing() {
    SystemSpec s;
    s.name = "roessler-duffing";
    s.coordinates = {"x", "y", "z"};
    s.f = {"-y - z", "x", "x*z"};
    s.charges = {{"(x^2 + y^2 + 2*z)^2", "a1"}, {"z^2*exp(-2*y)", "a2"}};
    s.gauge = "pb_y - y";
    s.params = {{"a1", "1/(8*m1*hbar)"}, {"a2", "1/(2*m1*hbar)"}, {"c", ""},
                {"d", ""},               {"hbar", ""},            {"m1", ""},
                {"m2", ""}};
    s.rescalings = {"m1 -> m1*hbar", "m2 -> m2/hbar", "Qbar1 -> Qbar1/hbar"};
    s.expected_kstar = "8*a1*d^2*Pbar1^2 + 2*a2*d^2*Pbar1^2"
                       " - 8*sqrt2*a1*c^2*d*Pbar1*Qbar2^2 + 4*a1*c^4*Qbar2^4";
    s.expected_chi_phi = "pb_x - x";
    auto sp = PhaseSpace::doubled(s.coordinates,
                                  {"a1", "a2", "c", "d", "hbar", "m1", "m2"});
    s.map = rows_to_mapdata(sp, {{"P1", "pb_y - y"},
                                 {"Q1", "p_y"},
                                 {"P2", "p_x - qb_x"},
                                 {"Q2", "pb_x"},
                                 {"P3", "p_y - qb_y"},
                                 {"Q3", "pb_y"},
                                 {"P4", "p_z - qb_z"},
                                 {"Q4", "pb_z"},
                                 {"Pbar1", "(pb_z/d - z/d)/sqrt2"},
                                 {"Qbar1", "(2*d*p_z - pb_x/c + x/c)/sqrt2"},
                                 {"Pbar2", "(2*c*p_x - pb_z/d + z/d)/sqrt2"},
                                 {"Qbar2", "(x/c - pb_x/c)/sqrt2"}});
    return s;
}

}  // namespace

std::vector<std::string> builtin_names() {
    return {"pendulum-free", "pendulum-oscillator", "roessler-duffing"};
}

SystemSpec builtin(const std::string& name) {
    if (name == "pendulum-free") return make_pendulum_free();
    if (name == "pendulum-oscillator") return make_pendulum_oscillator();
    if (name == "roessler-duffing") return make_roessler_duffing();
    throw EmqError("unknown builtin system '" + name +
                   "' (have pendulum-free, pendulum-oscillator, roessler-duffing)");
}

BuiltSystem instantiate(const SystemSpec& spec) {
    if (spec.name.empty()) throw EmqError("spec.name: must not be empty");
    if (spec.coordinates.empty()) throw EmqError("spec.coordinates: must not be empty");
    if (spec.f.size() != spec.coordinates.size())
        throw EmqError("spec.f: flow has " + std::to_string(spec.f.size()) +
                       " components for " + std::to_string(spec.coordinates.size()) +
                       " coordinates");

    std::vector<std::string> param_names;
    for (const auto& [k, v] : spec.params) param_names.push_back(k);
    auto sp = PhaseSpace::doubled(spec.coordinates, param_names);

    auto parse_at = [&sp](const std::string& where, const std::string& text) {
        try {
            return parse_expr(sp, text);
        } catch (const EmqError& e) {
            throw EmqError(where + ": " + e.what());
        }
    };

    BuiltSystem b;
    b.spec = spec;

    std::vector<SymExpr> flows;
    for (std::size_t i = 0; i < spec.f.size(); ++i)
        flows.push_back(parse_at("spec.f[" + std::to_string(i) + "]", spec.f[i]));
    try {
        b.sys = build_extended_system(sp, flows);
    } catch (const EmqError& e) {
        throw EmqError(std::string("spec.f: ") + e.what());
    }

    for (std::size_t i = 0; i < spec.charges.size(); ++i) {
        const std::string where = "spec.charges[" + std::to_string(i) + "]";
        SymExpr c = parse_at(where + ".expr", spec.charges[i].expr);
        SymExpr k = parse_at(where + ".coeff", spec.charges[i].coeff);
        try {
            b.charges.push_back(make_charge(b.sys, std::move(c), std::move(k)));
        } catch (const EmqError& e) {
            throw EmqError(where + ": " + e.what());
        }
    }

    b.chi = parse_at("spec.gauge", spec.gauge);

    const std::size_t dim = static_cast<std::size_t>(sp->phase_dim());
    auto want = [&dim](const std::string& where, std::size_t got) {
        if (got != dim)
            throw EmqError(where + ": has " + std::to_string(got) +
                           " entries, expected " + std::to_string(dim));
    };
    want("spec.map.labels", spec.map.labels.size());
    want("spec.map.matrix", spec.map.matrix.size());
    want("spec.map.offset", spec.map.offset.size());

    std::vector<std::vector<SymExpr>> mat;
    for (std::size_t i = 0; i < dim; ++i) {
        const auto& row = spec.map.matrix[i];
        want("spec.map.matrix[" + std::to_string(i) + "]", row.size());
        std::vector<SymExpr> out;
        for (std::size_t jj = 0; jj < dim; ++jj)
            out.push_back(parse_at("spec.map.matrix[" + std::to_string(i) + "][" +
                                       std::to_string(jj) + "]",
                                   row[jj]));
        mat.push_back(std::move(out));
    }
    std::vector<SymExpr> off;
    for (std::size_t i = 0; i < dim; ++i)
        off.push_back(parse_at("spec.map.offset[" + std::to_string(i) + "]",
                               spec.map.offset[i]));
    try {
        b.map = make_canonical_map(b.sys, spec.map.labels, mat, off);
    } catch (const EmqError& e) {
        throw EmqError(std::string("spec.map: ") + e.what());
    }

    for (const auto& [pname, binding] : spec.params) {
        if (binding.empty()) continue;
        const std::string where = "spec.params." + pname;
        SymExpr e = parse_at(where, binding);
        for (const auto& [key, coeff] : e.terms()) {
            for (const auto& [sym, pw] : key.pows)
                if (!sp->is_param(sym))
                    throw EmqError(where + ": binding must involve parameters only");
            for (const auto& [sym, w] : key.weights)
                if (!sp->is_param(sym))
                    throw EmqError(where + ": binding must involve parameters only");
        }
        b.param_bindings[sp->require(pname)] = std::move(e);
    }

    if (!spec.expected_chi_phi.empty())
        b.expected_chi_phi =
            parse_at("spec.expected.chi_phi_bracket", spec.expected_chi_phi);
    if (!spec.expected_kstar.empty()) {
        try {
            b.expected_kstar = parse_expr(b.map.sp_new, spec.expected_kstar);
        } catch (const EmqError& e) {
            throw EmqError(std::string("spec.expected.kstar: ") + e.what());
        }
    }
    return b;
}

namespace {

json to_json(const SystemSpec& s) {
    json j;
    j["name"] = s.name;
    j["coordinates"] = s.coordinates;
    j["f"] = s.f;
    json ch = json::array();
    for (const auto& c : s.charges) ch.push_back({{"expr", c.expr}, {"coeff", c.coeff}});
    j["charges"] = ch;
    j["gauge"] = s.gauge;
    j["map"] = {{"labels", s.map.labels},
                {"matrix", s.map.matrix},
                {"offset", s.map.offset}};
    j["params"] = s.params;
    j["rescalings"] = s.rescalings;
    json ex = json::object();
    if (!s.expected_kstar.empty()) ex["kstar"] = s.expected_kstar;
    if (!s.expected_chi_phi.empty()) ex["chi_phi_bracket"] = s.expected_chi_phi;
    j["expected"] = ex;
    return j;
}

[[noreturn]] void bad(const std::string& where, const char* what) {
    throw EmqError(where + ": " + what);
}

std::string get_string(const json& j, const std::string& where) {
    if (!j.is_string()) bad(where, "expected a string");
    return j.get<std::string>();
}

std::vector<std::string> get_string_array(const json& j, const std::string& where) {
    if (!j.is_array()) bad(where, "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(get_string(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

const json& get_key(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) bad(where, ("missing key '" + std::string(key) + "'").c_str());
    return *it;
}

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) bad(where, ("unknown key '" + k + "'").c_str());
}

}  // namespace

std::string spec_json(const SystemSpec& spec) { return to_json(spec).dump(2) + "\n"; }

SystemSpec parse_spec(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw EmqError(std::string("spec: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw EmqError("spec: top level must be an object");
    check_keys(j,
               {"name", "coordinates", "f", "charges", "gauge", "map", "params",
                "rescalings", "expected"},
               "spec");

    SystemSpec s;
    s.name = get_string(get_key(j, "name", "spec"), "spec.name");
    s.coordinates =
        get_string_array(get_key(j, "coordinates", "spec"), "spec.coordinates");
    s.f = get_string_array(get_key(j, "f", "spec"), "spec.f");

    const json& ch = get_key(j, "charges", "spec");
    if (!ch.is_array()) bad("spec.charges", "expected an array");
    for (std::size_t i = 0; i < ch.size(); ++i) {
        const std::string where = "spec.charges[" + std::to_string(i) + "]";
        if (!ch[i].is_object()) bad(where, "expected an object");
        check_keys(ch[i], {"expr", "coeff"}, where);
        ChargeEntry e;
        e.expr = get_string(get_key(ch[i], "expr", where), where + ".expr");
        e.coeff = get_string(get_key(ch[i], "coeff", where), where + ".coeff");
        s.charges.push_back(std::move(e));
    }

    s.gauge = get_string(get_key(j, "gauge", "spec"), "spec.gauge");

    const json& mp = get_key(j, "map", "spec");
    if (!mp.is_object()) bad("spec.map", "expected an object");
    check_keys(mp, {"labels", "matrix", "offset"}, "spec.map");
    s.map.labels = get_string_array(get_key(mp, "labels", "spec.map"), "spec.map.labels");
    const json& mx = get_key(mp, "matrix", "spec.map");
    if (!mx.is_array()) bad("spec.map.matrix", "expected an array of rows");
    for (std::size_t i = 0; i < mx.size(); ++i)
        s.map.matrix.push_back(
            get_string_array(mx[i], "spec.map.matrix[" + std::to_string(i) + "]"));
    s.map.offset = get_string_array(get_key(mp, "offset", "spec.map"), "spec.map.offset");

    const json& pr = get_key(j, "params", "spec");
    if (!pr.is_object()) bad("spec.params", "expected an object");
    for (const auto& [k, v] : pr.items())
        s.params[k] = get_string(v, "spec.params." + k);

    s.rescalings =
        get_string_array(get_key(j, "rescalings", "spec"), "spec.rescalings");

    if (auto it = j.find("expected"); it != j.end()) {
        if (!it->is_object()) bad("spec.expected", "expected an object");
        check_keys(*it, {"kstar", "chi_phi_bracket"}, "spec.expected");
        if (auto k = it->find("kstar"); k != it->end())
            s.expected_kstar = get_string(*k, "spec.expected.kstar");
        if (auto k = it->find("chi_phi_bracket"); k != it->end())
            s.expected_chi_phi = get_string(*k, "spec.expected.chi_phi_bracket");
    }

    instantiate(s);   // eager validation, result discarded
    return s;
}

SystemSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EmqError("cannot open spec file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_spec(buf.str());
}

void save_spec(const SystemSpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw EmqError("cannot write spec file: " + path);
    out << spec_json(spec);
    if (!out) throw EmqError("failed writing spec file: " + path);
}

}  // namespace emq
