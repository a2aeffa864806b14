#pragma once

#include "emq/gauge.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace emq {

// Declarative description of one system: everything is a string in the
// expression grammar, so specs serialize exactly and diff cleanly.
struct ChargeEntry {
    std::string expr, coeff;
    bool operator==(const ChargeEntry&) const = default;
};

struct MapData {
    std::vector<std::string> labels;
    std::vector<std::vector<std::string>> matrix;
    std::vector<std::string> offset;
    bool operator==(const MapData&) const = default;
};

struct SystemSpec {
    std::string name;
    std::vector<std::string> coordinates;
    std::vector<std::string> f;
    std::vector<ChargeEntry> charges;
    std::string gauge;
    MapData map;
    std::map<std::string, std::string> params;   // name -> binding, "" = free
    std::vector<std::string> rescalings;         // unit moves, informational
    std::string expected_kstar;                  // regression anchors, "" = none
    std::string expected_chi_phi;
    bool operator==(const SystemSpec&) const = default;
};

// The symbolic objects a spec denotes, built and fully validated.
struct BuiltSystem {
    SystemSpec spec;
    ExtendedSystem sys;
    std::vector<ChargeSpec> charges;
    SymExpr chi;
    CanonicalMap map;
    std::map<int, SymExpr> param_bindings;       // bound parameters only
    std::optional<SymExpr> expected_kstar;       // lives in map.sp_new
    std::optional<SymExpr> expected_chi_phi;     // lives in sys.sp
};

std::vector<std::string> builtin_names();
SystemSpec builtin(const std::string& name);

// Parse every expression, construct the doubled system, the charges, the
// gauge condition and the canonical frame change, checking all invariants
// eagerly.  Errors carry the spec path of the offending field.
BuiltSystem instantiate(const SystemSpec& spec);

// Canonical JSON form (sorted keys, two-space indent, trailing newline).
std::string spec_json(const SystemSpec& spec);

// Schema-checks the text and validates the result via instantiate().
SystemSpec parse_spec(const std::string& json_text);

SystemSpec load_spec(const std::string& path);
void save_spec(const SystemSpec& spec, const std::string& path);

}  // namespace emq
