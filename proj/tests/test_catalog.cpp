#include <doctest.h>

#include "emq/catalog.hpp"
#include "emq/parser.hpp"

#include <cstdio>
#include <string>

using namespace emq;

namespace {

std::string thrown_message(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const EmqError& e) {
        return e.what();
    }
    return "";
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

} // namespace

TEST_CASE("every builtin runs the whole reduction against its anchors") {
    for (const auto& name : builtin_names()) {
        CAPTURE(name);
        auto spec = builtin(name);
        CHECK(spec.name == name);
        CHECK(spec.f.size() == spec.coordinates.size());
        CHECK(spec.map.labels.size() == 4 * spec.coordinates.size());

        auto b = instantiate(spec);
        for (const auto& chk : verify_charges(b.sys, b.charges)) CHECK(chk.conserved);

        auto set = information_loss_constraint(b.sys, b.charges);
        CHECK(set.kernel_ok);
        CHECK(set.weak_first_class);

        auto rep = validate_gauge(b.sys, set, b.chi);
        CHECK(rep.ok());
        REQUIRE(b.expected_chi_phi.has_value());
        CHECK(rep.chi_phi == *b.expected_chi_phi);

        auto red = reduce(b.sys, set, b.chi, b.map);
        REQUIRE(red.kstar.has_value());
        REQUIRE(b.expected_kstar.has_value());
        CHECK(*red.kstar == *b.expected_kstar);
    }
}

TEST_CASE("unit bindings specialize the emergent Hamiltonians") {
    // free system: charge scale 1/(2 m hbar) plants the inverse mass
    auto b = instantiate(builtin("pendulum-free"));
    auto set = information_loss_constraint(b.sys, b.charges);
    auto red = reduce(b.sys, set, b.chi, b.map);
    auto sq = b.map.sp_new;
    std::map<int, SymExpr> units{
        {sq->require("a1"), parse_expr(sq, b.spec.params.at("a1"))}};
    CHECK(substitute(*red.kstar, units) == parse_expr(sq, "1/(2*m*hbar)*Pbar^2"));

    // oscillator variant: d = -m hbar/2 turns the pair into the unit ladder
    auto bo = instantiate(builtin("pendulum-oscillator"));
    auto seto = information_loss_constraint(bo.sys, bo.charges);
    auto redo_ = reduce(bo.sys, seto, bo.chi, bo.map);
    auto sqo = bo.map.sp_new;
    std::map<int, SymExpr> unitso{
        {sqo->require("d"), parse_expr(sqo, bo.spec.params.at("d"))}};
    CHECK(substitute(*redo_.kstar, unitso) ==
          parse_expr(sqo, "1/(2*m*hbar)*Pbar^2 + m*hbar/2*Qbar^2"));

    CHECK(b.param_bindings.size() == 1);
    CHECK(bo.param_bindings.size() == 1);
    auto br = instantiate(builtin("roessler-duffing"));
    CHECK(br.param_bindings.size() == 2);
    CHECK(br.map.n_physical() == 2);
}

TEST_CASE("builtin lookup") {
    CHECK(builtin_names().size() == 3);
    auto msg = thrown_message([] { builtin("lorenz"); });
    CHECK(contains(msg, "unknown builtin"));
    CHECK(contains(msg, "lorenz"));
}

TEST_CASE("serialization round-trips every builtin") {
    for (const auto& name : builtin_names()) {
        CAPTURE(name);
        auto spec = builtin(name);
        CHECK(parse_spec(spec_json(spec)) == spec);

        std::string path = "roundtrip_" + name + ".json";
        save_spec(spec, path);
        auto back = load_spec(path);
        CHECK(back == spec);
        CHECK(spec_json(back) == spec_json(spec));
        std::remove(path.c_str());
    }
}

TEST_CASE("schema violations carry their position") {
    CHECK(contains(thrown_message([] { parse_spec("{"); }), "not valid JSON"));
    CHECK(contains(thrown_message([] { parse_spec("[]"); }),
                   "top level must be an object"));
    CHECK(contains(thrown_message([] { parse_spec("{\"name\": 1}"); }),
                   "spec.name: expected a string"));
    CHECK(contains(thrown_message([] { parse_spec("{\"bogus\": 2}"); }),
                   "unknown key 'bogus'"));

    auto spec = builtin("pendulum-free");
    {
        auto broken = spec;
        broken.f.pop_back();
        auto msg = thrown_message([&] { instantiate(broken); });
        CHECK(contains(msg, "1 components"));
        CHECK(contains(msg, "2 coordinates"));
    }
    {
        auto broken = spec;
        broken.map.labels.pop_back();
        auto msg = thrown_message([&] { instantiate(broken); });
        CHECK(contains(msg, "spec.map.labels"));
        CHECK(contains(msg, "expected 8"));
    }
    {
        auto broken = spec;
        broken.map.matrix[3].push_back("0");
        CHECK(contains(thrown_message([&] { instantiate(broken); }),
                       "spec.map.matrix[3]"));
    }
    {
        // doubling one frame row breaks the bracket certificate
        auto broken = spec;
        for (auto& e : broken.map.matrix[0])
            if (e == "1") e = "2"; else if (e == "-1") e = "-2";
        auto msg = thrown_message([&] { instantiate(broken); });
        CHECK(contains(msg, "spec.map"));
        CHECK(contains(msg, "not symplectic"));
    }
    {
        auto broken = spec;
        broken.params["m"] = "x + 1";
        CHECK(contains(thrown_message([&] { instantiate(broken); }),
                       "spec.params.m: binding must involve parameters only"));
    }
    {
        auto broken = spec;
        broken.gauge = "pb_y - (";
        CHECK(contains(thrown_message([&] { instantiate(broken); }), "spec.gauge"));
    }
    {
        auto broken = spec;
        broken.expected_kstar = "nosuch^2";
        CHECK(contains(thrown_message([&] { instantiate(broken); }),
                       "spec.expected.kstar"));
    }
    {
        // charges must stay clear of momenta, per the conserved-quantity rule
        auto broken = spec;
        broken.charges[0].expr = "x^2 + pb_x";
        auto msg = thrown_message([&] { instantiate(broken); });
        CHECK(contains(msg, "spec.charges[0]"));
        CHECK(contains(msg, "momenta"));
    }

    std::string text = spec_json(spec);
    auto pos = text.find("\"charges\"");
    REQUIRE(pos != std::string::npos);
    auto broken_text = text.substr(0, pos) + "\"charges\": [{\"expr\": \"x\"}],\n  " +
                       text.substr(text.find("\"coordinates\""));
    CHECK(contains(thrown_message([&] { parse_spec(broken_text); }),
                   "missing key 'coeff'"));
}

TEST_CASE("spec files load and reject from disk") {
    auto msg = thrown_message(
        [] { load_spec(std::string(EMQ_SOURCE_DIR) + "/tests/data/bad_charge.json"); });
    CHECK(contains(msg, "spec.charges[0]"));
    CHECK(contains(msg, "momenta"));

    CHECK(contains(thrown_message([] { load_spec("no_such_spec_file.json"); }),
                   "cannot open"));
}
