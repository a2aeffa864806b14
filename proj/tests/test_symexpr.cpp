#include <doctest.h>

#include "emq/parser.hpp"
#include "emq/symexpr.hpp"

#include <random>

using namespace emq;

namespace {

std::shared_ptr<const PhaseSpace> space2() {
    return PhaseSpace::doubled({"x", "y"}, {"d", "m"});
}

// small random polynomial-with-exp expressions for property tests
SymExpr random_expr(const std::shared_ptr<const PhaseSpace>& sp, std::mt19937& rng) {
    std::uniform_int_distribution<int> nterms(1, 3), coef(-3, 3), den(1, 2), sym(0, sp->phase_dim() - 1),
        ex(0, 2), wsel(0, 3);
    SymExpr e(sp);
    int n = nterms(rng);
    for (int t = 0; t < n; ++t) {
        TermKey k;
        int s1 = sym(rng), s2 = sym(rng);
        int e1 = ex(rng), e2 = ex(rng);
        std::map<int, int> pows;
        if (e1) pows[s1] += e1;
        if (e2) pows[s2] += e2;
        for (auto& [s, p] : pows) k.pows.emplace_back(s, p);
        int w = wsel(rng);
        if (w == 1) k.weights.emplace_back(sym(rng), Quad(rat(1)));
        if (w == 2) k.weights.emplace_back(sym(rng), Quad(rat(-2)));
        int c = coef(rng);
        if (c == 0) c = 1;
        e.add_term(k, Quad(rat(c, den(rng))));
    }
    return e;
}

} // namespace

TEST_CASE("quad field arithmetic") {
    Quad s = Quad::sqrt2();
    CHECK((s * s) == Quad(2));
    Quad a(rat(1), rat(1));    // 1 + sqrt2
    Quad b(rat(1), rat(-1));   // 1 - sqrt2
    CHECK((a * b) == Quad(-1));
    Quad inv = a.inverse();
    CHECK((a * inv).is_one());
    CHECK(inv == Quad(rat(-1), rat(1)));
    CHECK_THROWS_AS(Quad().inverse(), EmqError);
    CHECK(Quad(rat(1, 2), rat(-3, 4)).str() == "(1/2-3/4*sqrt2)");
    CHECK(doctest::Approx(s.to_double()) == 1.4142135623730951);
}

TEST_CASE("phase space layout and lookup") {
    auto sp = space2();
    CHECK(sp->phase_dim() == 8);
    CHECK(sp->require("x") == sp->coord(0));
    CHECK(sp->require("p_y") == sp->momentum(1));
    CHECK(sp->require("qb_x") == sp->aux_coord(0));
    CHECK(sp->require("pb_y") == sp->aux_momentum(1));
    CHECK(sp->is_param(sp->require("d")));
    CHECK(sp->find("nope") == -1);
    CHECK_THROWS_AS(sp->require("nope"), EmqError);
    CHECK_THROWS_AS(PhaseSpace::doubled({"x", "x"}), EmqError);
    CHECK_THROWS_AS(PhaseSpace::doubled({"exp"}), EmqError);
    CHECK_THROWS_AS(PhaseSpace::doubled({"2bad"}), EmqError);
}

TEST_CASE("ring operations reach canonical form") {
    auto sp = space2();
    auto x = SymExpr::symbol(sp, sp->require("x"));
    auto y = SymExpr::symbol(sp, sp->require("y"));
    CHECK(x * y == y * x);
    auto lhs = (x + y) * (x + y);
    auto rhs = x * x + x * y.scaled(Quad(2)) + y * y;
    CHECK(lhs == rhs);
    CHECK((x - x).is_zero());
    CHECK(pow_int(x + y, 0) == SymExpr::constant(sp, Quad(1)));
    CHECK(pow_int(x, 3) == x * x * x);
}

TEST_CASE("negative powers only for parameters") {
    auto sp = space2();
    auto d = SymExpr::symbol(sp, sp->require("d"), -2);
    CHECK(d.is_invertible_term());
    CHECK(d.inverse_term() == SymExpr::symbol(sp, sp->require("d"), 2));
    CHECK_THROWS_AS(SymExpr::symbol(sp, sp->require("x"), -1), EmqError);
    auto x = SymExpr::symbol(sp, sp->require("x"));
    CHECK_THROWS_AS(pow_int(x, -1), EmqError);
}

TEST_CASE("differentiation with exponential weights") {
    auto sp = PhaseSpace::doubled({"x", "y", "z"});
    auto e = parse_expr(sp, "z^2*exp(-2*y)");
    auto dy = differentiate(e, sp->require("y"));
    CHECK(dy == parse_expr(sp, "-2*z^2*exp(-2*y)"));
    auto dz = differentiate(e, sp->require("z"));
    CHECK(dz == parse_expr(sp, "2*z*exp(-2*y)"));
    CHECK(differentiate(e, sp->require("x")).is_zero());

    auto f = parse_expr(sp, "x*exp(3*x)");
    CHECK(differentiate(f, sp->require("x")) == parse_expr(sp, "exp(3*x) + 3*x*exp(3*x)"));
}

TEST_CASE("canonical brackets") {
    auto sp = space2();
    auto one = SymExpr::constant(sp, Quad(1));
    auto x = parse_expr(sp, "x");
    CHECK(poisson(x, parse_expr(sp, "p_x")) == one);
    CHECK(poisson(x, parse_expr(sp, "p_y")).is_zero());
    CHECK(poisson(x, parse_expr(sp, "qb_x")).is_zero());
    CHECK(poisson(x, parse_expr(sp, "pb_x")).is_zero());
    CHECK(poisson(parse_expr(sp, "qb_y"), parse_expr(sp, "pb_y")) == one);
    CHECK(poisson(parse_expr(sp, "p_x"), x) == -one);
}

TEST_CASE("bracket satisfies Leibniz and Jacobi") {
    auto sp = space2();
    std::mt19937 rng(20260822);
    for (int trial = 0; trial < 25; ++trial) {
        auto a = random_expr(sp, rng);
        auto b = random_expr(sp, rng);
        auto c = random_expr(sp, rng);
        CHECK((poisson(a, b) + poisson(b, a)).is_zero());
        CHECK((poisson(a, b * c) - poisson(a, b) * c - b * poisson(a, c)).is_zero());
        auto jac = poisson(a, poisson(b, c)) + poisson(b, poisson(c, a)) + poisson(c, poisson(a, b));
        CHECK(jac.is_zero());
    }
}

TEST_CASE("simultaneous substitution") {
    auto sp = space2();
    auto x = parse_expr(sp, "x");
    auto y = parse_expr(sp, "y");
    std::map<int, SymExpr> swap{{sp->require("x"), y}, {sp->require("y"), x}};
    auto e = parse_expr(sp, "x^2 - y");
    CHECK(substitute(e, swap) == parse_expr(sp, "y^2 - x"));

    // weak-equality style: p -> qb, pb -> 0
    std::map<int, SymExpr> weak{
        {sp->require("p_x"), parse_expr(sp, "qb_x")},
        {sp->require("pb_x"), SymExpr::zero(sp)},
    };
    CHECK(substitute(parse_expr(sp, "p_x - qb_x"), weak).is_zero());
    CHECK(substitute(parse_expr(sp, "pb_x^2 + p_x"), weak) == parse_expr(sp, "qb_x"));
}

TEST_CASE("substitution distributes over exp arguments") {
    auto src = PhaseSpace::doubled({"x", "y", "z"});
    auto dst = PhaseSpace::plain({{"Q1", "P1"}, {"Q2", "P2"}, {"Q3", "P3"}});
    auto e = parse_expr(src, "z^2*exp(-2*y)");
    std::map<int, SymExpr> bind{
        {src->require("y"), parse_expr(dst, "Q2 - P1")},
        {src->require("z"), parse_expr(dst, "Q3")},
    };
    CHECK(substitute(e, bind) == parse_expr(dst, "Q3^2*exp(-2*Q2 + 2*P1)"));

    std::map<int, SymExpr> bad{{src->require("y"), parse_expr(dst, "Q2 + 1")}};
    CHECK_THROWS_AS(substitute(e, bad), EmqError);
    std::map<int, SymExpr> nonlin{{src->require("y"), parse_expr(dst, "Q2^2")}};
    CHECK_THROWS_AS(substitute(e, nonlin), EmqError);
}

TEST_CASE("numeric and rational evaluation") {
    auto sp = space2();
    auto e = parse_expr(sp, "x^2*exp(-2*y) + sqrt2*d");
    std::map<int, double> vals{
        {sp->require("x"), 3.0}, {sp->require("y"), 0.5}, {sp->require("d"), -1.0}};
    double expect = 9.0 * std::exp(-1.0) + std::sqrt(2.0) * (-1.0);
    CHECK(doctest::Approx(evaluate(e, vals)).epsilon(1e-14) == expect);
    CHECK_THROWS_AS(evaluate(e, {{sp->require("x"), 1.0}}), EmqError);

    auto r = parse_expr(sp, "x^2 - d^-1");
    std::map<int, Rat> rv{{sp->require("x"), rat(3, 2)}, {sp->require("d"), rat(-2)}};
    CHECK(evaluate_rat(r, rv) == rat(11, 4));
    CHECK_THROWS_AS(evaluate_rat(parse_expr(sp, "sqrt2*x"), rv), EmqError);
}

TEST_CASE("polynomial collection in one symbol") {
    auto sp = space2();
    int px = sp->require("p_x");
    auto e = parse_expr(sp, "2*p_x^2*x - p_x*y + d");
    CHECK(degree_in(e, px) == 2);
    CHECK(coeff_in(e, px, 2) == parse_expr(sp, "2*x"));
    CHECK(coeff_in(e, px, 1) == parse_expr(sp, "-y"));
    CHECK(coeff_in(e, px, 0) == parse_expr(sp, "d"));
    CHECK_THROWS_AS(degree_in(parse_expr(sp, "exp(p_x)"), px), EmqError);
}

TEST_CASE("exact division by a single term") {
    auto sp = space2();
    auto a = parse_expr(sp, "2*d*x^2*y - 4*x*y^2");
    auto b = parse_expr(sp, "2*x*y");
    auto q = divide_exact(a, b);
    REQUIRE(q.has_value());
    CHECK(*q == parse_expr(sp, "d*x - 2*y"));
    CHECK(!divide_exact(parse_expr(sp, "x + y"), parse_expr(sp, "x")).has_value());
    // parameters may absorb negative powers
    auto qq = divide_exact(parse_expr(sp, "x"), parse_expr(sp, "d"));
    REQUIRE(qq.has_value());
    CHECK(*qq == parse_expr(sp, "x*d^-1"));
    CHECK(!divide_exact(a, parse_expr(sp, "x + y")).has_value());
}

TEST_CASE("serialization is canonical and round-trips") {
    auto sp = space2();
    const char* cases[] = {
        "0",
        "1/2",
        "-x",
        "x^2*y - 2*x*y^2 + 1/3",
        "sqrt2*x - (1/2+sqrt2)*y",
        "d^-2*p_x^2",
        "qb_x*exp(-2*y) - pb_y*exp(x)",
        "m*exp(sqrt2*x)",
    };
    for (const char* c : cases) {
        auto e = parse_expr(sp, c);
        auto s = serialize(e);
        CHECK(parse_expr(sp, s) == e);
        CHECK(serialize(parse_expr(sp, s)) == s);
    }
    std::mt19937 rng(7);
    for (int i = 0; i < 40; ++i) {
        auto e = random_expr(sp, rng);
        CHECK(parse_expr(sp, serialize(e)) == e);
    }
}
