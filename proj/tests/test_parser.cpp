#include <doctest.h>

#include "emq/parser.hpp"

using namespace emq;

namespace {
auto sp3() { return PhaseSpace::doubled({"x", "y", "z"}, {"c", "d", "hbar", "m"}); }
} // namespace

TEST_CASE("literals are read exactly") {
    auto sp = sp3();
    CHECK(parse_expr(sp, "0.25") == SymExpr::constant(sp, Quad(rat(1, 4))));
    CHECK(parse_expr(sp, "3/4") == SymExpr::constant(sp, Quad(rat(3, 4))));
    CHECK(parse_expr(sp, "2^10") == SymExpr::constant(sp, Quad(rat(1024))));
    CHECK(parse_expr(sp, "sqrt2^2") == SymExpr::constant(sp, Quad(2)));
    CHECK(parse_expr(sp, "1/sqrt2") == SymExpr::constant(sp, Quad(rat(0), rat(1, 2))));
    CHECK(parse_expr(sp, "0.1") == SymExpr::constant(sp, Quad(rat(1, 10))));
}

TEST_CASE("precedence and unary minus") {
    auto sp = sp3();
    CHECK(parse_expr(sp, "x + 2*y^2") == parse_expr(sp, "x + 2*(y*y)"));
    CHECK(parse_expr(sp, "-x^2") == -parse_expr(sp, "x^2"));
    CHECK(parse_expr(sp, "(x + y)*(x - y)") == parse_expr(sp, "x^2 - y^2"));
    CHECK(parse_expr(sp, "x - -y") == parse_expr(sp, "x + y"));
    CHECK(parse_expr(sp, "2*x/4") == parse_expr(sp, "x/2"));
}

TEST_CASE("momentum and auxiliary names resolve") {
    auto sp = sp3();
    auto phi = parse_expr(sp, "p_x - qb_x");
    CHECK(phi.depends_on(sp->require("p_x")));
    CHECK(phi.depends_on(sp->require("qb_x")));
    CHECK(poisson(phi, parse_expr(sp, "pb_x")) == SymExpr::constant(sp, Quad(-1)));
    CHECK(poisson(phi, parse_expr(sp, "pb_y")).is_zero());
}

TEST_CASE("parameter inverses in constants") {
    auto sp = sp3();
    auto a1 = parse_expr(sp, "1/(2*m*hbar)");
    CHECK(a1.is_invertible_term());
    CHECK(a1 * parse_expr(sp, "2*m*hbar") == SymExpr::constant(sp, Quad(1)));
    CHECK(parse_expr(sp, "d^-2") == pow_int(parse_expr(sp, "d"), -2));
    CHECK(parse_expr(sp, "x/d") == parse_expr(sp, "d^-1*x"));
}

TEST_CASE("exponential factors") {
    auto sp = sp3();
    auto e = parse_expr(sp, "exp(-2*y)");
    CHECK(differentiate(e, sp->require("y")) == e.scaled(Quad(-2)));
    CHECK(parse_expr(sp, "exp(x)*exp(-x)") == SymExpr::constant(sp, Quad(1)));
    CHECK(parse_expr(sp, "exp(x + y)") == parse_expr(sp, "exp(x)*exp(y)"));
    CHECK(parse_expr(sp, "exp(sqrt2*x)") == pow_int(parse_expr(sp, "exp(x/sqrt2)"), 2));
}

TEST_CASE("malformed input is rejected with clear errors") {
    auto sp = sp3();
    CHECK_THROWS_WITH_AS(parse_expr(sp, "w + 1"), "unknown symbol 'w'", ParseError);
    CHECK_THROWS_AS(parse_expr(sp, "x^y"), ParseError);
    CHECK_THROWS_AS(parse_expr(sp, "x^(1/2)"), ParseError);
    CHECK_THROWS_AS(parse_expr(sp, "x^1.5"), ParseError);
    CHECK_THROWS_AS(parse_expr(sp, "x/(x+y)"), ParseError);
    CHECK_THROWS_AS(parse_expr(sp, "1/y"), ParseError);
    CHECK_THROWS_AS(parse_expr(sp, "exp(x^2)"), ParseError);
    CHECK_THROWS_AS(parse_expr(sp, "exp(x + 1)"), ParseError);
    CHECK_THROWS_AS(parse_expr(sp, "exp(exp(x))"), ParseError);
    CHECK_THROWS_AS(parse_expr(sp, "x +"), ParseError);
    CHECK_THROWS_AS(parse_expr(sp, "(x"), ParseError);
    CHECK_THROWS_AS(parse_expr(sp, "x y"), ParseError);
    CHECK_THROWS_AS(parse_expr(sp, "x $ y"), ParseError);
    CHECK_THROWS_AS(parse_expr(sp, "1..5"), ParseError);
    CHECK_THROWS_AS(parse_expr(sp, ""), ParseError);
    CHECK_THROWS_AS(parse_expr(sp, "y^-1"), ParseError);
}
