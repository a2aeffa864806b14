#include <doctest.h>

#include "emq/ghost.hpp"
#include "emq/parser.hpp"
#include "emq/rng.hpp"

#include <cmath>

using namespace emq;

namespace {

ExtendedSystem pendulum() {
    auto sp = PhaseSpace::doubled({"x", "y"}, {"a1", "d", "m", "hbar"});
    return build_extended_system(sp, {parse_expr(sp, "-y"), parse_expr(sp, "x")});
}

ExtendedSystem rossler() {
    auto sp = PhaseSpace::doubled({"x", "y", "z"}, {"a1", "a2", "c", "d"});
    return build_extended_system(
        sp, {parse_expr(sp, "-y - z"), parse_expr(sp, "x"), parse_expr(sp, "x*z")});
}

ExtendedSystem quadratic_flow() {
    auto sp = PhaseSpace::doubled({"x"});
    return build_extended_system(sp, {parse_expr(sp, "x^2")});
}

ExtendedSystem free_flow() {
    auto sp = PhaseSpace::doubled({"x"});
    return build_extended_system(sp, {SymExpr::zero(sp)});
}

CRat ci(long n, long d = 1) { return CRat(Rat(0), rat(n, d)); }

using Table = std::vector<std::vector<Rat>>;

} // namespace

TEST_CASE("exterior algebra products") {
    std::vector<std::string> names;
    for (int i = 0; i < 6; ++i) names.push_back("g" + std::to_string(i));
    auto alg = std::make_shared<const GrassmannAlgebra>(names);
    auto gen = [&](int i) { return GrassmannElement::generator(alg, i); };
    auto one = GrassmannElement::scalar(alg, CRat(Rat(1)));

    CHECK(gen(0) * gen(0) == GrassmannElement::zero(alg));
    CHECK(gen(1) * gen(0) == -(gen(0) * gen(1)));
    CHECK((gen(0) * gen(1)) * gen(2) == gen(0) * (gen(1) * gen(2)));

    // finite products of (1 + nilpotent) elements invert pairwise
    auto prod = (one + gen(0)) * (one + gen(1)) * (one - gen(1)) * (one - gen(0));
    CHECK(prod == one);

    // scalars stay central
    auto s = GrassmannElement::scalar(alg, CRat(rat(3, 2), rat(-1, 3)));
    CHECK(s * gen(4) == gen(4) * s);

    // randomized associativity and distributivity
    std::uint64_t state = 2026;
    auto next = [&]() { return state = splitmix64(state); };
    auto random_elem = [&]() {
        GrassmannElement e = GrassmannElement::zero(alg);
        for (int t = 0; t < 3; ++t) {
            GenMask m;
            std::uint64_t bits = next() % 64;   // subsets of the 6 generators
            m.lo = bits;
            CRat c(rat(long(next() % 9) - 4), rat(long(next() % 9) - 4, 3));
            GrassmannElement piece = GrassmannElement::zero(alg);
            piece.add_term(m, c);
            e = e + piece;
        }
        return e;
    };
    for (int trial = 0; trial < 25; ++trial) {
        auto a = random_elem(), b = random_elem(), c = random_elem();
        CHECK((a * b) * c == a * (b * c));
        CHECK(a * (b + c) == a * b + a * c);
        CHECK((a + b) * c == a * c + b * c);
    }
}

TEST_CASE("merge signs across the word boundary") {
    std::vector<std::string> names;
    for (int i = 0; i < 90; ++i) names.push_back("e" + std::to_string(i));
    auto alg = std::make_shared<const GrassmannAlgebra>(names);
    auto gen = [&](int i) { return GrassmannElement::generator(alg, i); };

    CHECK(gen(64) * gen(63) == -(gen(63) * gen(64)));
    // merging e50 into e10^e70 moves it past one generator
    CHECK((gen(10) * gen(70)) * gen(50) == (gen(10) * gen(50) * gen(70)).scaled(CRat(rat(-1))));
    CHECK(gen(70) * gen(70) == GrassmannElement::zero(alg));

    GenMask high;
    high.set(89);
    CHECK((gen(89) * gen(2)).coeff(GenMask{}.unite(high)).is_zero());
}

TEST_CASE("lattice ghost action stencils") {
    SUBCASE("quadratic flow, three slices, all coefficients pinned") {
        auto sys = quadratic_flow();
        Table fields = {{rat(1), rat(2), rat(3)}, {rat(1, 2), rat(1), rat(-1)}};
        Table lambda = {{rat(1), rat(0), rat(2)}, {rat(2), rat(1), rat(1)}};
        auto act = discretize_action(sys, 3, rat(1, 2), fields, lambda);

        CHECK(act.alg->size() == 15);
        CHECK(action_structure_ok(act));

        auto c = [&](int m, int t) { return GrassmannElement::generator(act.alg, act.c_gen(m, t)); };
        auto cb = [&](int m, int t) {
            return GrassmannElement::generator(act.alg, act.cbar_gen(m, t));
        };

        // bosonic part: lambda contracted with the gradient of
        //   A = sum_t xbar_t (x_{t+1} - x_t - dt x_t^2)
        // ghost part: -i cbar H c over the forward-difference stencil plus the
        // curvature block -dt xbar f''
        auto expected =
            GrassmannElement::scalar(act.alg, CRat(rat(1))) +
            (cb(1, 0) * c(0, 1) + cb(0, 1) * c(1, 0)).scaled(ci(-1)) +
            (cb(1, 0) * c(0, 0) + cb(0, 0) * c(1, 0)).scaled(ci(2)) +
            (cb(1, 1) * c(0, 2) + cb(0, 2) * c(1, 1)).scaled(ci(-1)) +
            (cb(1, 1) * c(0, 1) + cb(0, 1) * c(1, 1)).scaled(ci(3)) +
            (cb(0, 0) * c(0, 0)).scaled(ci(1, 2)) + (cb(0, 1) * c(0, 1)).scaled(ci(1));
        CHECK(act.S == expected);

        CHECK(brst_check(act).is_zero());
        CHECK(superfield_check(act).is_zero());
    }

    SUBCASE("vanishing flow reduces to the bare difference operator") {
        auto sys = free_flow();
        Table fields = {{rat(2), rat(5), rat(7)}, {rat(1), rat(3), rat(4)}};
        Table lambda = {{rat(1), rat(1), rat(1)}, {rat(2), rat(0), rat(1)}};
        auto act = discretize_action(sys, 3, rat(1, 4), fields, lambda);

        auto c = [&](int m, int t) { return GrassmannElement::generator(act.alg, act.c_gen(m, t)); };
        auto cb = [&](int m, int t) {
            return GrassmannElement::generator(act.alg, act.cbar_gen(m, t));
        };
        auto expected =
            GrassmannElement::scalar(act.alg, CRat(rat(6))) +
            (cb(1, 0) * c(0, 1) + cb(0, 1) * c(1, 0) + cb(1, 1) * c(0, 2) + cb(0, 2) * c(1, 1))
                .scaled(ci(-1)) +
            (cb(1, 0) * c(0, 0) + cb(0, 0) * c(1, 0) + cb(1, 1) * c(0, 1) + cb(0, 1) * c(1, 1))
                .scaled(ci(1));
        CHECK(act.S == expected);
    }

    SUBCASE("grid and input validation") {
        auto sys = free_flow();
        Table two = {{rat(0), rat(0)}, {rat(0), rat(0)}};
        CHECK_THROWS_AS(discretize_action(sys, 2, rat(1, 4), two, two), EmqError);
        Table three = {{rat(0), rat(0), rat(0)}, {rat(0), rat(0), rat(0)}};
        CHECK_THROWS_AS(discretize_action(sys, 3, rat(0), three, three), EmqError);
        CHECK_THROWS_AS(discretize_action(sys, 3, rat(1, 4), two, three), EmqError);

        auto spe = PhaseSpace::doubled({"x"});
        auto expo = build_extended_system(spe, {parse_expr(spe, "exp(x)")});
        CHECK_THROWS_AS(discretize_action(expo, 3, rat(1, 4), three, three), EmqError);
    }
}

TEST_CASE("lattice symmetry variation vanishes exactly") {
    SUBCASE("pendulum grid") {
        auto sys = pendulum();
        int T = 4, nf = 4;
        Table fields(static_cast<std::size_t>(nf), std::vector<Rat>(static_cast<std::size_t>(T)));
        Table lambda = fields;
        long v = 0;
        for (auto& row : fields)
            for (auto& x : row) x = rat(((v += 7) % 11) - 5, 3);
        for (auto& row : lambda)
            for (auto& x : row) x = rat(((v += 5) % 9) - 4, 2);
        auto act = discretize_action(sys, T, rat(1, 8), fields, lambda);

        CHECK(act.alg->size() == 2 * nf * T + 3);
        CHECK(nf * T == 16);   // ghost generators per species on this grid
        CHECK(action_structure_ok(act));
        CHECK(brst_check(act).is_zero());
        CHECK(superfield_check(act).is_zero());

        auto broken = break_symmetry(act);
        CHECK_FALSE(brst_check(broken).is_zero());
        CHECK_FALSE(superfield_check(broken).is_zero());
        CHECK(action_structure_ok(broken));   // the tampering is purely bosonic
    }

    SUBCASE("cubic interaction exercises the curvature cancellation") {
        auto sys = rossler();
        int T = 3, nf = 6;
        Table fields(static_cast<std::size_t>(nf), std::vector<Rat>(static_cast<std::size_t>(T)));
        Table lambda = fields;
        long v = 1;
        for (auto& row : fields)
            for (auto& x : row) x = rat(((v += 11) % 13) - 6, 4);
        for (auto& row : lambda)
            for (auto& x : row) x = rat(((v += 3) % 7) - 3);
        auto act = discretize_action(sys, T, rat(1, 8), fields, lambda);

        CHECK(brst_check(act).is_zero());
        CHECK(superfield_check(act).is_zero());
        CHECK_FALSE(brst_check(break_symmetry(act)).is_zero());
    }
}

TEST_CASE("randomized sweep and its parallel path") {
    auto sys = pendulum();
    auto serial = brst_sweep(sys, 3, 4, 3, 20260822ull, {}, false);
    auto parallel = brst_sweep(sys, 3, 4, 3, 20260822ull, {}, true);
    CHECK(serial.configs == 6);
    CHECK(serial.all_zero());
    CHECK(serial.flags == parallel.flags);
    CHECK(parallel.failures == 0);

    auto rsweep = brst_sweep(rossler(), 3, 3, 2, 7ull);
    CHECK(rsweep.all_zero());

    CHECK_THROWS_AS(brst_sweep(sys, 2, 4, 1, 1ull), EmqError);
}

TEST_CASE("action functional weight check") {
    SUBCASE("doubled action closes on mirror weights") {
        auto sys = pendulum();
        int T = 8, nf = 4;
        auto fn = lattice_action_fn(sys, T, 0.1);
        std::vector<std::vector<double>> point(static_cast<std::size_t>(nf),
                                               std::vector<double>(static_cast<std::size_t>(T)));
        for (int m = 0; m < nf; ++m)
            for (int t = 0; t < T; ++t)
                point[size_t(m)][size_t(t)] = 0.3 + 0.11 * m + 0.07 * t - 0.02 * m * t;
        double res = euler_functional_check(fn, nf, T, {0, 0, 1, 1}, point, 1e-6);
        CHECK(res < 1e-8);

        std::vector<std::vector<double>> origin(size_t(nf), std::vector<double>(size_t(T), 0.0));
        CHECK(euler_functional_check(fn, nf, T, {0, 0, 1, 1}, origin, 1e-6) == 0.0);
    }

    SUBCASE("squared velocity needs half weights") {
        int T = 6;
        ActionFn fn = [T](const std::vector<std::vector<double>>& v) {
            double a = 0.0;
            for (int t = 0; t + 1 < T; ++t) {
                double d = v[0][size_t(t + 1)] - v[0][size_t(t)];
                a += d * d;
            }
            return a;
        };
        std::vector<std::vector<double>> point = {{0.4, 1.1, -0.3, 0.8, 0.2, -0.6}};
        CHECK(euler_functional_check(fn, 1, T, {1.0}, point, 1e-6) > 1e-2);
        CHECK(euler_functional_check(fn, 1, T, {0.5}, point, 1e-6) < 1e-8);
    }

    SUBCASE("difference-quotient error scales quadratically") {
        // homogeneous functional with a cubic dependence on the weighted field,
        // so the central-difference error term is visible and O(delta^2)
        int T = 5;
        ActionFn fn = [T](const std::vector<std::vector<double>>& v) {
            double a = 0.0;
            for (int t = 0; t < T; ++t) a += v[1][size_t(t)] * v[1][size_t(t)] * v[1][size_t(t)] *
                                              v[0][size_t(t)];
            return a;
        };
        std::vector<std::vector<double>> point(2, std::vector<double>(static_cast<std::size_t>(T)));
        for (int t = 0; t < T; ++t) {
            point[0][size_t(t)] = 0.7 + 0.13 * t;
            point[1][size_t(t)] = 1.2 - 0.21 * t;
        }
        double coarse = euler_functional_check(fn, 2, T, {0.0, 1.0 / 3.0}, point, 1e-2);
        double fine = euler_functional_check(fn, 2, T, {0.0, 1.0 / 3.0}, point, 1e-3);
        CHECK(coarse / fine > 50.0);
        CHECK(coarse / fine < 200.0);
        CHECK(euler_functional_check(fn, 2, T, {0.0, 1.0 / 3.0}, point, 1e-6) < 1e-8);
    }

    SUBCASE("input validation") {
        ActionFn fn = [](const std::vector<std::vector<double>>&) { return 0.0; };
        std::vector<std::vector<double>> point = {{0.0, 0.0, 0.0}};
        CHECK_THROWS_AS(euler_functional_check(fn, 1, 3, {1.0, 2.0}, point, 1e-6), EmqError);
        CHECK_THROWS_AS(euler_functional_check(fn, 1, 3, {1.0}, point, 0.0), EmqError);
    }
}

TEST_CASE("kinetic weight matrix analysis") {
    SUBCASE("minimal driven pair") {
        std::vector<std::vector<Rat>> B = {{rat(0), rat(1)}, {rat(0), rat(0)}};
        auto rep = alpha_structure_check(B);
        CHECK(rep.alpha == std::vector<Rat>{rat(0), rat(1)});
        CHECK(rep.rank == 1);
        CHECK(rep.identities_ok);
        CHECK(rep.block_ok);
    }

    SUBCASE("doubled kinetic form splits into coordinate and mirror halves") {
        // sum_a qbar_a qdot_a rewritten, modulo a total derivative, as
        // -q_a qbardot_a: strictly upper with the mirrors in the right block
        std::vector<std::vector<Rat>> B(4, std::vector<Rat>(4, rat(0)));
        B[0][2] = rat(-1);
        B[1][3] = rat(-1);
        auto rep = alpha_structure_check(B);
        CHECK(rep.alpha == std::vector<Rat>{rat(0), rat(0), rat(1), rat(1)});
        CHECK(rep.rank == 2);
        CHECK(rep.identities_ok);
        CHECK(rep.block_ok);
    }

    SUBCASE("rejections") {
        std::vector<std::vector<Rat>> odd(3, std::vector<Rat>(3, rat(0)));
        odd[0][1] = rat(1);
        odd[1][2] = rat(1);
        CHECK_THROWS_AS(alpha_structure_check(odd), EmqError);

        std::vector<std::vector<Rat>> lower = {{rat(0), rat(0)}, {rat(1), rat(0)}};
        CHECK_THROWS_AS(alpha_structure_check(lower), EmqError);

        std::vector<std::vector<Rat>> chain(4, std::vector<Rat>(4, rat(0)));
        chain[0][1] = rat(1);
        chain[1][2] = rat(1);
        chain[2][3] = rat(1);
        CHECK_THROWS_AS(alpha_structure_check(chain), EmqError);   // middle indices conflict

        std::vector<std::vector<Rat>> sparse(4, std::vector<Rat>(4, rat(0)));
        sparse[0][1] = rat(1);
        CHECK_THROWS_AS(alpha_structure_check(sparse), EmqError);   // untouched variables

        std::vector<std::vector<Rat>> fan(4, std::vector<Rat>(4, rat(0)));
        fan[0][1] = rat(1);
        fan[0][2] = rat(1);
        fan[0][3] = rat(1);
        CHECK_THROWS_AS(alpha_structure_check(fan), EmqError);   // rank 3 of 4
    }
}
