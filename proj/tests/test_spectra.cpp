#include <doctest.h>

#include "emq/parser.hpp"
#include "emq/spectra.hpp"

#include <cmath>

using namespace emq;

namespace {

std::shared_ptr<const PhaseSpace> line() {
    return PhaseSpace::plain({{"x", "p"}});
}

} // namespace

TEST_CASE("oscillator ladder from the grid") {
    auto sp = line();
    auto rep = grid_spectrum_1d(-0.5, parse_expr(sp, "x^2/2"), 10.0, 2000, 5);
    REQUIRE(rep.eigenvalues.size() == 5);
    attach_reference(rep, {0.5, 1.5, 2.5, 3.5, 4.5});
    CHECK(rep.max_abs_dev < 1e-3);
    CHECK(rep.max_abs_dev == doctest::Approx(1.280007e-4).epsilon(1e-3));
    // frozen grid values for this L=10, n=2000 discretization
    CHECK(rep.eigenvalues[0] == doctest::Approx(0.499996878104).epsilon(1e-9));
    CHECK(rep.eigenvalues[4] == doctest::Approx(4.499871999345).epsilon(1e-9));
    for (size_t i = 1; i < rep.eigenvalues.size(); ++i)
        CHECK(rep.eigenvalues[i] > rep.eigenvalues[i - 1]);
}

TEST_CASE("quartic well ground state") {
    auto sp = line();
    auto rep = grid_spectrum_1d(-0.5, parse_expr(sp, "x^4"), 10.0, 2000, 3);
    // continuum value 0.667986; the finite grid sits 9.4e-6 below it
    CHECK(rep.eigenvalues[0] == doctest::Approx(0.667976887901).epsilon(1e-9));
    CHECK(rep.eigenvalues[0] == doctest::Approx(0.667986).epsilon(2e-5));

    auto fine = grid_spectrum_1d(-0.5, parse_expr(sp, "x^4"), 10.0, 4000, 1);
    double rich = (4.0 * fine.eigenvalues[0] - rep.eigenvalues[0]) / 3.0;
    CHECK(rich == doctest::Approx(0.667986259156).epsilon(1e-8));
}

TEST_CASE("grid refinement converges at second order") {
    auto sp = line();
    auto v = parse_expr(sp, "x^2/2");
    double err[3];
    const int ns[3] = {250, 500, 1000};
    for (int i = 0; i < 3; ++i)
        err[i] = std::fabs(grid_spectrum_1d(-0.5, v, 10.0, ns[i], 1).eigenvalues[0] - 0.5);
    CHECK(err[0] / err[1] == doctest::Approx(3.9853).epsilon(0.05));
    CHECK(err[1] / err[2] == doctest::Approx(3.9923).epsilon(0.05));
}

TEST_CASE("reflected grids carry the same spectrum") {
    auto sp = line();
    // parity conjugation leaves the spectrum alone even for a lopsided well
    auto v = parse_expr(sp, "x^4 + x^3/2 + x");
    auto vr = parse_expr(sp, "x^4 - x^3/2 - x");
    auto a = grid_spectrum_1d(-0.5, v, 8.0, 600, 6);
    auto b = grid_spectrum_1d(-0.5, vr, 8.0, 600, 6);
    for (size_t i = 0; i < 6; ++i)
        CHECK(std::fabs(a.eigenvalues[i] - b.eigenvalues[i]) < 1e-10);
}

TEST_CASE("periodic free dispersion matches the lattice closed form") {
    auto sp = line();
    const double L = 6.0;
    const int n = 128;
    auto rep = grid_spectrum_1d(-0.5, parse_expr(sp, "0"), L, n, 6, true);
    // modes (2 - 2 cos(2 pi j / n)) / (2 h^2), doubly degenerate off j=0
    const double h = 2.0 * L / n;
    std::vector<double> ref;
    for (int j = 0; j < n; ++j)
        ref.push_back((2.0 - 2.0 * std::cos(2.0 * M_PI * j / n)) / (2.0 * h * h));
    std::sort(ref.begin(), ref.end());
    for (size_t i = 0; i < 6; ++i)
        CHECK(rep.eigenvalues[i] == doctest::Approx(ref[i]).epsilon(1e-9));
    CHECK(rep.eigenvalues[1] == doctest::Approx(0.137050316).epsilon(1e-6));
    CHECK(std::fabs(rep.eigenvalues[1] - rep.eigenvalues[2]) < 1e-10);
    // long-wave edge of the band approaches the continuum dispersion
    CHECK(rep.eigenvalues[1] ==
          doctest::Approx(0.5 * (M_PI / L) * (M_PI / L)).epsilon(1e-3));
}

TEST_CASE("spectrum input validation") {
    auto sp = line();
    auto v = parse_expr(sp, "x^2/2");
    CHECK_THROWS_AS(grid_spectrum_1d(-0.5, v, 10.0, 50, 1), EmqError);
    CHECK_THROWS_AS(grid_spectrum_1d(-0.5, v, 10.0, 100, 0), EmqError);
    CHECK_THROWS_AS(grid_spectrum_1d(-0.5, v, 10.0, 100, 101), EmqError);
    CHECK_THROWS_AS(grid_spectrum_1d(-0.5, v, 0.0, 100, 1), EmqError);
    CHECK_THROWS_AS(grid_spectrum_1d(-0.5, parse_expr(sp, "x + p"), 10.0, 100, 1),
                    EmqError);
}

TEST_CASE("partition sum against the closed oscillator form") {
    auto sp = line();
    auto rep = grid_spectrum_1d(-0.5, parse_expr(sp, "x^2/2"), 10.0, 2000, 50);

    SUBCASE("moderate temperature") {
        SpectrumReport eight = rep;
        eight.eigenvalues.resize(8);
        auto pc = partition_check(eight, 2.0);
        CHECK(pc.rel_err < 1e-4);
        CHECK(pc.rel_err == doctest::Approx(1.065225e-5).epsilon(1e-2));
        CHECK(pc.z_reference ==
              doctest::Approx(std::exp(-1.0) / (1.0 - std::exp(-2.0))).epsilon(1e-12));
    }

    SUBCASE("cold limit is ground-state dominated") {
        SpectrumReport eight = rep;
        eight.eigenvalues.resize(8);
        auto pc = partition_check(eight, 20.0);
        CHECK(pc.z_spectrum / std::exp(-20.0 * eight.eigenvalues[0]) - 1.0 < 1e-8);
    }

    SUBCASE("level truncation is quantified by the tail") {
        SpectrumReport ten = rep;
        ten.eigenvalues.resize(10);
        auto p10 = partition_check(ten, 1.0);
        auto p50 = partition_check(rep, 1.0);
        CHECK(p50.z_spectrum - p10.z_spectrum ==
              doctest::Approx(4.359576e-5).epsilon(1e-3));
        // analytic dropped tail: sum_{n>=10} e^{-(n+1/2)}
        CHECK(p50.z_spectrum - p10.z_spectrum ==
              doctest::Approx(4.356202e-5).epsilon(2e-3));
        CHECK(p10.rel_err > p50.rel_err);
    }

    SUBCASE("heavy tail throws") {
        SpectrumReport eight = rep;
        eight.eigenvalues.resize(8);
        CHECK_THROWS_AS(partition_check(eight, 0.5), EmqError);
        CHECK_THROWS_AS(partition_check(eight, 0.0), EmqError);
        SpectrumReport empty;
        CHECK_THROWS_AS(partition_check(empty, 2.0), EmqError);
    }
}

TEST_CASE("quartic-pair coupling constants") {
    auto rep = duffing_constants_check(Rat(1), Rat(1));
    REQUIRE(rep.quarter_root.size() == 3);
    REQUIRE(rep.printed.size() == 3);

    // quarter-root coupling: A and C land exactly on target, B matches in
    // magnitude with the opposite sign
    CHECK(rep.quarter_root[0].name == "A");
    CHECK(rep.quarter_root[0].match);
    CHECK(rep.quarter_root[0].ratio_sq == 1);
    CHECK(rep.quarter_root[1].name == "B");
    CHECK_FALSE(rep.quarter_root[1].match);
    CHECK(rep.quarter_root[1].ratio_sq == 1);
    CHECK(rep.quarter_root[1].sign == -1);
    CHECK(rep.quarter_root[2].name == "C");
    CHECK(rep.quarter_root[2].match);
    CHECK_FALSE(rep.all_match(false));

    // the printed 2^(3/4) coupling misses by clean powers of two
    CHECK(rep.printed[0].match);
    CHECK(rep.printed[1].ratio_sq == 4);
    CHECK(rep.printed[2].ratio_sq == 16);
    CHECK_FALSE(rep.all_match(true));

    // scale covariance in the masses
    auto rep2 = duffing_constants_check(Rat(3, 2), Rat(5));
    CHECK(rep2.quarter_root[0].match);
    CHECK(rep2.quarter_root[1].ratio_sq == 1);
    CHECK(rep2.quarter_root[2].match);
    CHECK(rep2.printed[1].ratio_sq == 4);
    CHECK(rep2.printed[2].ratio_sq == 16);

    // numeric spot-check at unit masses: A = 1/2, |B| = 1, C = 1 against
    // targets 1/2, 1, 1
    const double a1 = 1.0 / 8.0, d = 0.5, c2 = std::sqrt(2.0), c4 = 2.0;
    CHECK(2.0 * d * d * (4.0 * a1 + 0.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(-8.0 * std::sqrt(2.0) * a1 * d * c2 == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(4.0 * a1 * c4 == doctest::Approx(1.0).epsilon(1e-15));

    CHECK_THROWS_AS(duffing_constants_check(Rat(0), Rat(1)), EmqError);
    CHECK_THROWS_AS(duffing_constants_check(Rat(1), Rat(-2)), EmqError);
}
