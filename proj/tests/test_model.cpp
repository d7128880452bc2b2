#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "ifcable/model.hpp"

using namespace ifcable;

namespace {

// Independent root finder: plain bisection of the cubic to interval width 1e-12.
double bisect_root(double beta, double gamma) {
    double lo = -std::max(beta, std::sqrt(3.0)) - 1, hi = 0;
    REQUIRE(model::h_cubic(lo, beta, gamma) < 0);
    REQUIRE(model::h_cubic(hi, beta, gamma) > 0);
    while (hi - lo > 1e-12) {
        const double mid = (lo + hi) / 2;
        (model::h_cubic(mid, beta, gamma) < 0 ? lo : hi) = mid;
    }
    return (lo + hi) / 2;
}

}  // namespace

TEST_CASE("cubic and discriminant spot values") {
    CHECK(model::h_cubic(-2.0, 6.0, 8.0) == doctest::Approx(-0.5).epsilon(1e-15));
    // first admissibility term vanishes at gamma = 1, leaving (9/4) beta^2
    CHECK(model::admissible_discriminant(1.0, 1.0) == doctest::Approx(2.25).epsilon(1e-15));
    CHECK(model::admissible_delta_condition(6.0, 8.0, 0.2) ==
          doctest::Approx(3.52475487839819620750705602726).epsilon(1e-14));
}

TEST_CASE("default delta grid spans (0, 1/4) log-spaced") {
    const auto grid = model::default_delta_grid<double>();
    CHECK(grid.size() == 64);
    CHECK(grid.front() == doctest::Approx(1e-4));
    CHECK(grid.back() == doctest::Approx(0.2499));
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) CHECK(grid[i] < grid[i + 1]);
    for (double d : grid) {
        CHECK(d > 0);
        CHECK(d < 0.25);
    }
}

TEST_CASE("admissibility verdicts") {
    SUBCASE("(1,1) passes the discriminant but no delta works") {
        const auto r = model::check_admissible(1.0, 1.0);
        CHECK_FALSE(r.admissible);
        CHECK_FALSE(r.witness.has_value());
    }
    SUBCASE("(6,8) admissible with witness 0.2 on a singleton grid") {
        const auto r = model::check_admissible(6.0, 8.0, std::vector<double>{0.2});
        CHECK(r.admissible);
        REQUIRE(r.witness.has_value());
        CHECK(*r.witness == 0.2);
    }
    SUBCASE("(6,8) default grid witness") {
        const auto r = model::check_admissible(6.0, 8.0);
        CHECK(r.admissible);
        REQUIRE(r.witness.has_value());
        CHECK(*r.witness == doctest::Approx(0.04973245357).epsilon(1e-9));
    }
    SUBCASE("argument validation") {
        CHECK_THROWS_AS(model::check_admissible(-1.0, 8.0), InvalidParameterError);
        CHECK_THROWS_AS(model::check_admissible(6.0, 0.0), InvalidParameterError);
        CHECK_THROWS_AS(model::check_admissible(6.0, 8.0, std::vector<double>{}),
                        InvalidGridError);
        CHECK_THROWS_AS(model::check_admissible(6.0, 8.0, std::vector<double>{0.3}),
                        InvalidGridError);
        CHECK_THROWS_AS(model::check_admissible(6.0, 8.0, std::vector<double>{0.1, 0.0}),
                        InvalidGridError);
    }
}

TEST_CASE("equilibrium at (6,8)") {
    const auto eq = model::solve_equilibrium(6.0, 8.0, 1e-12);
    CHECK(eq.v0 == doctest::Approx(-1.94472959292127140821297064817).epsilon(1e-13));
    CHECK(std::abs(model::h_cubic(eq.v0, 6.0, 8.0)) <= 1e-12);
    CHECK(eq.w0 == (eq.v0 + 6.0) / 8.0);  // linear recovery equation, exact
    CHECK(eq.v0 > -1.95);
    CHECK(eq.v0 < -1.94);
    CHECK(eq.v0 < -std::sqrt(1.625));  // upper bound at the witness delta 0.2
    CHECK(eq.v0 * eq.v0 - 1 > 0);
}

TEST_CASE("equilibrium frozen values for nearby parameter sets") {
    const auto e46 = model::solve_equilibrium(4.0, 6.0, 1e-12);
    CHECK(e46.v0 == doctest::Approx(-1.8867957374140892817802292023).epsilon(1e-13));
    CHECK(e46.w0 == doctest::Approx(0.35220071043098511970329513295).epsilon(1e-13));
    const auto e79 = model::solve_equilibrium(7.0, 9.0, 1e-12);
    CHECK(e79.v0 == doctest::Approx(-1.96343127939365888216532249065).epsilon(1e-13));
    CHECK(e79.w0 == doctest::Approx(0.559618746734037901981630834373).epsilon(1e-13));
}

TEST_CASE("equilibrium rejects non-admissible parameters") {
    CHECK_THROWS_AS(model::solve_equilibrium(1.0, 1.0, 1e-12), PreconditionError);
}

TEST_CASE("equilibrium bounds report at (6,8), delta = 0.2") {
    const auto eq = model::solve_equilibrium(6.0, 8.0, 1e-12);
    const auto r = model::equilibrium_bounds(eq, 6.0, 8.0, 0.2);
    CHECK(r.lower == -6.0);  // min{-beta, -sqrt(3)}
    CHECK(r.upper == doctest::Approx(-1.27475487839819620750705602726).epsilon(1e-14));
    CHECK(r.lower_ok);
    CHECK(r.upper_ok);
}

TEST_CASE("random admissible pairs: root bracketing, bounds, witness chain") {
    // Samples from the inclusion set {gamma >= 7, beta >= 2 gamma / 3}.
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> dg(7.0, 15.0), db(0.0, 6.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double gamma = dg(rng);
        const double beta = 2 * gamma / 3 + db(rng);
        const auto adm = model::check_admissible(beta, gamma);
        REQUIRE(adm.admissible);
        const double delta = *adm.witness;
        const auto eq = model::solve_equilibrium(beta, gamma, 1e-12);

        // library root vs independent bisection
        CHECK(std::abs(eq.v0 - bisect_root(beta, gamma)) <= 1e-10);

        const auto bounds = model::equilibrium_bounds(eq, beta, gamma, delta);
        CHECK(bounds.lower_ok);
        CHECK(bounds.upper_ok);

        // 1/max{beta^2-1, 2} <= 1/(v0^2-1) < delta*gamma
        const double inv = 1 / (eq.v0 * eq.v0 - 1);
        CHECK(inv >= 1 / std::max(beta * beta - 1, 2.0) - 1e-15);
        CHECK(inv < delta * gamma);

        // the cubic changes sign exactly once on a wide symmetric interval
        const double span = beta + std::sqrt(3.0) + 1;
        int sign_changes = 0;
        double prev = model::h_cubic(-span, beta, gamma);
        for (int i = 1; i <= 2000; ++i) {
            const double v = -span + 2 * span * double(i) / 2000.0;
            const double cur = model::h_cubic(v, beta, gamma);
            if ((prev < 0) != (cur < 0)) ++sign_changes;
            prev = cur;
        }
        CHECK(sign_changes == 1);
    }
}

TEST_CASE("model parameter validation") {
    model::ModelParams<double> p{0.5, 8.0, 6.0, 0.0, std::nullopt};
    CHECK_NOTHROW(model::validate(p));
    p.delta_witness = 0.2;
    CHECK_NOTHROW(model::validate(p));

    SUBCASE("positivity") {
        auto q = p;
        q.epsilon = 0;
        CHECK_THROWS_AS(model::validate(q), InvalidParameterError);
        q = p;
        q.gamma = -8;
        CHECK_THROWS_AS(model::validate(q), InvalidParameterError);
        q = p;
        q.beta = 0;
        CHECK_THROWS_AS(model::validate(q), InvalidParameterError);
        q = p;
        q.rho = -0.1;
        CHECK_THROWS_AS(model::validate(q), InvalidParameterError);
    }
    SUBCASE("witness range and witness quality") {
        auto q = p;
        q.delta_witness = 0.3;
        CHECK_THROWS_AS(model::validate(q), InvalidParameterError);
        q.delta_witness = 1e-5;  // inside (0,1/4) but fails the delta inequality
        CHECK_THROWS_AS(model::validate(q), InvalidParameterError);
    }
}

TEST_CASE("scalar genericity: equilibrium agrees across precisions") {
    const auto d = model::solve_equilibrium(6.0, 8.0, 1e-12);
    const auto l = model::solve_equilibrium<long double>(6.0L, 8.0L, 1e-15L);
    CHECK(std::abs(double(l.v0) - d.v0) <= 1e-11);
}
