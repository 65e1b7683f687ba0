#include <catch_amalgamated.hpp>

#include "preheat/trajectory.hpp"
#include "support.hpp"

using namespace preheat;

TEST_CASE("simulate chains forward steps") {
    const auto p = default_params();
    const auto cyc = testing::preset_cycle();
    std::vector<double> u(cyc.steps(), 0.0);
    for (std::size_t k = 60; k < u.size(); ++k) u[k] = 3000.0;
    const auto t = simulate(p, cyc, testing::preset_initial, u);
    REQUIRE(t.states.size() == cyc.steps() + 1);
    REQUIRE(t.breakdowns.size() == cyc.steps());
    CHECK_NOTHROW(check_integrity(t, cyc));

    State s = testing::preset_initial;
    for (std::size_t k = 0; k < cyc.steps(); ++k) {
        s = step_forward(p, s, {u[k], k}, cyc).state;
        CHECK(t.states[k + 1] == s);
    }
    double e = 0.0;
    for (const auto& b : t.breakdowns) e += b.p_battery_w;
    CHECK_THAT(battery_energy_j(t), Catch::Matchers::WithinRel(e * 30.0, 1e-14));
}

TEST_CASE("simulate can start mid-cycle") {
    const auto p = default_params();
    const auto cyc = testing::preset_cycle();
    const std::vector<double> u(20, 1000.0);
    const auto t = simulate(p, cyc, {0.8, 0.0}, u, 100);
    CHECK(t.first_step == 100);
    CHECK(t.steps() == 20);
    CHECK_NOTHROW(check_integrity(t, cyc));
    CHECK_THROWS_AS(simulate(p, cyc, {0.8, 0.0}, u, 101), DomainError);
}

TEST_CASE("slice and concat are inverse") {
    const auto p = default_params();
    const auto cyc = testing::preset_cycle();
    const auto t = simulate(p, cyc, testing::preset_initial, std::vector<double>(cyc.steps(), 500.0));
    for (std::size_t cut : {std::size_t{0}, std::size_t{37}, cyc.steps()}) {
        const auto a = slice(t, 0, cut), b = slice(t, cut, t.steps());
        CHECK(a.steps() + b.steps() == t.steps());
        CHECK(b.first_step == cut);
        const auto j = concat(a, b);
        CHECK(j.states == t.states);
        CHECK(j.controls == t.controls);
    }
    CHECK_THROWS_AS(concat(slice(t, 0, 10), slice(t, 11, 20)), IntegrityError);
    CHECK_THROWS_AS(slice(t, 5, 4), IntegrityError);
}

TEST_CASE("integrity checks") {
    const auto p = default_params();
    const auto cyc = testing::preset_cycle();
    const auto good = simulate(p, cyc, testing::preset_initial, std::vector<double>(10, 0.0));

    auto t = good;
    t.states.pop_back();
    CHECK_THROWS_AS(check_integrity(t, cyc), IntegrityError);
    t = good;
    t.breakdowns.pop_back();
    CHECK_THROWS_AS(check_integrity(t, cyc), IntegrityError);
    t = good;
    t.dt = 1.0;
    CHECK_THROWS_AS(check_integrity(t, cyc), IntegrityError);
    t = good;
    t.first_step = cyc.steps() - 5;
    CHECK_THROWS_AS(check_integrity(t, cyc), IntegrityError);
    t = good;
    t.states[3].tb_c = std::nan("");
    CHECK_THROWS_AS(check_integrity(t, cyc), IntegrityError);
}

TEST_CASE("power infeasibility carries the failing step") {
    const auto p = default_params();
    std::vector<CycleSample> s(6, testing::quiet_sample());
    s[3].p_prop_w = 5e6;
    const DriveCycle cyc(30.0, s);
    try {
        simulate(p, cyc, {0.5, 0.0}, std::vector<double>(5, 0.0));
        FAIL("expected PowerInfeasible");
    } catch (const PowerInfeasible& e) {
        REQUIRE(e.step().has_value());
        CHECK(*e.step() == 3);
    }
}

TEST_CASE("origin names") {
    CHECK(to_string(Origin::forward) == "forward");
    CHECK(to_string(Origin::backward) == "backward");
    CHECK(to_string(Origin::spliced) == "spliced");
    CHECK(to_string(Origin::oracle) == "oracle");
}
