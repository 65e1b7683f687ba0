#include <catch_amalgamated.hpp>

#include <random>

#include "preheat/accounting.hpp"
#include "preheat/heuristic.hpp"
#include "preheat/oracle.hpp"
#include "support.hpp"

using namespace preheat;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Trajectory with_controls(std::vector<double> u) {
    Trajectory t;
    t.dt = 30.0;
    t.controls = std::move(u);
    t.states.resize(t.controls.size() + 1);
    t.breakdowns.resize(t.controls.size());
    return t;
}

} // namespace

TEST_CASE("switch index and bang-off structure") {
    const auto p = default_params();
    const auto cyc = testing::constant_cycle(6, 30.0, CycleSample{0, 0, 500, 1978, -7, 35});
    const double m = 6500.0 - 1978.0;

    CHECK(switch_index(with_controls({0, 0, 0, 0, 0, 0})) == 6);
    CHECK(is_bang_off(with_controls({0, 0, 0, 0, 0, 0}), p, cyc));
    CHECK(switch_fraction(with_controls({0, 0, 0, 0, 0, 0}), p, cyc) == 0.0);

    const auto clean = with_controls({0, 0, 0, m, m, m});
    CHECK(switch_index(clean) == 3);
    CHECK(is_bang_off(clean, p, cyc));
    CHECK(switch_fraction(clean, p, cyc) == 1.0);

    const auto partial_switch = with_controls({0, 0, m / 4, m, m, m});
    CHECK(switch_index(partial_switch) == 2);
    CHECK(is_bang_off(partial_switch, p, cyc));
    CHECK_THAT(switch_fraction(partial_switch, p, cyc), WithinAbs(0.25, 1e-15));

    CHECK_FALSE(is_bang_off(with_controls({0, 0, m, m / 2, m, m}), p, cyc));
    CHECK_FALSE(is_bang_off(with_controls({0, m, 0, m, m, m}), p, cyc));
    CHECK_FALSE(is_bang_off(with_controls({0, 0, m, m, m, 0}), p, cyc));
}

TEST_CASE("grid validation") {
    DpGrid g;
    CHECK_NOTHROW(g.validate());
    g.n_u = 1;
    CHECK_THROWS_AS(g.validate(), DomainError);
    g = {};
    g.n_soc = 1;
    CHECK_THROWS_AS(g.validate(), DomainError);
    g = {};
    g.max_cost_divergence_rel = 0.0;
    CHECK_THROWS_AS(g.validate(), DomainError);
}

TEST_CASE("targets met without heating give the null-control optimum") {
    const auto p = default_params();
    const auto cyc = testing::preset_cycle();
    const auto fw = forward_rollout(p, cyc, testing::preset_initial);
    const Targets tg{0.6, fw.terminal().tb_c - 1.0};
    const auto dp = solve_dp(p, cyc, testing::preset_initial, tg, DpGrid{});
    for (double u : dp.trajectory.controls) CHECK(u == 0.0);
    CHECK(dp.switch_index == cyc.steps());
    CHECK(dp.cost_wh == battery_energy_j(fw) / seconds_per_hour);
    CHECK(dp.trajectory.states == fw.states);
}

TEST_CASE("unreachable targets are infeasible") {
    const auto p = default_params();
    const auto cyc = testing::preset_cycle();
    CHECK_THROWS_AS(solve_dp(p, cyc, testing::preset_initial, {0.95, 25.0}, DpGrid{}), InfeasibleProblem);
    CHECK_THROWS_AS(solve_dp(p, cyc, testing::preset_initial, {0.6, 39.0}, DpGrid{}), InfeasibleProblem);
}

TEST_CASE("a 3x3 grid is too coarse") {
    const auto p = default_params();
    const auto cyc = testing::preset_cycle();
    DpGrid g;
    g.n_soc = 3;
    g.n_tb = 3;
    g.n_u = 2;
    CHECK_THROWS_AS(solve_dp(p, cyc, testing::preset_initial, {0.6, 25.0}, g), GridTooCoarse);
}

TEST_CASE("default setup") {
    const auto p = default_params();
    const auto cyc = testing::preset_cycle();
    const Targets tg{0.6, 25.0};
    const auto c = compare(p, cyc, testing::preset_initial, tg, DpGrid{});
    const auto& dp = c.dp;

    CHECK(dp.bang_off);
    CHECK(dp.trajectory.origin == Origin::oracle);
    CHECK_NOTHROW(check_integrity(dp.trajectory, cyc));
    CHECK(dp.trajectory.limit_violations() == 0);
    CHECK(dp.cost_wh == battery_energy_j(dp.trajectory) / seconds_per_hour);
    CHECK(std::abs(dp.cost_wh - dp.predicted_cost_wh) <= 0.02 * dp.cost_wh);
    CHECK(std::isfinite(dp.bellman_max_residual_wh));

    const auto& t = dp.trajectory.terminal();
    CHECK(t.tb_c >= tg.tb_f_c - 0.5);
    CHECK(t.soc >= tg.soc_f - 0.5 * (p.soc_max - p.soc_min) / 60.0);
    for (const auto& s : dp.trajectory.states) {
        CHECK(s.soc >= p.soc_min);
        CHECK(s.tb_c <= p.tb_max_c);
    }

    CHECK(c.gap.total_gap_rel <= 0.005);
    CHECK(std::abs(c.gap.switch_delta_steps) <= 2);
    CHECK(c.gap.switch_delta_s == c.gap.switch_delta_steps * 30.0);
    CHECK(c.gap.heuristic_switch_index == c.plan.splice_index);
    CHECK(c.gap.oracle_switch_index == dp.switch_index);
    CHECK(c.gap.delta.ed_heating_wh == 0.0);
    CHECK_THAT(c.gap.delta.total_battery_wh, WithinAbs(c.gap.heuristic.total_battery_wh - dp.cost_wh, 1e-6));
}

TEST_CASE("identical trajectories give a zero gap") {
    const auto p = default_params();
    const auto cyc = testing::preset_cycle();
    const auto plan = plan_preheat(p, cyc, testing::preset_initial, {0.6, 25.0});
    const auto g = gap_report(plan.trajectory, plan.trajectory, p, cyc);
    for (const auto& row : detail::report_rows()) CHECK(g.delta.*row.field == 0.0);
    CHECK(g.total_gap_rel == 0.0);
    CHECK(g.switch_delta_steps == 0);
    CHECK(g.max_tb_deviation_k == 0.0);
    CHECK_THROWS_AS(gap_report(plan.trajectory, slice(plan.trajectory, 0, 10), p, cyc), IntegrityError);
}

TEST_CASE("value snapshots on request") {
    const auto p = default_params();
    const auto cyc = testing::preset_cycle();
    DpGrid g;
    g.n_soc = 31;
    g.n_tb = 61;
    g.n_u = 3;
    g.keep_value_snapshots = true;
    const auto dp = solve_dp(p, cyc, testing::preset_initial, {0.6, 25.0}, g);
    REQUIRE(dp.value_snapshots.size() == cyc.steps());
    CHECK(dp.value_snapshots.front().size() == 31u * 61u);
}

TEST_CASE("refinement shrinks the change in extracted cost") {
    const auto p = default_params();
    const auto cyc = testing::preset_cycle();
    // coarse levels miss the target, so only the trend is examined here
    std::vector<double> cost;
    for (auto [ns, nt, nu] : {std::tuple{16, 21, 2}, {31, 41, 3}, {61, 81, 5}, {121, 161, 9}}) {
        DpGrid g;
        g.n_soc = ns;
        g.n_tb = nt;
        g.n_u = nu;
        g.max_cost_divergence_rel = 1.0;
        g.max_terminal_shortfall_k = 100.0;
        cost.push_back(solve_dp(p, cyc, testing::preset_initial, {0.6, 25.0}, g).cost_wh);
    }
    for (std::size_t i = 2; i < cost.size(); ++i) {
        INFO("levels " << i - 2 << ".." << i << ": " << cost[i - 2] << " " << cost[i - 1] << " " << cost[i]);
        CHECK(std::abs(cost[i] - cost[i - 1]) < std::abs(cost[i - 1] - cost[i - 2]));
    }
}

TEST_CASE("the oracle never loses to the heuristic beyond tolerance") {
    const auto p = default_params();
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> tb0(-15.0, 0.0), tbf(18.0, 30.0), amb(-15.0, 0.0);
    for (int n = 0; n < 4; ++n) {
        const auto seed = 100 + static_cast<std::uint64_t>(n);
        SynthSpec spec;
        spec.seed = seed;
        CycleDefaults d;
        d.t_amb_c = amb(rng);
        const auto cyc = synth_cycle(spec, d);
        const State x0{0.9, tb0(rng)};
        const Targets tg{0.5, tbf(rng)};
        INFO("seed " << seed << " t_amb " << d.t_amb_c << " tb0 " << x0.tb_c << " tb_f " << tg.tb_f_c);
        const auto plan = plan_preheat(p, cyc, x0, tg);
        REQUIRE(plan.feasible);
        const auto dp = solve_dp(p, cyc, x0, tg, DpGrid{});
        const double h = battery_energy_j(plan.trajectory) / seconds_per_hour;
        CHECK(dp.cost_wh <= h + 0.005 * h);
        CHECK(verify_balances(dp.trajectory, p, cyc).passes());
    }
}
