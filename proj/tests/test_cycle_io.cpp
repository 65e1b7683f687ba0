#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "preheat/cycle_io.hpp"
#include "preheat/heuristic.hpp"
#include "support.hpp"

using namespace preheat;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i)
        if (i == text.size() || text[i] == '\n') {
            lines.emplace_back(text.substr(start, i - start));
            start = i + 1;
        }
    return lines;
}

std::size_t parse_error_line(const std::string& text) {
    try {
        parse_cycle(lines_of(text));
    } catch (const ParseError& e) {
        return e.line();
    }
    return static_cast<std::size_t>(-1);
}

} // namespace

TEST_CASE("minimal two-row file is a one-step cycle") {
    testing::TempDir dir;
    const auto path = dir.write("c.csv", "time_s,p_prop_w\n0,1000\n30,2000\n");
    const auto c = load_cycle(path);
    CHECK(c.steps() == 1);
    CHECK(c.dt() == 30.0);
    CHECK(c[0].p_prop_w == 1000.0);
    CHECK(c[1].p_prop_w == 2000.0);
}

TEST_CASE("omitted columns take the configured defaults") {
    const std::vector<std::string> lines{"time_s,speed_mps,p_prop_w", "0,3,1000", "10,4,-500", "20,5,0"};
    const auto c = parse_cycle(lines);
    CHECK(c.dt() == 10.0);
    for (const auto& s : c.samples()) {
        CHECK(s.p_aux_w == 500.0);
        CHECK(s.p_hvch_cabin_w == 1978.0);
        CHECK(s.t_amb_c == -7.0);
        CHECK(s.gamma_w_per_k == 35.0);
    }
    CHECK(c[1].speed_mps == 4.0);

    CycleDefaults d;
    d.p_aux_w = 800.0;
    d.t_amb_c = 5.0;
    const auto c2 = parse_cycle({"time_s,p_prop_w,p_aux_w", "0,0,100", "1,0,200"}, d);
    CHECK(c2[0].p_aux_w == 100.0);
    CHECK(c2[0].t_amb_c == 5.0);
    CHECK(c2[0].speed_mps == 0.0);
}

TEST_CASE("validation errors carry line numbers") {
    CHECK(parse_error_line("time_s,p_prop_w\n0,1\n30,1\n20,1\n") == 4);
    CHECK(parse_error_line("time_s,p_prop_w\n0,1\n30,1\n30,1\n") == 4);
    CHECK(parse_error_line("time_s,p_prop_w\n0,1\n30,1\n61,1\n") == 4);
    CHECK(parse_error_line("time_s,p_prop_w\n0,1\n30,nan\n") == 3);
    CHECK(parse_error_line("time_s,p_prop_w\n0,1\n30,inf\n") == 3);
    CHECK(parse_error_line("time_s,p_prop_w\n0,1\n30,12kW\n") == 3);
    CHECK(parse_error_line("time_s,p_prop_w\n0,1\n30,1,2\n") == 3);
    CHECK(parse_error_line("time_s,speed_mps\n0,1\n30,1\n") == 1);
    CHECK(parse_error_line("time_s,p_prop_w,time_s\n0,1,0\n") == 1);
    CHECK(parse_error_line("\n\ntime_s,p_prop_w\n0,1\n\n30,1\n45,1\n") == 7);
}

TEST_CASE("other malformed files") {
    CHECK_THROWS_AS(parse_cycle(std::vector<std::string>{}), ParseError);
    CHECK_THROWS_AS(parse_cycle({"time_s,p_prop_w", "0,1"}), ParseError);
    CHECK_THROWS_AS(parse_cycle({"time_s,p_prop_w,p_aux_w", "0,1,-5", "1,1,0"}), ParseError);
    CHECK_THROWS_AS(load_cycle("/nonexistent/cycle.csv"), ParseError);
    try {
        load_cycle("/nonexistent/cycle.csv");
    } catch (const ParseError& e) {
        CHECK_THAT(e.what(), ContainsSubstring("/nonexistent/cycle.csv"));
    }
}

TEST_CASE("tolerated formatting") {
    testing::TempDir dir;
    const auto c = load_cycle(dir.write("c.csv", "\xEF\xBB\xBFtime_s, p_prop_w\r\n0, +1e3\r\n0.5,2000\r\n\n1.0,3000"));
    CHECK(c.steps() == 2);
    CHECK(c.dt() == 0.5);
    CHECK(c[0].p_prop_w == 1000.0);
}

TEST_CASE("save then load round-trips bit-identically") {
    testing::TempDir dir;
    const auto synth = testing::preset_cycle(4);
    save_cycle(synth, dir.path() / "s.csv");
    CHECK(load_cycle(dir.path() / "s.csv") == synth);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<CycleSample> samples;
    for (int i = 0; i < 50; ++i)
        samples.push_back({std::abs(u(rng)) * 40.0, u(rng) * 1e5 / 3.0, std::abs(u(rng)) * 1e3, 1e-300,
                           u(rng) * 30.0, std::abs(u(rng)) * 50.0});
    const DriveCycle odd(0.1, samples);
    save_cycle(odd, dir.path() / "o.csv");
    const auto back = load_cycle(dir.path() / "o.csv");
    REQUIRE(back.steps() == odd.steps());
    CHECK(back.samples() == odd.samples());
    CHECK_THAT(back.dt(), WithinAbs(0.1, 1e-15));
}

TEST_CASE("synthetic cycles") {
    SynthSpec spec;
    const auto a = synth_cycle(spec);
    CHECK(a == synth_cycle(spec));
    CHECK(a.steps() == 120);
    CHECK(a.dt() == 30.0);

    spec.seed = 2;
    CHECK_FALSE(a == synth_cycle(spec));

    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        spec.seed = seed;
        const auto c = synth_cycle(spec);
        double mean = 0.0;
        bool regen = false;
        for (std::size_t k = 0; k < c.steps(); ++k) {
            mean += c[k].p_prop_w;
            regen = regen || c[k].p_prop_w < 0.0;
        }
        mean /= static_cast<double>(c.steps());
        INFO("seed " << seed);
        CHECK_THAT(mean, WithinRel(spec.mean_prop_kw * 1e3, 0.02));
        CHECK(regen);
        CHECK(parse_cycle(lines_of(format_cycle(c))) == c);
    }

    SECTION("default loads are stamped on every sample") {
        CycleDefaults d;
        d.gamma_w_per_k = 12.0;
        const auto c = synth_cycle(SynthSpec{}, d);
        for (const auto& s : c.samples()) {
            CHECK(s.gamma_w_per_k == 12.0);
            CHECK(s.p_aux_w == 500.0);
        }
    }
    SECTION("invalid specs") {
        SynthSpec bad;
        bad.duration_s = 100.0;
        CHECK_THROWS_AS(synth_cycle(bad), DomainError);
        bad = {};
        bad.dt_s = 0.0;
        CHECK_THROWS_AS(synth_cycle(bad), DomainError);
        bad = {};
        bad.mean_prop_kw = -1.0;
        CHECK_THROWS_AS(synth_cycle(bad), DomainError);
        bad = {};
        bad.variability = 1.5;
        CHECK_THROWS_AS(synth_cycle(bad), DomainError);
    }
}

TEST_CASE("a 20 kW mean hour draws about 24 kWh with preheating") {
    SynthSpec spec;
    spec.mean_prop_kw = 20.0;
    const auto cyc = synth_cycle(spec);
    const auto plan = plan_preheat(default_params(), cyc, testing::preset_initial, {0.6, 25.0});
    const double kwh = battery_energy_j(plan.trajectory) / 3.6e6;
    CHECK_THAT(kwh, WithinRel(24.0, 0.05));
}

TEST_CASE("limit grid files") {
    testing::TempDir dir;
    const auto g = defaults::dchg_limit();
    const auto path = dir.write("g.csv", format_grid_csv(g));
    const auto back = load_grid_csv(path);
    CHECK(back.soc_knots() == g.soc_knots());
    CHECK(back.tb_knots() == g.tb_knots());
    CHECK(back(0.5, 3.0) == g(0.5, 3.0));

    CHECK_THROWS_AS(load_grid_csv(dir.write("bad.csv", "x,0,1\n0,1\n")), ParseError);
    CHECK_THROWS_AS(load_grid_csv(dir.write("bad2.csv", "x,0,1\n0,1,2\n0,3,4\n")), ParseError);
    try {
        load_grid_csv(dir.write("bad3.csv", "x,0,1\n0,1,2\n5,3,oops\n"));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}
