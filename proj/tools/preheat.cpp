#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI/CLI.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "preheat/config.hpp"
#include "preheat/preheat.hpp"
#include "preheat/serialize.hpp"

namespace fs = std::filesystem;
using namespace preheat;

namespace {

enum ExitCode : int { ok = 0, internal = 1, input = 2, infeasible = 3, numerics = 4 };

struct Options {
    std::string config_path;
    std::string cycle_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<double> target_temp;
    std::optional<double> target_soc;
    std::string grid;
    // simulate
    std::string schedule_path;
    std::optional<double> preheat_s;
    // synth-cycle
    std::optional<double> duration_s, dt_s, mean_kw, variability;
};

struct Run {
    Config config;
    DriveCycle cycle{1.0, {CycleSample{}, CycleSample{}}};
    json manifest;
};

std::uint64_t fnv1a(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::uint64_t h = 1469598103934665603ull;
    char c;
    while (in.get(c)) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ull;
    return h;
}

DpGrid parse_grid(const std::string& text, DpGrid g) {
    const auto f = csv::split(text);
    if (f.size() != 3) throw ParseError("--grid expects ns,nt,nu");
    std::size_t v[3];
    for (int i = 0; i < 3; ++i) {
        const double x = csv::parse_number(f[i], 0);
        if (!(x >= 2 && x == static_cast<double>(static_cast<std::size_t>(x))))
            throw ParseError("--grid values must be integers >= 2");
        v[i] = static_cast<std::size_t>(x);
    }
    g.n_soc = v[0];
    g.n_tb = v[1];
    g.n_u = v[2];
    return g;
}

Run prepare(const std::string& command, const Options& o, const std::vector<std::string>& argv, bool need_cycle = true) {
    Run r;
    if (!o.config_path.empty()) r.config = load_config(o.config_path);
    auto& c = r.config;
    if (o.seed) c.synth.seed = *o.seed;
    if (o.target_temp) c.mission.targets.tb_f_c = *o.target_temp;
    if (o.target_soc) c.mission.targets.soc_f = *o.target_soc;
    if (!o.grid.empty()) c.dp = parse_grid(o.grid, c.dp);
    if (o.duration_s) c.synth.duration_s = *o.duration_s;
    if (o.dt_s) c.synth.dt_s = *o.dt_s;
    if (o.mean_kw) c.synth.mean_prop_kw = *o.mean_kw;
    if (o.variability) c.synth.variability = *o.variability;
    try {
        c.dp.validate();
        check_targets(c.vehicle, c.mission.targets);
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }

    json cycle_info;
    if (need_cycle && !o.cycle_path.empty()) {
        r.cycle = load_cycle(o.cycle_path, c.cycle_defaults);
        cycle_info = {{"path", o.cycle_path}, {"fnv1a64", fnv1a(o.cycle_path)}};
    } else {
        try {
            r.cycle = synth_cycle(c.synth, c.cycle_defaults);
        } catch (const DomainError& e) {
            throw ParseError(e.what());
        }
        cycle_info = {{"synth", to_json(c.synth)}};
    }
    try {
        r.cycle.check_against(c.vehicle);
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
    cycle_info["steps"] = r.cycle.steps();
    cycle_info["dt_s"] = r.cycle.dt();

    r.manifest = {{"tool", "preheat"},
                  {"version", preheat::version},
                  {"command", command},
                  {"argv", argv},
                  {"config_path", o.config_path.empty() ? json(nullptr) : json(o.config_path)},
                  {"out_dir", o.out_dir},
                  {"seed", c.synth.seed},
                  {"cycle", cycle_info},
                  {"config", to_json(c)}};
    fs::create_directories(o.out_dir);
    return r;
}

void finish(const Options& o, const Run& r) { write_json(fs::path(o.out_dir) / "manifest.json", r.manifest); }

json energy_block(const Trajectory& t, const Run& r) {
    const auto& p = r.config.vehicle;
    return {{"energy_wh", to_json(energy_report(t, p, r.cycle))}, {"balances", to_json(verify_balances(t, p, r.cycle))}};
}

std::vector<double> read_schedule(const fs::path& path, std::size_t steps) {
    const auto lines = csv::read_lines(path);
    std::size_t first = 0;
    while (first < lines.size() && csv::trim(lines[first]).empty()) ++first;
    if (first == lines.size()) throw ParseError("empty schedule file");
    const auto header = csv::split(lines[first]);
    std::size_t col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == "p_hvch_batt_w") col = i;
    if (col == header.size()) throw ParseError("schedule needs a p_hvch_batt_w column", first + 1);
    std::vector<double> u;
    for (std::size_t ln = first + 1; ln < lines.size(); ++ln) {
        if (csv::trim(lines[ln]).empty()) continue;
        const auto f = csv::split(lines[ln]);
        if (f.size() != header.size()) throw ParseError("field count differs from header", ln + 1);
        u.push_back(csv::parse_number(f[col], ln + 1));
    }
    if (u.size() != steps)
        throw ParseError("schedule has " + std::to_string(u.size()) + " rows, cycle has " + std::to_string(steps) +
                         " steps");
    return u;
}

int cmd_simulate(const Options& o, const std::vector<std::string>& argv) {
    auto r = prepare("simulate", o, argv);
    const auto& p = r.config.vehicle;
    const std::size_t n = r.cycle.steps();
    if (!o.schedule_path.empty() && o.preheat_s) throw ParseError("use either --schedule or --preheat-s");
    std::vector<double> u(n, 0.0);
    if (!o.schedule_path.empty()) {
        u = read_schedule(o.schedule_path, n);
        r.manifest["schedule"] = {{"path", o.schedule_path}, {"fnv1a64", fnv1a(o.schedule_path)}};
    } else if (o.preheat_s) {
        if (!(*o.preheat_s >= 0.0)) throw ParseError("--preheat-s must be >= 0");
        const auto heated = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(*o.preheat_s / r.cycle.dt())));
        u = max_heating_controls(p, r.cycle, n - heated);
        r.manifest["preheat_s"] = *o.preheat_s;
    }
    check_state_in_bounds(p, r.config.mission.initial, "initial state");
    const auto t = simulate(p, r.cycle, r.config.mission.initial, u);
    spdlog::info("simulated {} steps, terminal soc {:.4f}, tb {:.2f} C", n, t.terminal().soc, t.terminal().tb_c);

    const fs::path out(o.out_dir);
    write_text(out / "trajectory.csv", format_trajectory_csv(t));
    json report = energy_block(t, r);
    report["terminal"] = to_json(t.terminal());
    write_json(out / "report.json", report);
    finish(o, r);
    return ok;
}

int cmd_plan(const Options& o, const std::vector<std::string>& argv) {
    auto r = prepare("plan", o, argv);
    const auto& m = r.config.mission;
    const auto plan = plan_preheat(r.config.vehicle, r.cycle, m.initial, m.targets);
    spdlog::info("plan: k*={} preheat {:.0f} s feasible={}", plan.splice_index, plan.switch_time_s, plan.feasible);

    const fs::path out(o.out_dir);
    json j = to_json(plan);
    j["targets"] = to_json(m.targets);
    j["hvch_batt_w"] = plan.trajectory.controls;
    j.update(energy_block(plan.trajectory, r));
    write_json(out / "plan.json", j);
    write_text(out / "trajectory.csv", format_trajectory_csv(plan.trajectory));
    write_text(out / "forward.csv", format_trajectory_csv(plan.forward));
    finish(o, r);
    return ok;
}

int cmd_dp(const Options& o, const std::vector<std::string>& argv) {
    auto r = prepare("dp", o, argv);
    const auto& m = r.config.mission;
    const auto sol = solve_dp(r.config.vehicle, r.cycle, m.initial, m.targets, r.config.dp);
    spdlog::info("dp: cost {:.1f} Wh, switch {}, bang-off {}", sol.cost_wh, sol.switch_index, sol.bang_off);

    const fs::path out(o.out_dir);
    json j = to_json(sol);
    j["grid"] = to_json(r.config.dp);
    j["targets"] = to_json(m.targets);
    j.update(energy_block(sol.trajectory, r));
    write_json(out / "dp.json", j);
    write_text(out / "trajectory.csv", format_trajectory_csv(sol.trajectory));
    finish(o, r);
    return ok;
}

int cmd_compare(const Options& o, const std::vector<std::string>& argv) {
    auto r = prepare("compare", o, argv);
    const auto& m = r.config.mission;
    const auto& p = r.config.vehicle;
    const auto c = compare(p, r.cycle, m.initial, m.targets, r.config.dp);
    spdlog::info("compare: gap {:.3f}%, switch delta {} steps", 100.0 * c.gap.total_gap_rel, c.gap.switch_delta_steps);

    const fs::path out(o.out_dir);
    json gap = to_json(c.gap);
    gap["plan"] = to_json(c.plan);
    gap["dp"] = to_json(c.dp);
    gap["balances"] = {{"heuristic", to_json(verify_balances(c.plan.trajectory, p, r.cycle))},
                       {"oracle", to_json(verify_balances(c.dp.trajectory, p, r.cycle))}};
    write_json(out / "gap.json", gap);
    write_text(out / "comparison.csv", format_comparison_csv(c.plan.trajectory, c.dp.trajectory));
    write_text(out / "heuristic.csv", format_trajectory_csv(c.plan.trajectory));
    write_text(out / "oracle.csv", format_trajectory_csv(c.dp.trajectory));
    write_text(out / "energy_table.txt",
               format_energy_table({{"Heuristic", c.gap.heuristic}, {"DP", c.gap.oracle}, {"Delta", c.gap.delta}}));
    finish(o, r);
    return ok;
}

int cmd_synth(const Options& o, const std::vector<std::string>& argv) {
    auto r = prepare("synth-cycle", o, argv, false);
    write_text(fs::path(o.out_dir) / "cycle.csv", format_cycle(r.cycle));
    finish(o, r);
    return ok;
}

int report_error(const Options& o, int code, const std::string& kind, const std::string& message, json extra = {}) {
    json e = {{"error", kind}, {"message", message}, {"exit_code", code}};
    if (!extra.is_null()) e.update(extra);
    std::cerr << e.dump() << '\n';
    std::error_code ec;
    fs::create_directories(o.out_dir, ec);
    if (!ec) {
        std::ofstream out(fs::path(o.out_dir) / "error.json", std::ios::binary);
        out << e.dump(2) << '\n';
    }
    return code;
}

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("preheat");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    const char* env = std::getenv("PREHEAT_LOG");
    spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

} // namespace

int main(int argc, char** argv) {
    setup_logging();
    const std::vector<std::string> args(argv + 1, argv + argc);
    CLI::App app{"Battery preheat planning before a fast-charging stop"};
    app.require_subcommand(1);
    app.set_version_flag("--version", preheat::version);
    Options o;

    auto common = [&](CLI::App* sub, bool solver) {
        sub->add_option("--config", o.config_path, "TOML configuration file")->check(CLI::ExistingFile);
        sub->add_option("--out", o.out_dir, "output directory")->capture_default_str();
        sub->add_option("--seed", o.seed, "seed for the synthetic cycle");
        if (!solver) return;
        sub->add_option("--cycle", o.cycle_path, "drive cycle CSV (synthetic cycle when omitted)");
        sub->add_option("--target-temp", o.target_temp, "terminal battery temperature target [C]");
        sub->add_option("--target-soc", o.target_soc, "terminal soc target");
        sub->add_option("--grid", o.grid, "DP grid as ns,nt,nu");
    };

    auto* sim = app.add_subcommand("simulate", "forward rollout under a fixed heating schedule");
    common(sim, true);
    sim->add_option("--schedule", o.schedule_path, "CSV with a p_hvch_batt_w column, one row per step");
    sim->add_option("--preheat-s", o.preheat_s, "heat at maximum for this many seconds before arrival");
    auto* plan = app.add_subcommand("plan", "forward/backward sweep preheat plan");
    common(plan, true);
    auto* dp = app.add_subcommand("dp", "dynamic-programming optimal baseline");
    common(dp, true);
    auto* cmp = app.add_subcommand("compare", "plan versus DP gap report");
    common(cmp, true);
    auto* syn = app.add_subcommand("synth-cycle", "write a seeded synthetic drive cycle");
    common(syn, false);
    syn->add_option("--duration", o.duration_s, "duration [s]");
    syn->add_option("--dt", o.dt_s, "sample interval [s]");
    syn->add_option("--mean-kw", o.mean_kw, "mean propulsion power [kW]");
    syn->add_option("--variability", o.variability, "fluctuation level in [0, 1]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error(o, input, "usage", e.what());
    }

    try {
        if (*sim) return cmd_simulate(o, args);
        if (*plan) return cmd_plan(o, args);
        if (*dp) return cmd_dp(o, args);
        if (*cmp) return cmd_compare(o, args);
        return cmd_synth(o, args);
    } catch (const ParseError& e) {
        return report_error(o, input, "parse", e.what(), e.line() ? json{{"line", e.line()}} : json{});
    } catch (const DomainError& e) {
        return report_error(o, input, "domain", e.what());
    } catch (const PowerInfeasible& e) {
        return report_error(o, infeasible, "power_infeasible", e.what(),
                            e.step() ? json{{"step", *e.step()}} : json{});
    } catch (const InfeasibleProblem& e) {
        return report_error(o, infeasible, "infeasible_problem", e.what());
    } catch (const GridTooCoarse& e) {
        return report_error(o, numerics, "grid_too_coarse", e.what());
    } catch (const IntegrityError& e) {
        return report_error(o, numerics, "integrity", e.what());
    } catch (const std::exception& e) {
        return report_error(o, internal, "internal", e.what());
    }
}
