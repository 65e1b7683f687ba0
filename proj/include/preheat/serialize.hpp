#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "preheat/accounting.hpp"
#include "preheat/config.hpp"
#include "preheat/cycle_io.hpp"
#include "preheat/heuristic.hpp"
#include "preheat/oracle.hpp"
#include "preheat/trajectory.hpp"

namespace preheat {

using json = nlohmann::ordered_json;

inline json to_json(const EnergyReport& r) {
    json j;
    for (const auto& row : detail::report_rows()) j[row.key] = r.*row.field;
    return j;
}

inline json to_json(const BalanceReport& b) {
    return {{"electrical_residual_rel", b.electrical_residual_rel},
            {"thermal_residual_rel", b.thermal_residual_rel},
            {"thermal_max_step_residual_j", b.thermal_max_step_residual_j},
            {"thermal_worst_step", b.thermal_worst_step},
            {"passes", b.passes()}};
}

inline json to_json(const State& s) { return {{"soc", s.soc}, {"tb_c", s.tb_c}}; }

inline json to_json(const Targets& t) { return {{"soc_f", t.soc_f}, {"tb_f_c", t.tb_f_c}}; }

inline json to_json(const PreheatPlan& p) {
    const auto& d = p.diagnostics;
    return {{"splice_index", p.splice_index},
            {"switch_time_s", p.switch_time_s},
            {"feasible", p.feasible},
            {"diagnostics",
             {{"crossing_found", d.crossing_found},
              {"crossing_margin_k", d.crossing_margin_k},
              {"monotone_crossing", d.monotone_crossing},
              {"limit_violations", d.limit_violations},
              {"terminal_soc", d.terminal_soc},
              {"terminal_tb_c", d.terminal_tb_c},
              {"terminal_soc_met", d.terminal_soc_met},
              {"within_bounds", d.within_bounds}}}};
}

inline json to_json(const DpGrid& g) {
    return {{"n_soc", g.n_soc},
            {"n_tb", g.n_tb},
            {"n_u", g.n_u},
            {"terminal_cell_tolerance", g.terminal_cell_tolerance},
            {"max_cost_divergence_rel", g.max_cost_divergence_rel},
            {"max_terminal_shortfall_k", g.max_terminal_shortfall_k}};
}

inline json to_json(const DpSolution& s) {
    return {{"cost_wh", s.cost_wh},
            {"predicted_cost_wh", s.predicted_cost_wh},
            {"switch_index", s.switch_index},
            {"switch_fraction", s.switch_fraction},
            {"bang_off", s.bang_off},
            {"bellman_max_residual_wh", s.bellman_max_residual_wh},
            {"terminal", to_json(s.trajectory.terminal())}};
}

inline json to_json(const GapReport& g) {
    return {{"heuristic", to_json(g.heuristic)},
            {"oracle", to_json(g.oracle)},
            {"delta", to_json(g.delta)},
            {"total_gap_rel", g.total_gap_rel},
            {"heuristic_switch_index", g.heuristic_switch_index},
            {"oracle_switch_index", g.oracle_switch_index},
            {"switch_delta_steps", g.switch_delta_steps},
            {"switch_delta_s", g.switch_delta_s},
            {"max_tb_deviation_k", g.max_tb_deviation_k}};
}

inline json to_json(const SynthSpec& s) {
    return {{"duration_s", s.duration_s},
            {"dt_s", s.dt_s},
            {"mean_prop_kw", s.mean_prop_kw},
            {"variability", s.variability},
            {"seed", s.seed}};
}

inline json to_json(const Grid2D& g) {
    json rows = json::array();
    for (std::size_t j = 0; j < g.tb_knots().size(); ++j) {
        json row = json::array();
        for (std::size_t i = 0; i < g.soc_knots().size(); ++i) row.push_back(g.at(j, i));
        rows.push_back(row);
    }
    return {{"soc_knots", g.soc_knots()}, {"tb_knots", g.tb_knots()}, {"values_w", rows}};
}

/// The fully resolved configuration, defaults included.
inline json to_json(const Config& c) {
    const auto& p = c.vehicle;
    return {{"vehicle",
             {{"capacity_ah", p.capacity_ah},
              {"r_ref_ohm", p.r_ref_ohm},
              {"t_ref_k", p.t_ref_k},
              {"thermal_capacitance_j_per_k", p.thermal_capacitance},
              {"eta_hvch", p.eta_hvch},
              {"eta_ed_e", p.eta_ed_e},
              {"eta_ed_q", p.eta_ed_q},
              {"p_hvch_max_w", p.p_hvch_max_w},
              {"soc_min", p.soc_min},
              {"soc_max", p.soc_max},
              {"tb_min_c", p.tb_min_c},
              {"tb_max_c", p.tb_max_c},
              {"uoc_soc", p.uoc_table.knots()},
              {"uoc_v", p.uoc_table.values()}}},
            {"limits", {{"discharge", to_json(p.dchg_limit_w)}, {"charge", to_json(p.chg_limit_w)}}},
            {"dp", to_json(c.dp)},
            {"cycle-defaults",
             {{"p_aux_w", c.cycle_defaults.p_aux_w},
              {"p_hvch_cabin_w", c.cycle_defaults.p_hvch_cabin_w},
              {"t_amb_c", c.cycle_defaults.t_amb_c},
              {"gamma_w_per_k", c.cycle_defaults.gamma_w_per_k}}},
            {"mission", {{"initial", to_json(c.mission.initial)}, {"targets", to_json(c.mission.targets)}}},
            {"synth", to_json(c.synth)}};
}

inline constexpr std::string_view trajectory_csv_header =
    "step,time_s,soc,tb_c,p_hvch_batt_w,p_terminal_w,p_battery_w,current_a,q_joule_w,q_ed_w,q_leak_w,q_hvch_w,"
    "p_chg_min_w,p_dchg_max_w,limit_violation";

/// One row per state. Step quantities sit on the row of the state the step
/// leaves; the final row leaves them empty.
inline std::string format_trajectory_csv(const Trajectory& t) {
    using csv::format_number;
    std::string out(trajectory_csv_header);
    out += '\n';
    for (std::size_t i = 0; i < t.states.size(); ++i) {
        const std::size_t k = t.first_step + i;
        out += std::to_string(k) + ',' + format_number(static_cast<double>(k) * t.dt) + ',' +
               format_number(t.states[i].soc) + ',' + format_number(t.states[i].tb_c);
        if (i < t.steps()) {
            const auto& b = t.breakdowns[i];
            for (double v : {t.controls[i], b.p_terminal_w, b.p_battery_w, b.current_a, b.q_joule_w, b.q_ed_w,
                             b.q_leak_w, b.q_hvch_w, b.limits.chg_min_w, b.limits.dchg_max_w})
                out += ',' + format_number(v);
            out += b.limit_violation ? ",1" : ",0";
        } else {
            out += ",,,,,,,,,,,";
        }
        out += '\n';
    }
    return out;
}

inline constexpr std::string_view comparison_csv_header =
    "step,time_s,tb_heuristic_c,tb_oracle_c,soc_heuristic,soc_oracle,p_hvch_batt_heuristic_w,p_hvch_batt_oracle_w,"
    "q_joule_heuristic_w,q_joule_oracle_w,q_ed_w,q_leak_heuristic_w,q_leak_oracle_w,energy_heuristic_wh,"
    "energy_oracle_wh";

/// Side-by-side per-state rows for two trajectories over the same steps;
/// energies are cumulative battery energy up to the row's state.
inline std::string format_comparison_csv(const Trajectory& h, const Trajectory& o) {
    if (h.states.size() != o.states.size() || h.first_step != o.first_step || h.dt != o.dt)
        throw IntegrityError("comparison: trajectories cover different steps");
    using csv::format_number;
    std::string out(comparison_csv_header);
    out += '\n';
    double eh = 0.0, eo = 0.0;
    for (std::size_t i = 0; i < h.states.size(); ++i) {
        const std::size_t k = h.first_step + i;
        out += std::to_string(k) + ',' + format_number(static_cast<double>(k) * h.dt);
        for (double v : {h.states[i].tb_c, o.states[i].tb_c, h.states[i].soc, o.states[i].soc}) out += ',' + format_number(v);
        if (i < h.steps()) {
            const auto& bh = h.breakdowns[i];
            const auto& bo = o.breakdowns[i];
            for (double v : {h.controls[i], o.controls[i], bh.q_joule_w, bo.q_joule_w, bh.q_ed_w, bh.q_leak_w, bo.q_leak_w})
                out += ',' + format_number(v);
        } else {
            out += ",,,,,,,";
        }
        out += ',' + format_number(eh / seconds_per_hour) + ',' + format_number(eo / seconds_per_hour) + '\n';
        if (i < h.steps()) {
            eh += h.breakdowns[i].p_battery_w * h.dt;
            eo += o.breakdowns[i].p_battery_w * o.dt;
        }
    }
    return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw ParseError("write failed for '" + path.string() + "'");
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + '\n'); }

} // namespace preheat
