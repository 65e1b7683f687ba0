#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "preheat/cycle.hpp"
#include "preheat/model.hpp"
#include "preheat/trajectory.hpp"

namespace preheat {

/// Integrated energy flows of one trajectory, in watt-hours. Accumulated in
/// joules; the conversion is the only scaling applied.
struct EnergyReport {
    double joule_heating_wh = 0.0;
    double ed_heating_wh = 0.0;
    double hvch_battery_heating_wh = 0.0;   // electrical HVCH power routed to the battery
    double ambient_leakage_wh = 0.0;        // signed, negative when the pack is above ambient
    double hvch_cabin_wh = 0.0;
    double aux_wh = 0.0;
    double prop_wh = 0.0;
    double total_battery_wh = 0.0;

    EnergyReport& operator+=(const EnergyReport& o) {
        joule_heating_wh += o.joule_heating_wh;
        ed_heating_wh += o.ed_heating_wh;
        hvch_battery_heating_wh += o.hvch_battery_heating_wh;
        ambient_leakage_wh += o.ambient_leakage_wh;
        hvch_cabin_wh += o.hvch_cabin_wh;
        aux_wh += o.aux_wh;
        prop_wh += o.prop_wh;
        total_battery_wh += o.total_battery_wh;
        return *this;
    }
    friend EnergyReport operator+(EnergyReport a, const EnergyReport& b) { return a += b; }
    friend EnergyReport operator-(EnergyReport a, const EnergyReport& b) {
        a.joule_heating_wh -= b.joule_heating_wh;
        a.ed_heating_wh -= b.ed_heating_wh;
        a.hvch_battery_heating_wh -= b.hvch_battery_heating_wh;
        a.ambient_leakage_wh -= b.ambient_leakage_wh;
        a.hvch_cabin_wh -= b.hvch_cabin_wh;
        a.aux_wh -= b.aux_wh;
        a.prop_wh -= b.prop_wh;
        a.total_battery_wh -= b.total_battery_wh;
        return a;
    }
};

inline EnergyReport energy_report(const Trajectory& t, const VehicleParams& p, const DriveCycle& cycle) {
    check_integrity(t, cycle);
    double joule = 0, ed = 0, hvch = 0, leak = 0, cabin = 0, aux = 0, prop = 0, total = 0;
    for (std::size_t i = 0; i < t.steps(); ++i) {
        const auto& c = cycle[t.first_step + i];
        const auto& b = t.breakdowns[i];
        joule += b.q_joule_w;
        ed += ed_heat(p, c.p_prop_w);
        hvch += t.controls[i];
        leak += b.q_leak_w;
        cabin += c.p_hvch_cabin_w;
        aux += c.p_aux_w;
        prop += c.p_prop_w;
        total += b.p_battery_w;
    }
    const double to_wh = t.dt / seconds_per_hour;
    return {joule * to_wh, ed * to_wh, hvch * to_wh, leak * to_wh, cabin * to_wh, aux * to_wh, prop * to_wh,
            total * to_wh};
}

struct BalanceReport {
    double electrical_residual_rel = 0.0;   // Σ|P_b - (Q_joule + P_hvch^b + P_hvch^c + P_aux + P_prop)| / Σ|P_b|
    double thermal_residual_rel = 0.0;      // Σ|r_k| / Σ(scale_k), r_k the per-step heat-balance residual
    double thermal_max_step_residual_j = 0.0;
    std::size_t thermal_worst_step = 0;

    bool passes(double tol = 1e-9) const {
        return electrical_residual_rel <= tol && thermal_residual_rel <= tol;
    }
};

/// Re-derives every heat term from the stored states and controls and checks
/// the per-step electrical and thermal balances. Backward trajectories are
/// evaluated at the later state of each step.
inline BalanceReport verify_balances(const Trajectory& t, const VehicleParams& p, const DriveCycle& cycle) {
    check_integrity(t, cycle);
    BalanceReport r;
    double e_res = 0.0, e_scale = 0.0, th_res = 0.0, th_scale = 0.0;
    const bool at_later = t.origin == Origin::backward;
    for (std::size_t i = 0; i < t.steps(); ++i) {
        const auto& c = cycle[t.first_step + i];
        const auto& b = t.breakdowns[i];
        const double u = t.controls[i];

        const double demand = b.q_joule_w + u + c.p_hvch_cabin_w + c.p_aux_w + c.p_prop_w;
        e_res += std::abs(b.p_battery_w - demand);
        e_scale += std::abs(b.p_battery_w);

        const State& at = at_later ? t.states[i + 1] : t.states[i];
        double residual = std::numeric_limits<double>::infinity();
        double scale = 0.0;
        try {
            const double pt = c.p_aux_w + c.p_hvch_cabin_w + u + c.p_prop_w;
            const double current = battery_current(p, at, pt);
            const double q_joule = joule_heat(p, at, current);
            const double q_ed = ed_heat(p, c.p_prop_w);
            const double q_leak = c.gamma_w_per_k * (c.t_amb_c - at.tb_c);
            const double q_hvch = p.eta_hvch * u;
            const double stored = p.thermal_capacitance * (t.states[i + 1].tb_c - t.states[i].tb_c);
            const double supplied = t.dt * (q_hvch + q_leak + q_joule + q_ed);
            residual = std::abs(stored - supplied);
            scale = std::abs(stored) + t.dt * (std::abs(q_hvch) + std::abs(q_leak) + q_joule + q_ed);
        } catch (const std::exception&) {
        }
        th_res += residual;
        th_scale += scale;
        if (residual > r.thermal_max_step_residual_j) {
            r.thermal_max_step_residual_j = residual;
            r.thermal_worst_step = t.first_step + i;
        }
    }
    r.electrical_residual_rel = e_scale > 0.0 ? e_res / e_scale : e_res;
    r.thermal_residual_rel = th_scale > 0.0 ? th_res / th_scale : th_res;
    return r;
}

namespace detail {
struct ReportRow {
    const char* name;
    const char* key;
    double EnergyReport::*field;
};
inline const std::vector<ReportRow>& report_rows() {
    static const std::vector<ReportRow> rows{
        {"Joule heating", "joule_heating_wh", &EnergyReport::joule_heating_wh},
        {"ED heating", "ed_heating_wh", &EnergyReport::ed_heating_wh},
        {"HVCH bat. heating", "hvch_battery_heating_wh", &EnergyReport::hvch_battery_heating_wh},
        {"Ambient leakage", "ambient_leakage_wh", &EnergyReport::ambient_leakage_wh},
        {"HVCH cabin heating", "hvch_cabin_wh", &EnergyReport::hvch_cabin_wh},
        {"Auxiliary load", "aux_wh", &EnergyReport::aux_wh},
        {"Propulsion", "prop_wh", &EnergyReport::prop_wh},
        {"Total bat. eng.", "total_battery_wh", &EnergyReport::total_battery_wh},
    };
    return rows;
}
} // namespace detail

/// Aligned text table, one column per labelled report, values in Wh.
inline std::string format_energy_table(const std::vector<std::pair<std::string, EnergyReport>>& columns) {
    std::string out;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-20s", "Eng. component [Wh]");
    out += buf;
    for (const auto& [label, _] : columns) {
        std::snprintf(buf, sizeof buf, " %14s", label.c_str());
        out += buf;
    }
    out += '\n';
    for (const auto& row : detail::report_rows()) {
        std::snprintf(buf, sizeof buf, "%-20s", row.name);
        out += buf;
        for (const auto& [_, rep] : columns) {
            std::snprintf(buf, sizeof buf, " %14.1f", rep.*row.field);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

} // namespace preheat
