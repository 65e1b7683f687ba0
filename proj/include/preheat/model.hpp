#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "preheat/cycle.hpp"
#include "preheat/errors.hpp"
#include "preheat/params.hpp"

namespace preheat {

struct State {
    double soc = 0.0;
    double tb_c = 0.0;

    bool operator==(const State&) const = default;
};

/// Control for one step: HVCH power routed to the battery loop, applied at
/// cycle sample `k`.
struct StepInputs {
    double p_hvch_batt_w = 0.0;
    std::size_t k = 0;
};

struct PowerLimits {
    double chg_min_w = 0.0;   // <= 0
    double dchg_max_w = 0.0;  // >= 0
};

/// Per-step power flows. `p_battery_w == p_terminal_w + q_joule_w` exactly.
struct PowerBreakdown {
    double p_terminal_w = 0.0;
    double p_battery_w = 0.0;
    double current_a = 0.0;
    double q_joule_w = 0.0;
    double q_ed_w = 0.0;
    double q_leak_w = 0.0;   // positive = heat into the battery
    double q_hvch_w = 0.0;   // thermal power delivered by the HVCH
    PowerLimits limits;
    bool limit_violation = false;
};

struct StepResult {
    State state;
    PowerBreakdown breakdown;
};

inline double open_circuit_voltage(const VehicleParams& p, double soc) {
    if (!(soc >= 0.0 && soc <= 1.0)) throw DomainError("open_circuit_voltage: soc outside [0, 1]");
    return p.uoc_table(soc);
}

inline double internal_resistance(const VehicleParams& p, double tb_c) {
    const double t_k = tb_c + kelvin_offset;
    if (!(t_k > 0.0)) throw DomainError("internal_resistance: non-positive absolute temperature");
    return p.r_ref_ohm * p.t_ref_k / t_k;
}

/// Smaller root of R I^2 - U I + P = 0. Written as 2P / (U + sqrt(disc)), the
/// same root without cancellation when P is small.
inline double battery_current(double uoc_v, double r_ohm, double p_terminal_w) {
    const double disc = uoc_v * uoc_v - 4.0 * r_ohm * p_terminal_w;
    if (!(disc >= 0.0))
        throw PowerInfeasible("terminal power " + std::to_string(p_terminal_w) + " W exceeds deliverable maximum " +
                              std::to_string(uoc_v * uoc_v / (4.0 * r_ohm)) + " W");
    return 2.0 * p_terminal_w / (uoc_v + std::sqrt(disc));
}

inline double battery_current(const VehicleParams& p, const State& s, double p_terminal_w) {
    return battery_current(open_circuit_voltage(p, s.soc), internal_resistance(p, s.tb_c), p_terminal_w);
}

inline double joule_heat(const VehicleParams& p, const State& s, double current_a) {
    return internal_resistance(p, s.tb_c) * current_a * current_a;
}

/// Drivetrain losses returned to the battery loop; regeneration produces none.
inline double ed_heat(const VehicleParams& p, double p_prop_w) {
    return p.eta_ed_q * (1.0 - p.eta_ed_e) * std::max(p_prop_w, 0.0);
}

inline PowerLimits power_limits(const VehicleParams& p, const State& s) {
    return {std::min(p.chg_limit_w(s.soc, s.tb_c), 0.0), std::max(p.dchg_limit_w(s.soc, s.tb_c), 0.0)};
}

/// Largest HVCH power the battery may receive at sample k.
inline double available_hvch(const VehicleParams& p, const CycleSample& c) {
    return std::max(p.p_hvch_max_w - c.p_hvch_cabin_w, 0.0);
}

namespace detail {

inline void check_inputs(const VehicleParams& p, const StepInputs& in, const DriveCycle& cycle) {
    if (in.k >= cycle.steps()) throw DomainError("step index " + std::to_string(in.k) + " beyond cycle");
    const auto& c = cycle[in.k];
    constexpr double slack = 1e-9;
    if (!(in.p_hvch_batt_w >= 0.0) || in.p_hvch_batt_w + c.p_hvch_cabin_w > p.p_hvch_max_w * (1.0 + slack))
        throw DomainError("HVCH battery power outside [0, p_hvch_max - p_hvch_cabin] at step " + std::to_string(in.k));
}

// Every power and heat term evaluated at `at`.
inline PowerBreakdown evaluate(const VehicleParams& p, const State& at, const StepInputs& in, const CycleSample& c) {
    PowerBreakdown b;
    b.p_terminal_w = c.p_aux_w + c.p_hvch_cabin_w + in.p_hvch_batt_w + c.p_prop_w;
    const double r = internal_resistance(p, at.tb_c);
    b.current_a = battery_current(open_circuit_voltage(p, at.soc), r, b.p_terminal_w);
    b.q_joule_w = r * b.current_a * b.current_a;
    b.p_battery_w = b.p_terminal_w + b.q_joule_w;
    b.q_ed_w = ed_heat(p, c.p_prop_w);
    b.q_leak_w = c.gamma_w_per_k * (c.t_amb_c - at.tb_c);
    b.q_hvch_w = p.eta_hvch * in.p_hvch_batt_w;
    b.limits = power_limits(p, at);
    b.limit_violation = b.p_battery_w < b.limits.chg_min_w || b.p_battery_w > b.limits.dchg_max_w;
    return b;
}

inline double net_heat(const PowerBreakdown& b) { return b.q_hvch_w + b.q_leak_w + b.q_joule_w + b.q_ed_w; }

} // namespace detail

/// One explicit Euler step from state k to k+1.
inline StepResult step_forward(const VehicleParams& p, const State& s, const StepInputs& in, const DriveCycle& cycle) {
    detail::check_inputs(p, in, cycle);
    const double dt = cycle.dt();
    StepResult r;
    r.breakdown = detail::evaluate(p, s, in, cycle[in.k]);
    r.state.soc = s.soc - dt * r.breakdown.current_a / p.capacity_as();
    r.state.tb_c = s.tb_c + dt / p.thermal_capacitance * detail::net_heat(r.breakdown);
    return r;
}

/// Reverse-time step from state k+1 to k, with current and heat terms taken at
/// the k+1 state. Inverts `step_forward` up to O(dt^2).
inline StepResult step_backward(const VehicleParams& p, const State& s_next, const StepInputs& in,
                                const DriveCycle& cycle) {
    detail::check_inputs(p, in, cycle);
    const double dt = cycle.dt();
    StepResult r;
    r.breakdown = detail::evaluate(p, s_next, in, cycle[in.k]);
    r.state.soc = s_next.soc + dt * r.breakdown.current_a / p.capacity_as();
    r.state.tb_c = s_next.tb_c - dt / p.thermal_capacitance * detail::net_heat(r.breakdown);
    return r;
}

} // namespace preheat
