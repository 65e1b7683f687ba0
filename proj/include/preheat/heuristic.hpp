#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <vector>

#include "preheat/cycle.hpp"
#include "preheat/errors.hpp"
#include "preheat/model.hpp"
#include "preheat/trajectory.hpp"

namespace preheat {

/// Terminal requirements: tb(t_f) >= tb_f_c, soc(t_f) >= soc_f.
struct Targets {
    double soc_f = 0.60;
    double tb_f_c = 25.0;
};

/// A re-simulated plan counts as meeting the temperature target this close.
inline constexpr double terminal_temperature_tolerance_k = 0.5;

inline void check_state_in_bounds(const VehicleParams& p, const State& s, const char* what) {
    if (!(s.soc >= p.soc_min && s.soc <= p.soc_max && s.tb_c >= p.tb_min_c && s.tb_c <= p.tb_max_c))
        throw DomainError(std::string(what) + " outside soc/temperature bounds");
}

inline void check_targets(const VehicleParams& p, const Targets& t) {
    check_state_in_bounds(p, {t.soc_f, t.tb_f_c}, "targets");
}

/// HVCH at its available maximum on every step from `from` to the end.
inline std::vector<double> max_heating_controls(const VehicleParams& p, const DriveCycle& cycle, std::size_t from = 0) {
    std::vector<double> u(cycle.steps(), 0.0);
    for (std::size_t k = from; k < u.size(); ++k) u[k] = available_hvch(p, cycle[k]);
    return u;
}

/// Whole-cycle rollout with the battery heater off.
inline Trajectory forward_rollout(const VehicleParams& p, const DriveCycle& cycle, const State& initial) {
    check_state_in_bounds(p, initial, "initial state");
    const std::vector<double> off(cycle.steps(), 0.0);
    return simulate(p, cycle, initial, off, 0, Origin::forward);
}

struct BackwardSweep {
    Trajectory trajectory;            // steps [crossing_index, N), forward time order
    std::size_t crossing_index = 0;   // first k (scanning down from N) with tb_bk(k) <= tb_fw(k)
    double crossing_margin_k = 0.0;   // tb_fw(k*) - tb_bk(k*), >= 0
    bool monotone = true;             // tb_bk - tb_fw non-decreasing in k over the sweep
};

/// Reverse-time rollout from the terminal state under maximum battery
/// heating, stopped where it first meets the heater-off forward curve.
inline BackwardSweep backward_rollout(const VehicleParams& p, const DriveCycle& cycle, const State& terminal,
                                      const Trajectory& forward) {
    const std::size_t n = cycle.steps();
    if (forward.first_step != 0 || forward.states.size() != n + 1)
        throw DomainError("backward_rollout: forward trajectory must span the whole cycle");

    std::vector<State> states{terminal};
    std::vector<double> controls;
    std::vector<PowerBreakdown> breakdowns;
    BackwardSweep out;
    double prev_gap = terminal.tb_c - forward.states[n].tb_c;

    std::size_t k = n;
    bool crossed = terminal.tb_c <= forward.states[n].tb_c;
    while (!crossed && k > 0) {
        --k;
        const double u = available_hvch(p, cycle[k]);
        StepResult r;
        try {
            r = step_backward(p, states.back(), {u, k}, cycle);
        } catch (const PowerInfeasible& e) {
            throw e.at_step(k);
        }
        if (!(r.state.soc >= 0.0 && r.state.soc <= 1.0))
            throw NoCrossing("backward sweep left the soc range at step " + std::to_string(k));
        states.push_back(r.state);
        controls.push_back(u);
        breakdowns.push_back(r.breakdown);
        const double gap = r.state.tb_c - forward.states[k].tb_c;
        if (gap > prev_gap) out.monotone = false;
        prev_gap = gap;
        crossed = gap <= 0.0;
    }
    if (!crossed) throw NoCrossing("target temperature unreachable even with maximum heating from departure");

    std::reverse(states.begin(), states.end());
    std::reverse(controls.begin(), controls.end());
    std::reverse(breakdowns.begin(), breakdowns.end());
    out.crossing_index = k;
    out.crossing_margin_k = forward.states[k].tb_c - states.front().tb_c;
    out.trajectory.dt = cycle.dt();
    out.trajectory.first_step = k;
    out.trajectory.origin = Origin::backward;
    out.trajectory.states = std::move(states);
    out.trajectory.controls = std::move(controls);
    out.trajectory.breakdowns = std::move(breakdowns);
    return out;
}

struct PlanDiagnostics {
    bool crossing_found = false;
    double crossing_margin_k = 0.0;
    bool monotone_crossing = true;
    std::size_t limit_violations = 0;
    double terminal_soc = 0.0;
    double terminal_tb_c = 0.0;
    bool terminal_soc_met = false;
    bool within_bounds = false;
};

struct PreheatPlan {
    std::size_t splice_index = 0;   // k*: heater off on steps [0, k*), at maximum on [k*, N)
    double switch_time_s = 0.0;     // preheat duration before arrival, (N - k*)·dt
    Trajectory trajectory;          // forward re-simulation under the spliced control
    Trajectory forward;             // heater-off rollout
    std::optional<Trajectory> backward_estimate;
    bool feasible = false;
    PlanDiagnostics diagnostics;
};

/// Forward/backward sweep planner. The switch step is the plan's output; the
/// reported trajectory is re-simulated forward from the forward state at k*.
/// An unreachable target yields feasible == false with a heat-from-departure
/// fallback trajectory.
inline PreheatPlan plan_preheat(const VehicleParams& p, const DriveCycle& cycle, const State& initial,
                                const Targets& targets) {
    check_targets(p, targets);
    const std::size_t n = cycle.steps();

    PreheatPlan plan;
    plan.forward = forward_rollout(p, cycle, initial);

    std::optional<BackwardSweep> sweep;
    try {
        sweep = backward_rollout(p, cycle, {targets.soc_f, targets.tb_f_c}, plan.forward);
    } catch (const NoCrossing&) {
        sweep.reset();
    }

    if (sweep) {
        plan.splice_index = sweep->crossing_index;
        plan.diagnostics.crossing_found = true;
        plan.diagnostics.crossing_margin_k = sweep->crossing_margin_k;
        plan.diagnostics.monotone_crossing = sweep->monotone;
        plan.backward_estimate = std::move(sweep->trajectory);
    } else {
        plan.splice_index = 0;
    }

    const std::size_t ks = plan.splice_index;
    const auto head = slice(plan.forward, 0, ks);
    const auto u = max_heating_controls(p, cycle, ks);
    const auto tail =
        simulate(p, cycle, plan.forward.states[ks], std::span<const double>(u).subspan(ks), ks, Origin::spliced);
    plan.trajectory = concat(head, tail);
    plan.trajectory.origin = Origin::spliced;
    plan.switch_time_s = static_cast<double>(n - ks) * cycle.dt();

    auto& d = plan.diagnostics;
    d.limit_violations = plan.trajectory.limit_violations();
    d.terminal_soc = plan.trajectory.terminal().soc;
    d.terminal_tb_c = plan.trajectory.terminal().tb_c;
    d.terminal_soc_met = d.terminal_soc >= targets.soc_f;
    d.within_bounds = std::all_of(plan.trajectory.states.begin(), plan.trajectory.states.end(), [&](const State& s) {
        return s.soc >= p.soc_min && s.soc <= p.soc_max && s.tb_c >= p.tb_min_c && s.tb_c <= p.tb_max_c;
    });
    plan.feasible = d.crossing_found && d.within_bounds &&
                    d.terminal_tb_c >= targets.tb_f_c - terminal_temperature_tolerance_k;
    return plan;
}

} // namespace preheat
