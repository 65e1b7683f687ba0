#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "preheat/cycle.hpp"
#include "preheat/errors.hpp"
#include "preheat/model.hpp"

namespace preheat {

enum class Origin { forward, backward, spliced, oracle };

inline std::string_view to_string(Origin o) {
    switch (o) {
    case Origin::forward: return "forward";
    case Origin::backward: return "backward";
    case Origin::spliced: return "spliced";
    case Origin::oracle: return "oracle";
    }
    return "unknown";
}

/// States, controls and power flows over cycle steps
/// [first_step, first_step + steps()). states has one more entry than controls.
/// Backward trajectories are stored in forward time order; their breakdowns
/// are evaluated at the later state of each step.
struct Trajectory {
    double dt = 0.0;
    std::size_t first_step = 0;
    Origin origin = Origin::forward;
    std::vector<State> states;
    std::vector<double> controls;
    std::vector<PowerBreakdown> breakdowns;

    std::size_t steps() const noexcept { return controls.size(); }
    const State& initial() const { return states.front(); }
    const State& terminal() const { return states.back(); }

    std::size_t limit_violations() const {
        std::size_t n = 0;
        for (const auto& b : breakdowns) n += b.limit_violation ? 1 : 0;
        return n;
    }
};

/// Structural checks against the cycle the trajectory claims to cover.
inline void check_integrity(const Trajectory& t, const DriveCycle& cycle) {
    if (t.states.size() != t.controls.size() + 1)
        throw IntegrityError("trajectory needs exactly one more state than controls");
    if (t.breakdowns.size() != t.controls.size())
        throw IntegrityError("trajectory breakdown count differs from control count");
    if (t.dt != cycle.dt()) throw IntegrityError("trajectory dt differs from cycle dt");
    if (t.first_step + t.steps() > cycle.steps()) throw IntegrityError("trajectory extends beyond the cycle");
    for (const auto& s : t.states)
        if (!std::isfinite(s.soc) || !std::isfinite(s.tb_c)) throw IntegrityError("non-finite state");
}

/// Forward Euler rollout under a given control sequence, starting at cycle
/// step `first_step`. PowerInfeasible carries the failing step.
inline Trajectory simulate(const VehicleParams& p, const DriveCycle& cycle, const State& initial,
                           std::span<const double> controls, std::size_t first_step = 0,
                           Origin origin = Origin::forward) {
    if (first_step + controls.size() > cycle.steps()) throw DomainError("simulate: controls extend beyond the cycle");
    Trajectory t;
    t.dt = cycle.dt();
    t.first_step = first_step;
    t.origin = origin;
    t.states.reserve(controls.size() + 1);
    t.breakdowns.reserve(controls.size());
    t.controls.assign(controls.begin(), controls.end());
    t.states.push_back(initial);
    for (std::size_t i = 0; i < controls.size(); ++i) {
        const std::size_t k = first_step + i;
        StepResult r;
        try {
            r = step_forward(p, t.states.back(), {controls[i], k}, cycle);
        } catch (const PowerInfeasible& e) {
            throw e.at_step(k);
        }
        t.states.push_back(r.state);
        t.breakdowns.push_back(r.breakdown);
    }
    return t;
}

/// Joins b onto the end of a; b must start where a stops.
inline Trajectory concat(const Trajectory& a, const Trajectory& b) {
    if (a.dt != b.dt || a.first_step + a.steps() != b.first_step)
        throw IntegrityError("concat: trajectories are not adjacent");
    Trajectory t = a;
    t.states.insert(t.states.end(), b.states.begin() + 1, b.states.end());
    t.controls.insert(t.controls.end(), b.controls.begin(), b.controls.end());
    t.breakdowns.insert(t.breakdowns.end(), b.breakdowns.begin(), b.breakdowns.end());
    return t;
}

/// Sub-trajectory covering local steps [from, to).
inline Trajectory slice(const Trajectory& t, std::size_t from, std::size_t to) {
    if (from > to || to > t.steps()) throw IntegrityError("slice: bad range");
    Trajectory s;
    s.dt = t.dt;
    s.first_step = t.first_step + from;
    s.origin = t.origin;
    s.states.assign(t.states.begin() + from, t.states.begin() + to + 1);
    s.controls.assign(t.controls.begin() + from, t.controls.begin() + to);
    s.breakdowns.assign(t.breakdowns.begin() + from, t.breakdowns.begin() + to);
    return s;
}

/// Battery energy Σ dt·P_b in joules.
inline double battery_energy_j(const Trajectory& t) {
    double e = 0.0;
    for (const auto& b : t.breakdowns) e += b.p_battery_w;
    return e * t.dt;
}

} // namespace preheat
