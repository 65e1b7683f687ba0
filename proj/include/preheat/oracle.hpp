#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "preheat/accounting.hpp"
#include "preheat/cycle.hpp"
#include "preheat/errors.hpp"
#include "preheat/heuristic.hpp"
#include "preheat/model.hpp"
#include "preheat/trajectory.hpp"

namespace preheat {

/// Discretisation of the feasible set for the dynamic-programming baseline.
/// State knots are uniform over [soc_min, soc_max] x [tb_min, tb_max]; control
/// levels are uniform over [0, p_hvch_max - p_hvch_cabin(k)] and always include
/// both ends.
struct DpGrid {
    std::size_t n_soc = 61;
    std::size_t n_tb = 81;
    std::size_t n_u = 5;
    /// Terminal set: tb >= tb_f and soc >= soc_f, accepted within this many cells.
    double terminal_cell_tolerance = 0.5;
    /// GridTooCoarse thresholds for the extracted trajectory.
    double max_cost_divergence_rel = 0.02;
    double max_terminal_shortfall_k = 0.5;
    bool keep_value_snapshots = false;

    void validate() const {
        if (n_soc < 2 || n_tb < 2 || n_u < 2) throw DomainError("DpGrid: every knot count must be >= 2");
        if (!(terminal_cell_tolerance >= 0.0) || !(max_cost_divergence_rel > 0.0) || !(max_terminal_shortfall_k >= 0.0))
            throw DomainError("DpGrid: tolerances must be non-negative");
    }
};

struct DpSolution {
    double cost_wh = 0.0;             // simulated cost of the extracted trajectory
    double predicted_cost_wh = 0.0;   // interpolated value at the initial state
    Trajectory trajectory;
    std::size_t switch_index = 0;     // first step with battery heating, N if none
    double switch_fraction = 0.0;     // level of the switch sample relative to its maximum
    bool bang_off = false;            // see is_bang_off
    double bellman_max_residual_wh = 0.0;
    std::vector<std::vector<double>> value_snapshots;   // [k][tb_index * n_soc + soc_index], Wh
};

/// First step with non-zero heating, in cycle step numbering.
inline std::size_t switch_index(const Trajectory& t) {
    for (std::size_t i = 0; i < t.steps(); ++i)
        if (t.controls[i] > 0.0) return t.first_step + i;
    return t.first_step + t.steps();
}

/// Heater off before the switch step and at the available maximum after it.
/// The switch sample itself may hold any level in (0, max]: a single switch
/// whose instant falls inside that sampling interval.
inline bool is_bang_off(const Trajectory& t, const VehicleParams& p, const DriveCycle& cycle) {
    const std::size_t ks = switch_index(t);
    for (std::size_t i = 0; i < t.steps(); ++i) {
        const std::size_t k = t.first_step + i;
        if (k == ks) continue;
        const double want = k < ks ? 0.0 : available_hvch(p, cycle[k]);
        if (std::abs(t.controls[i] - want) > 1e-9 * std::max(1.0, want)) return false;
    }
    return true;
}

/// Control at the switch step as a fraction of the available maximum; 0 when
/// the heater is never used.
inline double switch_fraction(const Trajectory& t, const VehicleParams& p, const DriveCycle& cycle) {
    const std::size_t ks = switch_index(t);
    if (ks >= t.first_step + t.steps()) return 0.0;
    const double umax = available_hvch(p, cycle[ks]);
    return umax > 0.0 ? t.controls[ks - t.first_step] / umax : 0.0;
}

namespace detail {

inline constexpr double inf = std::numeric_limits<double>::infinity();

// Cost-to-go paired with the smallest signed terminal violation (in grid
// cells) still reachable from a state. A transition is admissible when that
// reachable violation is within tolerance.
struct Candidate {
    double shortfall = inf;
    double cost_j = inf;
    double control = 0.0;
};

class ValueTables {
public:
    ValueTables(const VehicleParams& p, const DpGrid& g, const Targets& tg, std::size_t steps)
        : p_(p), g_(g), tg_(tg), n_(steps), cells_(g.n_soc * g.n_tb),
          h_soc_((p.soc_max - p.soc_min) / static_cast<double>(g.n_soc - 1)),
          h_tb_((p.tb_max_c - p.tb_min_c) / static_cast<double>(g.n_tb - 1)),
          cost_(steps * cells_, inf), shortfall_(steps * cells_, inf) {}

    std::size_t cells() const noexcept { return cells_; }
    double h_soc() const noexcept { return h_soc_; }
    double h_tb() const noexcept { return h_tb_; }

    State knot(std::size_t cell) const {
        const std::size_t i = cell % g_.n_soc, j = cell / g_.n_soc;
        return {i + 1 == g_.n_soc ? p_.soc_max : p_.soc_min + h_soc_ * static_cast<double>(i),
                j + 1 == g_.n_tb ? p_.tb_max_c : p_.tb_min_c + h_tb_ * static_cast<double>(j)};
    }

    void store(std::size_t k, std::size_t cell, double min_shortfall, double cost_j) {
        cost_[k * cells_ + cell] = cost_j;
        shortfall_[k * cells_ + cell] = min_shortfall;
    }

    /// Signed terminal violation in grid cells, negative inside the target
    /// set. Linear across the set boundary, so interpolation does not bias it.
    double terminal_shortfall(const State& s) const {
        return std::max((tg_.tb_f_c - s.tb_c) / h_tb_, (tg_.soc_f - s.soc) / h_soc_);
    }

    bool in_hull(const State& s) const {
        constexpr double eps = 1e-12;
        return s.soc >= p_.soc_min - eps && s.soc <= p_.soc_max + eps && s.tb_c >= p_.tb_min_c - eps &&
               s.tb_c <= p_.tb_max_c + eps;
    }

    /// (shortfall, cost-to-go) at stage k. Stage N is the exact terminal
    /// function. Earlier stages are bilinear over the feasible corners, with
    /// weights renormalised; the query is infeasible when infeasible corners
    /// carry more than half the weight (nearest-corner feasibility, so the
    /// infeasible region does not creep one cell per stage).
    Candidate lookup(std::size_t k, const State& s) const {
        if (!in_hull(s)) return {};
        if (k == n_) return {terminal_shortfall(s), 0.0, 0.0};
        auto coord = [](double x, double lo, double h, std::size_t n) {
            double f = std::clamp((x - lo) / h, 0.0, static_cast<double>(n - 1));
            std::size_t i = std::min(static_cast<std::size_t>(f), n - 2);
            return std::pair{i, f - static_cast<double>(i)};
        };
        auto [i, wi] = coord(s.soc, p_.soc_min, h_soc_, g_.n_soc);
        auto [j, wj] = coord(s.tb_c, p_.tb_min_c, h_tb_, g_.n_tb);
        const double w[4] = {(1 - wi) * (1 - wj), wi * (1 - wj), (1 - wi) * wj, wi * wj};
        const std::size_t c[4] = {j * g_.n_soc + i, j * g_.n_soc + i + 1, (j + 1) * g_.n_soc + i,
                                  (j + 1) * g_.n_soc + i + 1};
        Candidate out{0.0, 0.0, 0.0};
        double w_ok = 0.0;
        for (int q = 0; q < 4; ++q) {
            if (w[q] <= 0.0) continue;
            const double d = shortfall_[k * cells_ + c[q]];
            const double v = cost_[k * cells_ + c[q]];
            if (!std::isfinite(d) || !std::isfinite(v)) continue;
            out.shortfall += w[q] * d;
            out.cost_j += w[q] * v;
            w_ok += w[q];
        }
        if (!(w_ok >= 0.5)) return {};
        out.shortfall /= w_ok;
        out.cost_j /= w_ok;
        return out;
    }

    std::vector<double> snapshot_wh(std::size_t k) const {
        std::vector<double> v(cost_.begin() + static_cast<std::ptrdiff_t>(k * cells_),
                              cost_.begin() + static_cast<std::ptrdiff_t>((k + 1) * cells_));
        for (double& x : v) x /= seconds_per_hour;
        return v;
    }

private:
    const VehicleParams& p_;
    const DpGrid& g_;
    const Targets& tg_;
    std::size_t n_, cells_;
    double h_soc_, h_tb_;
    std::vector<double> cost_, shortfall_;
};

struct Transition {
    Candidate value;          // chosen control and its cost-to-go
    double min_shortfall = inf;
    StepResult step;
};

// Cheapest admissible control at (k, s) given the stage-(k+1) tables; when no
// control is admissible, the one minimising the reachable violation.
inline Transition best_transition(const VehicleParams& p, const DriveCycle& cycle, const ValueTables& tables,
                                  std::size_t n_u, std::size_t k, const State& s, double tol) {
    Transition best, fallback;
    const double umax = available_hvch(p, cycle[k]);
    for (std::size_t l = 0; l < n_u; ++l) {
        const double u = l + 1 == n_u ? umax : umax * static_cast<double>(l) / static_cast<double>(n_u - 1);
        StepResult r;
        try {
            r = step_forward(p, s, {u, k}, cycle);
        } catch (const PowerInfeasible&) {
            continue;
        }
        if (r.breakdown.limit_violation) continue;
        const Candidate next = tables.lookup(k + 1, r.state);
        if (!std::isfinite(next.shortfall)) continue;
        const Candidate c{next.shortfall, cycle.dt() * r.breakdown.p_battery_w + next.cost_j, u};
        if (c.shortfall <= tol && c.cost_j < best.value.cost_j) best = {c, 0.0, r};
        if (c.shortfall < fallback.value.shortfall ||
            (c.shortfall == fallback.value.shortfall && c.cost_j < fallback.value.cost_j))
            fallback = {c, 0.0, r};
    }
    Transition out = std::isfinite(best.value.cost_j) ? best : fallback;
    out.min_shortfall = fallback.value.shortfall;
    return out;
}

// Terminal violation reached from (k, s) by heating at the maximum on every
// remaining step, simulated exactly; infinite if the rollout leaves the
// feasible set. Any admissible policy's violation bounds the minimum from
// above, and this one is the minimiser whenever temperature is the binding
// target, so the recursion's interpolation error does not pile up there.
inline double max_heating_shortfall(const VehicleParams& p, const DriveCycle& cycle, const ValueTables& tables,
                                    std::size_t k, State s) {
    for (std::size_t i = k; i < cycle.steps(); ++i) {
        StepResult r;
        try {
            r = step_forward(p, s, {available_hvch(p, cycle[i]), i}, cycle);
        } catch (const PowerInfeasible&) {
            return inf;
        }
        if (r.breakdown.limit_violation || !tables.in_hull(r.state)) return inf;
        s = r.state;
    }
    return tables.terminal_shortfall(s);
}

} // namespace detail

/// Backward value iteration over the discretised optimal-control problem with
/// stage cost dt·P_b, followed by forward extraction at the exact (off-grid)
/// states. The reported cost is the extracted trajectory's simulated energy.
inline DpSolution solve_dp(const VehicleParams& p, const DriveCycle& cycle, const State& initial,
                           const Targets& targets, const DpGrid& grid) {
    grid.validate();
    check_targets(p, targets);
    check_state_in_bounds(p, initial, "initial state");
    const std::size_t n = cycle.steps();
    const double tol = grid.terminal_cell_tolerance;

    detail::ValueTables tables(p, grid, targets, n);
    DpSolution sol;
    if (grid.keep_value_snapshots) sol.value_snapshots.resize(n);

    for (std::size_t k = n; k-- > 0;) {
        for (std::size_t cell = 0; cell < tables.cells(); ++cell) {
            const State s = tables.knot(cell);
            const auto t = detail::best_transition(p, cycle, tables, grid.n_u, k, s, tol);
            const double certified = detail::max_heating_shortfall(p, cycle, tables, k, s);
            tables.store(k, cell, std::min(t.min_shortfall, certified), t.value.cost_j);
        }
        if (grid.keep_value_snapshots) sol.value_snapshots[k] = tables.snapshot_wh(k);
    }

    const auto start = tables.lookup(0, initial);
    if (!(start.shortfall <= tol))
        throw InfeasibleProblem("no admissible control sequence reaches the terminal set (shortfall " +
                                std::to_string(start.shortfall) + " cells)");
    sol.predicted_cost_wh = start.cost_j / seconds_per_hour;

    Trajectory& t = sol.trajectory;
    t.dt = cycle.dt();
    t.origin = Origin::oracle;
    t.states.push_back(initial);
    double bellman = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const State s = t.states.back();
        const auto tr = detail::best_transition(p, cycle, tables, grid.n_u, k, s, tol);
        if (!std::isfinite(tr.value.cost_j))
            throw GridTooCoarse("extraction found no admissible transition at step " + std::to_string(k));
        const double here = tables.lookup(k, s).cost_j;
        bellman = std::max(bellman, std::abs(here - tr.value.cost_j));
        t.states.push_back(tr.step.state);
        t.controls.push_back(tr.value.control);
        t.breakdowns.push_back(tr.step.breakdown);
    }
    sol.bellman_max_residual_wh = bellman / seconds_per_hour;
    sol.cost_wh = battery_energy_j(t) / seconds_per_hour;
    sol.switch_index = switch_index(t);
    sol.switch_fraction = switch_fraction(t, p, cycle);
    sol.bang_off = is_bang_off(t, p, cycle);

    const double tb_short = std::max(0.0, targets.tb_f_c - t.terminal().tb_c);
    const double soc_short = std::max(0.0, targets.soc_f - t.terminal().soc);
    if (tb_short > grid.max_terminal_shortfall_k || soc_short > tol * tables.h_soc() + 1e-12)
        throw GridTooCoarse("extracted trajectory misses the terminal targets by " + std::to_string(tb_short) +
                            " K / " + std::to_string(soc_short) + " soc");
    const double divergence = std::abs(sol.cost_wh - sol.predicted_cost_wh) / std::max(std::abs(sol.cost_wh), 1e-12);
    if (divergence > grid.max_cost_divergence_rel)
        throw GridTooCoarse("extracted cost diverges from the value prediction by " +
                            std::to_string(100.0 * divergence) + " %");
    return sol;
}

/// Heuristic-versus-optimal deltas, heuristic minus oracle.
struct GapReport {
    EnergyReport heuristic;
    EnergyReport oracle;
    EnergyReport delta;
    double total_gap_rel = 0.0;
    std::size_t heuristic_switch_index = 0;
    std::size_t oracle_switch_index = 0;
    long switch_delta_steps = 0;
    double switch_delta_s = 0.0;
    double max_tb_deviation_k = 0.0;
};

inline GapReport gap_report(const Trajectory& heuristic, const Trajectory& oracle, const VehicleParams& p,
                            const DriveCycle& cycle) {
    if (heuristic.states.size() != oracle.states.size() || heuristic.first_step != oracle.first_step)
        throw IntegrityError("gap_report: trajectories cover different steps");
    GapReport g;
    g.heuristic = energy_report(heuristic, p, cycle);
    g.oracle = energy_report(oracle, p, cycle);
    g.delta = g.heuristic - g.oracle;
    g.total_gap_rel = g.delta.total_battery_wh / std::abs(g.oracle.total_battery_wh);
    g.heuristic_switch_index = switch_index(heuristic);
    g.oracle_switch_index = switch_index(oracle);
    g.switch_delta_steps = static_cast<long>(g.heuristic_switch_index) - static_cast<long>(g.oracle_switch_index);
    g.switch_delta_s = static_cast<double>(g.switch_delta_steps) * cycle.dt();
    for (std::size_t i = 0; i < heuristic.states.size(); ++i)
        g.max_tb_deviation_k = std::max(g.max_tb_deviation_k, std::abs(heuristic.states[i].tb_c - oracle.states[i].tb_c));
    return g;
}

struct Comparison {
    PreheatPlan plan;
    DpSolution dp;
    GapReport gap;
};

inline Comparison compare(const VehicleParams& p, const DriveCycle& cycle, const State& initial,
                          const Targets& targets, const DpGrid& grid) {
    Comparison c;
    c.plan = plan_preheat(p, cycle, initial, targets);
    c.dp = solve_dp(p, cycle, initial, targets, grid);
    c.gap = gap_report(c.plan.trajectory, c.dp.trajectory, p, cycle);
    return c;
}

} // namespace preheat
