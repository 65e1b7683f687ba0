#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <toml++/toml.hpp>

#include "preheat/cycle.hpp"
#include "preheat/cycle_io.hpp"
#include "preheat/errors.hpp"
#include "preheat/heuristic.hpp"
#include "preheat/oracle.hpp"
#include "preheat/params.hpp"

namespace preheat {

struct Mission {
    State initial{0.90, -7.0};
    Targets targets;
};

/// Everything a run needs besides the cycle itself.
struct Config {
    VehicleParams vehicle = default_params();
    DpGrid dp;
    CycleDefaults cycle_defaults;
    Mission mission;
    SynthSpec synth;
};

namespace detail {

class TomlSection {
public:
    TomlSection(const toml::table* t, std::string name) : t_(t), name_(std::move(name)) {}

    bool present() const noexcept { return t_ != nullptr; }

    void number(std::string_view key, double& out) {
        if (auto* n = node(key)) {
            auto v = n->value<double>();
            if (!v) fail(key, "expected a number");
            out = *v;
        }
    }

    void count(std::string_view key, std::size_t& out) {
        if (auto* n = node(key)) {
            auto v = n->value<std::int64_t>();
            if (!v || *v < 0 || !n->is_integer()) fail(key, "expected a non-negative integer");
            out = static_cast<std::size_t>(*v);
        }
    }

    void flag(std::string_view key, bool& out) {
        if (auto* n = node(key)) {
            auto v = n->value<bool>();
            if (!v) fail(key, "expected true or false");
            out = *v;
        }
    }

    std::optional<std::string> text(std::string_view key) {
        if (auto* n = node(key)) {
            auto v = n->value<std::string>();
            if (!v) fail(key, "expected a string");
            return v;
        }
        return std::nullopt;
    }

    std::optional<std::vector<double>> vector(std::string_view key) {
        auto* n = node(key);
        if (!n) return std::nullopt;
        auto* arr = n->as_array();
        if (!arr) fail(key, "expected an array of numbers");
        std::vector<double> out;
        for (const auto& e : *arr) {
            auto v = e.value<double>();
            if (!v) fail(key, "expected an array of numbers");
            out.push_back(*v);
        }
        return out;
    }

    std::optional<std::vector<std::vector<double>>> matrix(std::string_view key) {
        auto* n = node(key);
        if (!n) return std::nullopt;
        auto* arr = n->as_array();
        if (!arr) fail(key, "expected an array of rows");
        std::vector<std::vector<double>> out;
        for (const auto& row : *arr) {
            auto* r = row.as_array();
            if (!r) fail(key, "expected an array of rows");
            auto& dst = out.emplace_back();
            for (const auto& e : *r) {
                auto v = e.value<double>();
                if (!v) fail(key, "rows must hold numbers");
                dst.push_back(*v);
            }
        }
        return out;
    }

    /// Every key must have been consumed by one of the accessors.
    void reject_unknown() const {
        if (!t_) return;
        for (const auto& [k, v] : *t_)
            if (!seen_.contains(std::string(k.str())))
                throw ParseError("unknown key '" + std::string(k.str()) + "' in [" + name_ + "]", line(v));
    }

    [[noreturn]] void fail(std::string_view key, const std::string& what) const {
        const toml::node* n = t_->get(key);
        throw ParseError("[" + name_ + "] " + std::string(key) + ": " + what, line(n ? *n : *t_));
    }

private:
    const toml::node* node(std::string_view key) {
        if (!t_) return nullptr;
        seen_.insert(std::string(key));
        return t_->get(key);
    }
    static std::size_t line(const toml::node& n) { return n.source().begin.line; }

    const toml::table* t_;
    std::string name_;
    std::set<std::string> seen_;
};

inline Grid2D limit_grid(TomlSection& s, const std::string& prefix, const std::vector<double>& soc,
                         const std::vector<double>& tb, const std::filesystem::path& base_dir, const Grid2D& fallback) {
    const auto inline_rows = s.matrix(prefix + "_w");
    const auto csv = s.text(prefix + "_csv");
    double scale = 1.0;
    s.number(prefix + "_scale", scale);
    if (inline_rows && csv) s.fail(prefix, "give either " + prefix + "_w or " + prefix + "_csv, not both");

    Grid2D g = fallback;
    if (csv) {
        std::filesystem::path path(*csv);
        g = load_grid_csv(path.is_absolute() ? path : base_dir / path);
    } else if (inline_rows) {
        if (soc.empty() || tb.empty()) s.fail(prefix + "_w", "inline tables need soc_knots and tb_knots");
        if (inline_rows->size() != tb.size()) s.fail(prefix + "_w", "need one row per tb knot");
        std::vector<double> body;
        for (const auto& row : *inline_rows) {
            if (row.size() != soc.size()) s.fail(prefix + "_w", "need one column per soc knot");
            body.insert(body.end(), row.begin(), row.end());
        }
        try {
            g = Grid2D(soc, tb, std::move(body));
        } catch (const std::invalid_argument& e) {
            s.fail(prefix + "_w", e.what());
        }
    }
    return scale == 1.0 ? g : g.scaled(scale);
}

} // namespace detail

/// Parses a TOML config. Every section and key is optional; omitted values
/// keep their defaults. Relative CSV paths resolve against `base_dir`.
inline Config parse_config(std::string_view text, const std::filesystem::path& base_dir = ".",
                           std::string_view source_name = "config") {
    toml::table root;
    try {
        root = toml::parse(text, source_name);
    } catch (const toml::parse_error& e) {
        throw ParseError(std::string(e.description()), e.source().begin.line);
    }
    static const std::set<std::string, std::less<>> sections{"vehicle", "limits", "dp", "cycle-defaults", "mission",
                                                             "synth"};
    for (const auto& [k, v] : root) {
        if (!sections.contains(k.str())) throw ParseError("unknown section [" + std::string(k.str()) + "]", v.source().begin.line);
        if (!v.is_table()) throw ParseError("'" + std::string(k.str()) + "' must be a table", v.source().begin.line);
    }
    using detail::TomlSection;
    Config c;

    TomlSection veh(root["vehicle"].as_table(), "vehicle");
    auto& p = c.vehicle;
    veh.number("capacity_ah", p.capacity_ah);
    veh.number("r_ref_ohm", p.r_ref_ohm);
    veh.number("t_ref_k", p.t_ref_k);
    veh.number("thermal_capacitance_j_per_k", p.thermal_capacitance);
    veh.number("eta_hvch", p.eta_hvch);
    veh.number("eta_ed_e", p.eta_ed_e);
    veh.number("eta_ed_q", p.eta_ed_q);
    veh.number("p_hvch_max_w", p.p_hvch_max_w);
    veh.number("soc_min", p.soc_min);
    veh.number("soc_max", p.soc_max);
    veh.number("tb_min_c", p.tb_min_c);
    veh.number("tb_max_c", p.tb_max_c);
    {
        auto soc = veh.vector("uoc_soc");
        auto volts = veh.vector("uoc_v");
        if (soc.has_value() != volts.has_value()) veh.fail(soc ? "uoc_soc" : "uoc_v", "uoc_soc and uoc_v go together");
        if (soc) {
            try {
                p.uoc_table = Table1D(*soc, *volts);
            } catch (const std::invalid_argument& e) {
                veh.fail("uoc_soc", e.what());
            }
        }
    }
    veh.reject_unknown();

    TomlSection lim(root["limits"].as_table(), "limits");
    {
        const auto soc = lim.vector("soc_knots").value_or(std::vector<double>{});
        const auto tb = lim.vector("tb_knots").value_or(std::vector<double>{});
        p.dchg_limit_w = detail::limit_grid(lim, "discharge", soc, tb, base_dir, p.dchg_limit_w);
        p.chg_limit_w = detail::limit_grid(lim, "charge", soc, tb, base_dir, p.chg_limit_w);
    }
    lim.reject_unknown();

    TomlSection dp(root["dp"].as_table(), "dp");
    dp.count("n_soc", c.dp.n_soc);
    dp.count("n_tb", c.dp.n_tb);
    dp.count("n_u", c.dp.n_u);
    dp.number("terminal_cell_tolerance", c.dp.terminal_cell_tolerance);
    dp.number("max_cost_divergence_rel", c.dp.max_cost_divergence_rel);
    dp.number("max_terminal_shortfall_k", c.dp.max_terminal_shortfall_k);
    dp.reject_unknown();

    TomlSection cd(root["cycle-defaults"].as_table(), "cycle-defaults");
    cd.number("p_aux_w", c.cycle_defaults.p_aux_w);
    cd.number("p_hvch_cabin_w", c.cycle_defaults.p_hvch_cabin_w);
    cd.number("t_amb_c", c.cycle_defaults.t_amb_c);
    cd.number("gamma_w_per_k", c.cycle_defaults.gamma_w_per_k);
    cd.reject_unknown();

    TomlSection ms(root["mission"].as_table(), "mission");
    ms.number("soc0", c.mission.initial.soc);
    ms.number("tb0_c", c.mission.initial.tb_c);
    ms.number("target_soc", c.mission.targets.soc_f);
    ms.number("target_tb_c", c.mission.targets.tb_f_c);
    ms.reject_unknown();

    TomlSection sy(root["synth"].as_table(), "synth");
    sy.number("duration_s", c.synth.duration_s);
    sy.number("dt_s", c.synth.dt_s);
    sy.number("mean_prop_kw", c.synth.mean_prop_kw);
    sy.number("variability", c.synth.variability);
    {
        std::size_t seed = c.synth.seed;
        sy.count("seed", seed);
        c.synth.seed = seed;
    }
    sy.reject_unknown();

    try {
        c.vehicle.validate();
        c.dp.validate();
        check_state_in_bounds(c.vehicle, c.mission.initial, "[mission] initial state");
        check_targets(c.vehicle, c.mission.targets);
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
    return c;
}

inline Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path(),
                        path.string());
}

} // namespace preheat
