#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "preheat/cycle.hpp"
#include "preheat/errors.hpp"
#include "preheat/interp.hpp"

namespace preheat {

namespace csv {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        auto comma = line.find(',', pos);
        out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline double parse_number(std::string_view field, std::size_t line) {
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw ParseError("cannot parse number '" + std::string(field) + "'", line);
    if (!std::isfinite(v)) throw ParseError("non-finite value '" + std::string(field) + "'", line);
    return v;
}

/// Shortest representation that parses back to the same double.
inline std::string format_number(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    if (!lines.empty() && lines.front().starts_with("\xEF\xBB\xBF")) lines.front().erase(0, 3);
    return lines;
}

} // namespace csv

inline constexpr std::string_view cycle_csv_header =
    "time_s,speed_mps,p_prop_w,p_aux_w,p_hvch_cabin_w,t_amb_c,gamma_w_per_k";

/// Parses a cycle CSV. `time_s` and `p_prop_w` are required; other columns
/// fall back to `defaults` (speed to 0). Blank lines are skipped.
inline DriveCycle parse_cycle(const std::vector<std::string>& lines, const CycleDefaults& defaults = {}) {
    std::size_t header_line = 0;
    while (header_line < lines.size() && csv::trim(lines[header_line]).empty()) ++header_line;
    if (header_line == lines.size()) throw ParseError("empty cycle file");

    const auto header = csv::split(lines[header_line]);
    std::map<std::string, std::size_t, std::less<>> col;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (!col.emplace(std::string(header[i]), i).second)
            throw ParseError("duplicate column '" + std::string(header[i]) + "'", header_line + 1);
    }
    for (auto required : {"time_s", "p_prop_w"})
        if (!col.contains(required))
            throw ParseError("missing required column '" + std::string(required) + "'", header_line + 1);
    auto index = [&](std::string_view name) -> std::optional<std::size_t> {
        auto it = col.find(name);
        return it == col.end() ? std::nullopt : std::optional(it->second);
    };
    const auto c_time = *index("time_s"), c_prop = *index("p_prop_w");
    const auto c_speed = index("speed_mps"), c_aux = index("p_aux_w"), c_cabin = index("p_hvch_cabin_w"),
               c_amb = index("t_amb_c"), c_gamma = index("gamma_w_per_k");

    std::vector<double> times;
    std::vector<std::size_t> line_of;
    std::vector<CycleSample> samples;
    for (std::size_t ln = header_line + 1; ln < lines.size(); ++ln) {
        if (csv::trim(lines[ln]).empty()) continue;
        const auto f = csv::split(lines[ln]);
        const std::size_t lineno = ln + 1;
        if (f.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(f.size()),
                             lineno);
        auto get = [&](std::optional<std::size_t> c, double fallback) {
            return c ? csv::parse_number(f[*c], lineno) : fallback;
        };
        CycleSample s;
        const double t = csv::parse_number(f[c_time], lineno);
        s.p_prop_w = csv::parse_number(f[c_prop], lineno);
        s.speed_mps = get(c_speed, 0.0);
        s.p_aux_w = get(c_aux, defaults.p_aux_w);
        s.p_hvch_cabin_w = get(c_cabin, defaults.p_hvch_cabin_w);
        s.t_amb_c = get(c_amb, defaults.t_amb_c);
        s.gamma_w_per_k = get(c_gamma, defaults.gamma_w_per_k);
        if (!times.empty() && !(t > times.back())) throw ParseError("time must be strictly increasing", lineno);
        times.push_back(t);
        line_of.push_back(lineno);
        samples.push_back(s);
    }
    if (samples.size() < 2) throw ParseError("a cycle needs at least two rows");

    const double dt = times[1] - times[0];
    constexpr double spacing_tol_s = 1e-6;
    for (std::size_t k = 1; k < times.size(); ++k)
        if (std::abs((times[k] - times[k - 1]) - dt) > spacing_tol_s)
            throw ParseError("non-uniform time spacing (expected " + csv::format_number(dt) + " s)", line_of[k]);
    try {
        return DriveCycle(dt, std::move(samples));
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
}

inline DriveCycle load_cycle(const std::filesystem::path& path, const CycleDefaults& defaults = {}) {
    return parse_cycle(csv::read_lines(path), defaults);
}

inline std::string format_cycle(const DriveCycle& cycle) {
    std::string out(cycle_csv_header);
    out += '\n';
    for (std::size_t k = 0; k < cycle.samples().size(); ++k) {
        const auto& s = cycle[k];
        for (double v : {static_cast<double>(k) * cycle.dt(), s.speed_mps, s.p_prop_w, s.p_aux_w, s.p_hvch_cabin_w,
                         s.t_amb_c, s.gamma_w_per_k}) {
            out += csv::format_number(v);
            out += ',';
        }
        out.back() = '\n';
    }
    return out;
}

inline void save_cycle(const DriveCycle& cycle, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path.string() + "'");
    out << format_cycle(cycle);
}

/// Limit grid CSV: header row holds the soc knots after a label cell; each
/// following row is a Tb knot followed by the power values in watts.
inline Grid2D load_grid_csv(const std::filesystem::path& path) {
    const auto lines = csv::read_lines(path);
    std::vector<double> soc, tb, body;
    bool header_done = false;
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        if (csv::trim(lines[ln]).empty()) continue;
        const auto f = csv::split(lines[ln]);
        if (!header_done) {
            for (std::size_t i = 1; i < f.size(); ++i) soc.push_back(csv::parse_number(f[i], ln + 1));
            header_done = true;
            continue;
        }
        if (f.size() != soc.size() + 1)
            throw ParseError("expected " + std::to_string(soc.size() + 1) + " fields", ln + 1);
        tb.push_back(csv::parse_number(f[0], ln + 1));
        for (std::size_t i = 1; i < f.size(); ++i) body.push_back(csv::parse_number(f[i], ln + 1));
    }
    try {
        return Grid2D(std::move(soc), std::move(tb), std::move(body));
    } catch (const std::invalid_argument& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

inline std::string format_grid_csv(const Grid2D& g) {
    std::string out = "tb_c\\soc";
    for (double s : g.soc_knots()) out += ',' + csv::format_number(s);
    out += '\n';
    for (std::size_t j = 0; j < g.tb_knots().size(); ++j) {
        out += csv::format_number(g.tb_knots()[j]);
        for (std::size_t i = 0; i < g.soc_knots().size(); ++i) out += ',' + csv::format_number(g.at(j, i));
        out += '\n';
    }
    return out;
}

/// Parameters of the seeded synthetic drive cycle. The defaults give the
/// standard preset: one hour at 30 s sampling, 19 kW mean propulsion power.
struct SynthSpec {
    double duration_s = 3600.0;
    double dt_s = 30.0;
    double mean_prop_kw = 19.0;
    double variability = 0.5;
    std::uint64_t seed = 1;
};

/// Alternating urban and highway segments with AR(1) power fluctuations and
/// regenerative braking events, rescaled so the mean propulsion power over the
/// integrated steps equals `mean_prop_kw`. Deterministic per seed.
inline DriveCycle synth_cycle(const SynthSpec& spec, const CycleDefaults& defaults = {}) {
    if (!(spec.duration_s > 0.0 && spec.dt_s > 0.0)) throw DomainError("synth_cycle: duration and dt must be > 0");
    if (!(spec.mean_prop_kw > 0.0)) throw DomainError("synth_cycle: mean propulsion power must be > 0");
    if (!(spec.variability >= 0.0 && spec.variability <= 1.0))
        throw DomainError("synth_cycle: variability must lie in [0, 1]");
    const double ratio = spec.duration_s / spec.dt_s;
    const auto steps = static_cast<std::size_t>(std::llround(ratio));
    if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * ratio)
        throw DomainError("synth_cycle: duration must be a positive multiple of dt");

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<double> shape(steps + 1), speed(steps + 1);
    std::size_t k = 0;
    double noise = 0.0;
    while (k <= steps) {
        const bool highway = unit(rng) < 0.5;
        const double seg_s = 120.0 + 240.0 * unit(rng);
        const auto seg_len = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(seg_s / spec.dt_s)));
        const double level = highway ? 1.25 + 0.25 * unit(rng) : 0.55 + 0.25 * unit(rng);
        const double cruise = highway ? 24.0 + 9.0 * unit(rng) : 8.0 + 6.0 * unit(rng);
        for (std::size_t i = 0; i < seg_len && k <= steps; ++i, ++k) {
            noise = 0.7 * noise + 0.5 * spec.variability * gauss(rng);
            const bool braking = !highway && unit(rng) < 0.25 * spec.variability;
            if (braking) {
                shape[k] = -(0.15 + 0.3 * unit(rng));
                speed[k] = std::max(0.0, 0.6 * cruise * (1.0 + 0.1 * noise));
            } else {
                shape[k] = std::clamp(level * (1.0 + noise), 0.0, 3.5);
                speed[k] = std::max(0.0, cruise * (1.0 + 0.1 * noise));
            }
        }
    }

    double mean = 0.0;
    for (std::size_t i = 0; i < steps; ++i) mean += shape[i];
    mean /= static_cast<double>(steps);
    if (!(mean > 0.0)) throw DomainError("synth_cycle: degenerate profile for this seed");
    const double scale = 1e3 * spec.mean_prop_kw / mean;

    std::vector<CycleSample> samples(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
        samples[i] = {speed[i], shape[i] * scale, defaults.p_aux_w, defaults.p_hvch_cabin_w, defaults.t_amb_c,
                      defaults.gamma_w_per_k};
    }
    return DriveCycle(spec.dt_s, std::move(samples));
}

} // namespace preheat
