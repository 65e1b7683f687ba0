#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "preheat/errors.hpp"
#include "preheat/interp.hpp"

namespace preheat {

inline constexpr double kelvin_offset = 273.15;
inline constexpr double seconds_per_hour = 3600.0;

/// Electrical, thermal and limit constants of the vehicle. Immutable once
/// validated; temperatures in celsius unless the name says otherwise.
struct VehicleParams {
    double capacity_ah = 200.0;
    Table1D uoc_table;                       // soc -> open-circuit voltage [V]
    double r_ref_ohm = 0.06;
    double t_ref_k = 298.15;
    double thermal_capacitance = 3.5e5;      // c_p * m_b [J/K]
    double eta_hvch = 0.87;
    double eta_ed_e = 0.90;
    double eta_ed_q = 0.80;
    double p_hvch_max_w = 6500.0;
    double soc_min = 0.10;
    double soc_max = 1.00;
    double tb_min_c = -20.0;
    double tb_max_c = 40.0;
    Grid2D dchg_limit_w;                     // (soc, Tb) -> max discharge power, >= 0
    Grid2D chg_limit_w;                      // (soc, Tb) -> min charge power, <= 0

    double capacity_as() const noexcept { return capacity_ah * seconds_per_hour; }

    void validate() const;
};

/// Normalised limit surfaces shaped after the OEM maps: discharge capability
/// grows with soc and temperature, charge capability grows with temperature
/// and shrinks as the pack fills.
namespace defaults {

inline constexpr double peak_discharge_w = 350e3;
inline constexpr double peak_charge_w = -150e3;

inline Table1D uoc_table() {
    return Table1D({0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0},
                   {340.0, 360.0, 372.0, 380.0, 386.0, 391.0, 396.0, 400.0, 404.0, 408.0, 420.0});
}

inline const std::vector<double>& limit_soc_knots() {
    static const std::vector<double> k{0.10, 0.25, 0.40, 0.55, 0.70, 0.85, 1.00};
    return k;
}

inline const std::vector<double>& limit_tb_knots() {
    static const std::vector<double> k{-30.0, -20.0, -10.0, 0.0, 10.0, 25.0, 50.0};
    return k;
}

namespace detail {
inline Grid2D separable(const std::vector<double>& soc_shape, const std::vector<double>& tb_shape, double scale) {
    std::vector<double> body;
    body.reserve(soc_shape.size() * tb_shape.size());
    for (double ft : tb_shape)
        for (double fs : soc_shape) body.push_back(scale * ft * fs);
    return Grid2D(limit_soc_knots(), limit_tb_knots(), std::move(body));
}
} // namespace detail

inline Grid2D dchg_limit() {
    return detail::separable({0.35, 0.60, 0.75, 0.85, 0.92, 0.97, 1.00},
                             {0.15, 0.25, 0.40, 0.55, 0.75, 0.95, 1.00}, peak_discharge_w);
}

inline Grid2D chg_limit() {
    return detail::separable({1.00, 0.97, 0.90, 0.80, 0.65, 0.50, 0.25},
                             {0.03, 0.08, 0.20, 0.35, 0.55, 0.90, 1.00}, peak_charge_w);
}

} // namespace defaults

inline VehicleParams default_params() {
    VehicleParams p;
    p.uoc_table = defaults::uoc_table();
    p.dchg_limit_w = defaults::dchg_limit();
    p.chg_limit_w = defaults::chg_limit();
    return p;
}

inline void VehicleParams::validate() const {
    auto fail = [](const std::string& m) { throw DomainError("VehicleParams: " + m); };
    auto positive = [&](double v, const char* name) {
        if (!(std::isfinite(v) && v > 0.0)) fail(std::string(name) + " must be finite and > 0");
    };
    auto efficiency = [&](double v, const char* name) {
        if (!(v > 0.0 && v <= 1.0)) fail(std::string(name) + " must lie in (0, 1]");
    };
    positive(capacity_ah, "capacity_ah");
    positive(r_ref_ohm, "r_ref_ohm");
    positive(t_ref_k, "t_ref_k");
    positive(thermal_capacitance, "thermal_capacitance");
    positive(p_hvch_max_w, "p_hvch_max_w");
    efficiency(eta_hvch, "eta_hvch");
    efficiency(eta_ed_q, "eta_ed_q");
    if (!(eta_ed_e > 0.0 && eta_ed_e < 1.0)) fail("eta_ed_e must lie in (0, 1)");
    if (!(soc_min > 0.0 && soc_min < soc_max && soc_max <= 1.0)) fail("need 0 < soc_min < soc_max <= 1");
    if (!(std::isfinite(tb_min_c) && std::isfinite(tb_max_c) && tb_min_c < tb_max_c)) fail("need tb_min < tb_max");
    if (tb_min_c + kelvin_offset <= 0.0) fail("tb_min below absolute zero");

    if (uoc_table.empty()) fail("uoc table missing");
    const auto& uk = uoc_table.knots();
    const auto& uv = uoc_table.values();
    if (uk.front() > 0.0 || uk.back() < 1.0) fail("uoc table must cover soc in [0, 1]");
    for (std::size_t i = 0; i < uv.size(); ++i) {
        if (!(uv[i] > 0.0)) fail("open-circuit voltages must be > 0");
        if (i > 0 && !(uv[i] > uv[i - 1])) fail("uoc table must be strictly increasing in soc");
    }

    if (dchg_limit_w.empty() || chg_limit_w.empty()) fail("power limit tables missing");
    auto check_grid = [&](const Grid2D& g, bool discharge) {
        const std::size_t ns = g.soc_knots().size(), nt = g.tb_knots().size();
        for (std::size_t j = 0; j < nt; ++j)
            for (std::size_t i = 0; i < ns; ++i) {
                const double v = g.at(j, i);
                if (discharge ? v < 0.0 : v > 0.0)
                    fail(discharge ? "discharge limits must be >= 0" : "charge limits must be <= 0");
                const double mag = std::abs(v);
                if (j > 0 && mag < std::abs(g.at(j - 1, i)))
                    fail("limit magnitude must be non-decreasing in Tb");
                if (i > 0) {
                    const double prev = std::abs(g.at(j, i - 1));
                    if (discharge ? mag < prev : mag > prev)
                        fail(discharge ? "discharge limit must be non-decreasing in soc"
                                       : "charge limit magnitude must be non-increasing in soc");
                }
            }
    };
    check_grid(dchg_limit_w, true);
    check_grid(chg_limit_w, false);
}

} // namespace preheat
