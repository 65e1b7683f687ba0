#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "preheat/errors.hpp"
#include "preheat/params.hpp"

namespace preheat {

/// Exogenous inputs at one time point. Step k uses sample k (left endpoint).
struct CycleSample {
    double speed_mps = 0.0;
    double p_prop_w = 0.0;        // negative while regenerating
    double p_aux_w = 0.0;
    double p_hvch_cabin_w = 0.0;
    double t_amb_c = 0.0;
    double gamma_w_per_k = 0.0;

    bool operator==(const CycleSample&) const = default;
};

/// Fallbacks for columns a cycle file may omit.
struct CycleDefaults {
    double p_aux_w = 500.0;
    double p_hvch_cabin_w = 1978.0;
    double t_amb_c = -7.0;
    double gamma_w_per_k = 35.0;
};

/// Uniformly sampled drive cycle. Holds N+1 time points spanning N steps;
/// the exogenous values of the final time point are never integrated.
class DriveCycle {
public:
    DriveCycle(double dt_s, std::vector<CycleSample> samples) : dt_(dt_s), samples_(std::move(samples)) {
        if (!(std::isfinite(dt_) && dt_ > 0.0)) throw DomainError("DriveCycle: dt must be finite and > 0");
        if (samples_.size() < 2) throw DomainError("DriveCycle: need at least two time points");
        for (std::size_t k = 0; k < samples_.size(); ++k) {
            const auto& s = samples_[k];
            for (double v : {s.speed_mps, s.p_prop_w, s.p_aux_w, s.p_hvch_cabin_w, s.t_amb_c, s.gamma_w_per_k})
                if (!std::isfinite(v)) throw DomainError("DriveCycle: non-finite value at sample " + std::to_string(k));
            if (s.p_aux_w < 0.0 || s.p_hvch_cabin_w < 0.0 || s.gamma_w_per_k < 0.0)
                throw DomainError("DriveCycle: negative aux/cabin/gamma at sample " + std::to_string(k));
        }
    }

    double dt() const noexcept { return dt_; }
    /// Number of integration steps N.
    std::size_t steps() const noexcept { return samples_.size() - 1; }
    double duration() const noexcept { return dt_ * static_cast<double>(steps()); }
    const CycleSample& operator[](std::size_t k) const { return samples_.at(k); }
    const std::vector<CycleSample>& samples() const noexcept { return samples_; }

    /// Cabin demand must leave room under the HVCH ceiling at every sample.
    void check_against(const VehicleParams& p) const {
        for (std::size_t k = 0; k < samples_.size(); ++k)
            if (samples_[k].p_hvch_cabin_w > p.p_hvch_max_w)
                throw DomainError("DriveCycle: cabin HVCH demand exceeds p_hvch_max at sample " + std::to_string(k));
    }

    bool operator==(const DriveCycle&) const = default;

private:
    double dt_;
    std::vector<CycleSample> samples_;
};

} // namespace preheat
