#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "preheat/cycle.hpp"
#include "preheat/cycle_io.hpp"
#include "preheat/params.hpp"

namespace testing {

inline preheat::DriveCycle constant_cycle(std::size_t steps, double dt, const preheat::CycleSample& s) {
    return preheat::DriveCycle(dt, std::vector<preheat::CycleSample>(steps + 1, s));
}

inline preheat::CycleSample quiet_sample(double t_amb_c = -7.0, double gamma = 35.0) {
    return {0.0, 0.0, 0.0, 0.0, t_amb_c, gamma};
}

// Default vehicle on the default synthetic hour.
inline preheat::DriveCycle preset_cycle(std::uint64_t seed = 1) {
    preheat::SynthSpec s;
    s.seed = seed;
    return preheat::synth_cycle(s);
}

inline constexpr preheat::State preset_initial{0.90, -7.0};

// Scratch directory removed on scope exit.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("preheat-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }

    std::filesystem::path write(const std::string& name, const std::string& text) const {
        const auto p = path_ / name;
        std::ofstream(p, std::ios::binary) << text;
        return p;
    }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace testing
