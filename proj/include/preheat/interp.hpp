#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace preheat {

namespace detail {

inline void require_strictly_increasing(std::span<const double> knots, const char* what) {
    if (knots.size() < 2)
        throw std::invalid_argument(std::string(what) + ": need at least two knots");
    for (std::size_t i = 0; i < knots.size(); ++i) {
        if (!std::isfinite(knots[i]))
            throw std::invalid_argument(std::string(what) + ": non-finite knot");
        if (i > 0 && !(knots[i] > knots[i - 1]))
            throw std::invalid_argument(std::string(what) + ": knots must be strictly increasing");
    }
}

// Lower cell index and fractional position of x on `knots`, clamped to the hull.
inline std::pair<std::size_t, double> locate(std::span<const double> knots, double x) {
    const std::size_t n = knots.size();
    if (x <= knots.front()) return {0, 0.0};
    if (x >= knots.back()) return {n - 2, 1.0};
    auto it = std::upper_bound(knots.begin(), knots.end(), x);
    std::size_t i = static_cast<std::size_t>(it - knots.begin()) - 1;
    double w = (x - knots[i]) / (knots[i + 1] - knots[i]);
    return {i, w};
}

} // namespace detail

/// Piecewise-linear table y(x), clamped to the end values outside the knots.
class Table1D {
public:
    Table1D() = default;
    Table1D(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        detail::require_strictly_increasing(x_, "Table1D");
        if (y_.size() != x_.size()) throw std::invalid_argument("Table1D: x/y size mismatch");
        for (double v : y_)
            if (!std::isfinite(v)) throw std::invalid_argument("Table1D: non-finite value");
    }

    double operator()(double x) const {
        auto [i, w] = detail::locate(x_, x);
        return y_[i] + w * (y_[i + 1] - y_[i]);
    }

    const std::vector<double>& knots() const noexcept { return x_; }
    const std::vector<double>& values() const noexcept { return y_; }
    bool empty() const noexcept { return x_.empty(); }

private:
    std::vector<double> x_, y_;
};

/// Bilinear table over (col, row) = (soc, Tb), stored row-major: one row per
/// Tb knot, one column per soc knot. Queries outside the hull are clamped.
class Grid2D {
public:
    Grid2D() = default;
    Grid2D(std::vector<double> soc_knots, std::vector<double> tb_knots, std::vector<double> values)
        : soc_(std::move(soc_knots)), tb_(std::move(tb_knots)), v_(std::move(values)) {
        detail::require_strictly_increasing(soc_, "Grid2D soc knots");
        detail::require_strictly_increasing(tb_, "Grid2D Tb knots");
        if (v_.size() != soc_.size() * tb_.size())
            throw std::invalid_argument("Grid2D: body must have (#Tb knots) x (#soc knots) values");
        for (double v : v_)
            if (!std::isfinite(v)) throw std::invalid_argument("Grid2D: non-finite value");
    }

    double at(std::size_t tb_index, std::size_t soc_index) const { return v_[tb_index * soc_.size() + soc_index]; }

    double operator()(double soc, double tb) const {
        auto [i, wi] = detail::locate(soc_, soc);
        auto [j, wj] = detail::locate(tb_, tb);
        double v00 = at(j, i), v01 = at(j, i + 1);
        double v10 = at(j + 1, i), v11 = at(j + 1, i + 1);
        double lo = v00 + wi * (v01 - v00);
        double hi = v10 + wi * (v11 - v10);
        return lo + wj * (hi - lo);
    }

    Grid2D scaled(double factor) const {
        Grid2D g = *this;
        for (double& v : g.v_) v *= factor;
        return g;
    }

    const std::vector<double>& soc_knots() const noexcept { return soc_; }
    const std::vector<double>& tb_knots() const noexcept { return tb_; }
    const std::vector<double>& values() const noexcept { return v_; }
    bool empty() const noexcept { return v_.empty(); }

private:
    std::vector<double> soc_, tb_, v_;
};

} // namespace preheat
