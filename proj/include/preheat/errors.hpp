#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace preheat {

/// Argument outside the domain of a model relation (soc outside [0,1],
/// non-positive absolute temperature, control above the HVCH ceiling, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Demanded terminal power exceeds the battery's deliverable maximum
/// U_oc^2 / (4R), i.e. the current quadratic has no real root.
class PowerInfeasible : public std::runtime_error {
public:
    PowerInfeasible(const std::string& what, std::optional<std::size_t> step = std::nullopt)
        : std::runtime_error(what), step_(step) {}

    std::optional<std::size_t> step() const noexcept { return step_; }

    PowerInfeasible at_step(std::size_t k) const {
        return PowerInfeasible(std::string(what()) + " (step " + std::to_string(k) + ")", k);
    }

private:
    std::optional<std::size_t> step_;
};

/// Backward max-heating sweep never met the forward temperature curve.
class NoCrossing : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The DP found no admissible path from the initial state to the terminal set.
class InfeasibleProblem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// DP extraction disagrees with the value-function prediction.
class GridTooCoarse : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Trajectory fails its structural invariants.
class IntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace preheat
