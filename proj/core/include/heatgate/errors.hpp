#pragma once

#include <stdexcept>
#include <string>

namespace heatgate {

// Neumann-only load set whose fluxes do not balance; no stationary solution.
class IllPosedProblem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Reduced system still contains the constant null space (no Dirichlet node, no gauge pin).
class SingularSystem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SolverFailure : public std::runtime_error {
public:
    SolverFailure(const std::string& what, int iterations, double residual)
        : std::runtime_error(what), iterations_(iterations), residual_(residual) {}

    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

class InvalidSpec : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace heatgate
