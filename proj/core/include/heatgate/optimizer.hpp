#pragma once

#include "heatgate/fem.hpp"
#include "heatgate/mesh.hpp"

#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace heatgate {

enum class UpdateRule { bang_bang, euler };

std::string_view to_string(UpdateRule rule);
UpdateRule parse_update_rule(std::string_view text);

/// Parameters of the density evolution. Defaults are the values used for all gate problems;
/// only the target mass differs between devices.
struct OptParams {
    double rho_min = 0.01;
    double rho_max = 1.0;
    double theta = 0.03;       // bang-bang increment
    double q = 0.01;           // Euler step scale (lambda * dt)
    ConductivityParams conductivity;
    double mass = 2000.0;      // sum of rho_ev * V_i over the domain
    int max_iters = 200;
    UpdateRule rule = UpdateRule::bang_bang;
    int snapshot_stride = 10;

    // Throws std::invalid_argument naming the offending field.
    void validate(int element_count) const;
};

struct DensityField {
    std::vector<double> rho;
    int iteration = 0;
};

DensityField initial_density(const GridMesh& mesh, const OptParams& params);

// Lagrange-like multiplier mu = sum(C_i) / M.
double mu(std::span<const double> costs, const OptParams& params);

double project(double rho, const OptParams& params);

DensityField update_bang_bang(const DensityField& densities, std::span<const double> costs,
                              double mu_n, const OptParams& params);

DensityField update_euler(const DensityField& densities, std::span<const double> costs,
                          double mu_n, const OptParams& params);

struct StepResult {
    DensityField state;
    std::vector<double> costs;     // evaluated on the incoming densities
    TemperatureField temperature;
    SolveStats solve_stats;
    double mu = 0.0;
    double energy = 0.0;           // T^T K T of the solved system
};

/// One solve -> cost -> mu -> update -> project cycle.
///
/// `warm_start` is an optional full temperature vector used as the CG starting point.
StepResult step(const DensityField& state, const GridMesh& mesh, const BoundaryConditionSet& bcs,
                const OptParams& params, std::span<const double> warm_start = {},
                const SolveOptions& solver = {});

enum class Termination { converged, max_iters };

std::string_view to_string(Termination t);

struct TraceRecord {
    int iteration = 0;
    double total_cost = 0.0;
    double total_mass = 0.0;
    double energy = 0.0;
    int solver_iterations = 0;
};

struct Snapshot {
    int iteration = 0;
    std::vector<double> rho;
};

struct RunTrace {
    std::vector<TraceRecord> records;
    std::vector<Snapshot> snapshots;
    Termination termination = Termination::max_iters;
    DensityField final_state;
};

struct RunOptions {
    // Called after every step with the step result; used by callers that audit the run.
    std::function<void(const StepResult&)> on_step;
    bool warm_start = true;
    SolveOptions solver;
};

/// Iterates step() until every density changes by less than theta / 2 or max_iters is hit.
/// Snapshots are taken every snapshot_stride iterations and at termination.
RunTrace run(DensityField state, const GridMesh& mesh, const BoundaryConditionSet& bcs,
             const OptParams& params, const RunOptions& options = {});

} // namespace heatgate
