#include "heatgate/optimizer.hpp"

#include "heatgate/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace heatgate {

namespace {

void require(bool ok, const char* field, const std::string& rule) {
    if (!ok) {
        throw std::invalid_argument(std::string(field) + ": " + rule);
    }
}

void check_aligned(const DensityField& densities, std::span<const double> costs) {
    if (densities.rho.size() != costs.size()) {
        throw std::invalid_argument("cost field length does not match density field");
    }
}

} // namespace

std::string_view to_string(UpdateRule rule) {
    return rule == UpdateRule::bang_bang ? "bang_bang" : "euler";
}

UpdateRule parse_update_rule(std::string_view text) {
    if (text == "bang_bang" || text == "bang-bang") {
        return UpdateRule::bang_bang;
    }
    if (text == "euler") {
        return UpdateRule::euler;
    }
    throw std::invalid_argument("rule: expected bang_bang or euler, got '" + std::string(text) + "'");
}

std::string_view to_string(Termination t) {
    return t == Termination::converged ? "converged" : "max_iters";
}

void OptParams::validate(int element_count) const {
    require(rho_min > 0.0 && std::isfinite(rho_min), "rho_min", "must be > 0");
    require(rho_max > rho_min && rho_max <= 1.0, "rho_max", "must satisfy rho_min < rho_max <= 1");
    require(theta > 0.0 && std::isfinite(theta), "theta", "must be > 0");
    require(q > 0.0 && std::isfinite(q), "q", "must be > 0");
    require(mass > 0.0 && std::isfinite(mass), "mass", "must be > 0");
    require(mass <= element_count * rho_max * GridMesh::element_volume, "mass",
            "must not exceed element count * rho_max");
    require(max_iters >= 1, "max_iters", "must be >= 1");
    require(snapshot_stride >= 1, "snapshot_stride", "must be >= 1");
    try {
        conductivity.validate();
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string("k_min/k_max/p: ") + e.what());
    }
}

DensityField initial_density(const GridMesh& mesh, const OptParams& params) {
    return {std::vector<double>(mesh.element_count(), params.rho_min), 0};
}

double mu(std::span<const double> costs, const OptParams& params) {
    if (!(params.mass > 0.0)) {
        throw std::invalid_argument("mass must be positive");
    }
    return std::accumulate(costs.begin(), costs.end(), 0.0) / params.mass;
}

double project(double rho, const OptParams& params) {
    if (rho > params.rho_max) {
        return params.rho_max;
    }
    if (rho < params.rho_min) {
        return params.rho_min;
    }
    return rho;
}

DensityField update_bang_bang(const DensityField& densities, std::span<const double> costs,
                              double mu_n, const OptParams& params) {
    check_aligned(densities, costs);
    DensityField next{densities.rho, densities.iteration};
    for (std::size_t i = 0; i < next.rho.size(); ++i) {
        const double rho = densities.rho[i];
        const double ratio = costs[i] / (rho * GridMesh::element_volume);
        // An element without heat flow never grows, even when mu is also zero.
        const bool grow = costs[i] > 0.0 && ratio - mu_n >= 0.0;
        next.rho[i] = project(grow ? rho + params.theta : rho - params.theta, params);
    }
    return next;
}

DensityField update_euler(const DensityField& densities, std::span<const double> costs,
                          double mu_n, const OptParams& params) {
    check_aligned(densities, costs);
    DensityField next{densities.rho, densities.iteration};
    for (std::size_t i = 0; i < next.rho.size(); ++i) {
        const double rho = densities.rho[i];
        const double ratio = costs[i] / (rho * GridMesh::element_volume);
        next.rho[i] = project(rho + params.q * (ratio - mu_n), params);
    }
    return next;
}

StepResult step(const DensityField& state, const GridMesh& mesh, const BoundaryConditionSet& bcs,
                const OptParams& params, std::span<const double> warm_start,
                const SolveOptions& solver) {
    const LinearSystem system = assemble(mesh, state.rho, params.conductivity, bcs);
    Solution solution = solve(system, solver, warm_start);

    StepResult out;
    out.costs = element_cost(mesh, state.rho, params.conductivity, solution.temperature);
    out.mu = mu(out.costs, params);
    out.energy = quadratic_energy(system, solution.temperature);
    out.state = params.rule == UpdateRule::bang_bang
                    ? update_bang_bang(state, out.costs, out.mu, params)
                    : update_euler(state, out.costs, out.mu, params);
    out.state.iteration = state.iteration + 1;
    out.temperature = std::move(solution.temperature);
    out.solve_stats = solution.stats;
    return out;
}

RunTrace run(DensityField state, const GridMesh& mesh, const BoundaryConditionSet& bcs,
             const OptParams& params, const RunOptions& options) {
    params.validate(mesh.element_count());
    if (static_cast<int>(state.rho.size()) != mesh.element_count()) {
        throw std::invalid_argument("density field length does not match element count");
    }

    RunTrace trace;
    std::vector<double> previous_temperature;
    while (true) {
        StepResult result;
        try {
            result = step(state, mesh, bcs, params,
                          options.warm_start ? std::span<const double>(previous_temperature)
                                             : std::span<const double>(),
                          options.solver);
        } catch (const SolverFailure& e) {
            throw SolverFailure("optimizer step " + std::to_string(state.iteration + 1) + ": " + e.what(),
                                e.iterations(), e.residual());
        }
        if (options.on_step) {
            options.on_step(result);
        }

        double change = 0.0;
        for (std::size_t i = 0; i < state.rho.size(); ++i) {
            change = std::max(change, std::abs(result.state.rho[i] - state.rho[i]));
        }
        state = std::move(result.state);
        previous_temperature = std::move(result.temperature.values);

        trace.records.push_back({state.iteration,
                                 std::accumulate(result.costs.begin(), result.costs.end(), 0.0),
                                 std::accumulate(state.rho.begin(), state.rho.end(), 0.0),
                                 result.energy, result.solve_stats.iterations});

        const bool converged = change < 0.5 * params.theta;
        const bool done = converged || state.iteration >= params.max_iters;
        if (state.iteration % params.snapshot_stride == 0 || done) {
            trace.snapshots.push_back({state.iteration, state.rho});
        }
        if (done) {
            trace.termination = converged ? Termination::converged : Termination::max_iters;
            break;
        }
    }
    trace.final_state = std::move(state);
    return trace;
}

} // namespace heatgate
