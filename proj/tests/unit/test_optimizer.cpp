#include "heatgate/errors.hpp"
#include "heatgate/fem.hpp"
#include "heatgate/optimizer.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <string>

using namespace heatgate;

namespace {

DensityField field(std::vector<double> rho) { return {std::move(rho), 0}; }

// Small temperature-driven problem: a hot element and a cold element.
struct SmallProblem {
    GridMesh mesh{24, 18};
    BoundaryConditionSet bcs;
    OptParams params;

    SmallProblem() {
        for (int n : mesh.element_nodes(mesh.element(5, 12))) {
            bcs.set_temperature(n, 100.0);
        }
        for (int n : mesh.element_nodes(mesh.element(18, 4))) {
            bcs.set_temperature(n, 0.0);
        }
        params.mass = 60.0;
        params.max_iters = 60;
    }
};

bool is_quantized(double rho, const OptParams& p) {
    if (rho == p.rho_min || rho == p.rho_max) {
        return true;
    }
    const double m = (rho - p.rho_min) / p.theta;
    return std::abs(rho - p.rho_min - std::round(m) * p.theta) < 1e-12;
}

} // namespace

TEST_SUITE("optimizer") {
    TEST_CASE("mu is total cost over mass") {
        OptParams p;
        p.mass = 2000.0;
        CHECK(mu(std::vector<double>(5, 0.0), p) == 0.0);
        CHECK(mu(std::vector<double>{1000.0, 3000.0}, p) == 2.0);
        p.mass = 0.0;
        CHECK_THROWS_AS(mu(std::vector<double>{1.0}, p), std::invalid_argument);
    }

    TEST_CASE("projection clamps to the box") {
        const OptParams p;
        CHECK(project(1.02, p) == 1.0);
        CHECK(project(0.5, p) == 0.5);
        CHECK(project(-0.02, p) == 0.01);
    }

    TEST_CASE("bang-bang steps up when the ratio exceeds mu") {
        const OptParams p;
        // C / rho = 0.05 / 0.01 = 5 > mu = 2
        const auto next = update_bang_bang(field({0.01}), std::vector<double>{0.05}, 2.0, p);
        CHECK(next.rho[0] == doctest::Approx(0.04).epsilon(1e-15));
    }

    TEST_CASE("bang-bang steps down and clamps at the floor") {
        const OptParams p;
        const auto next = update_bang_bang(field({0.01}), std::vector<double>{0.0}, 1.5, p);
        CHECK(next.rho[0] == 0.01);
    }

    TEST_CASE("ratio equal to mu takes the up branch") {
        const OptParams p;
        // C / rho = 1 / 0.5 = 2 exactly
        const auto next = update_bang_bang(field({0.5}), std::vector<double>{1.0}, 2.0, p);
        CHECK(next.rho[0] == 0.5 + 0.03);
    }

    TEST_CASE("elements without heat flow do not grow when mu is zero") {
        const OptParams p;
        const auto next = update_bang_bang(field({0.01, 0.3}), std::vector<double>{0.0, 0.0}, 0.0, p);
        CHECK(next.rho[0] == 0.01);
        CHECK(next.rho[1] == doctest::Approx(0.27).epsilon(1e-15));
    }

    TEST_CASE("Euler update follows the cost gradient") {
        const OptParams p;
        // 0.5 + 0.01 * (3 - 1)
        auto next = update_euler(field({0.5}), std::vector<double>{1.5}, 1.0, p);
        CHECK(next.rho[0] == doctest::Approx(0.52).epsilon(1e-14));

        next = update_euler(field({0.2, 0.4}), std::vector<double>{0.2, 0.4}, 1.0, p);
        CHECK(next.rho == std::vector<double>{0.2, 0.4});

        // 0.99 + 0.01 * (7 - 1) = 1.05
        next = update_euler(field({0.99}), std::vector<double>{6.93}, 1.0, p);
        CHECK(next.rho[0] == 1.0);
    }

    TEST_CASE("misaligned cost fields are rejected") {
        const OptParams p;
        CHECK_THROWS_AS(update_bang_bang(field({0.1, 0.2}), std::vector<double>{1.0}, 0.0, p),
                        std::invalid_argument);
        CHECK_THROWS_AS(update_euler(field({0.1}), std::vector<double>{1.0, 2.0}, 0.0, p),
                        std::invalid_argument);
    }

    TEST_CASE("parameter validation names the field") {
        auto message = [](OptParams p) {
            try {
                p.validate(100);
            } catch (const std::invalid_argument& e) {
                return std::string(e.what());
            }
            return std::string();
        };
        OptParams p;
        p.mass = 50.0;
        CHECK(message(p).empty());

        auto bad = p;
        bad.rho_min = 0.0;
        CHECK(message(bad).rfind("rho_min", 0) == 0);
        bad = p;
        bad.rho_max = 1.5;
        CHECK(message(bad).rfind("rho_max", 0) == 0);
        bad = p;
        bad.theta = 0.0;
        CHECK(message(bad).rfind("theta", 0) == 0);
        bad = p;
        bad.mass = 101.0;
        CHECK(message(bad).rfind("mass", 0) == 0);
        bad = p;
        bad.max_iters = 0;
        CHECK(message(bad).rfind("max_iters", 0) == 0);
        bad = p;
        bad.conductivity.p = 1.0;
        CHECK(message(bad).find("p") != std::string::npos);
    }

    TEST_CASE("initial state is uniform rho_min") {
        const OptParams p;
        const auto s = initial_density(build_mesh(4, 3), p);
        CHECK(s.iteration == 0);
        CHECK(s.rho == std::vector<double>(12, 0.01));
    }

    TEST_CASE("step with zero stimulus leaves the field unchanged") {
        const auto mesh = build_mesh(20, 20);
        BoundaryConditionSet bcs;
        for (int n : mesh.element_nodes(mesh.element(5, 5))) {
            bcs.set_temperature(n, 0.0);
        }
        for (int n : mesh.element_nodes(mesh.element(14, 14))) {
            bcs.set_temperature(n, 0.0);
        }
        OptParams p;
        p.mass = 50.0;
        auto state = initial_density(mesh, p);
        for (int i = 0; i < 5; ++i) {
            const auto r = step(state, mesh, bcs, p);
            CHECK(r.mu == 0.0);
            CHECK(r.state.rho == state.rho);
            CHECK(r.state.iteration == state.iteration + 1);
            state = r.state;
        }
    }

    TEST_CASE("mu is positive whenever heat flows") {
        SmallProblem sp;
        const auto r = step(initial_density(sp.mesh, sp.params), sp.mesh, sp.bcs, sp.params);
        const double total = std::accumulate(r.costs.begin(), r.costs.end(), 0.0);
        CHECK(total > 0.0);
        CHECK(r.mu == doctest::Approx(total / sp.params.mass).epsilon(1e-15));
        CHECK(r.mu > 0.0);
    }
}

TEST_SUITE("run") {
    TEST_CASE("box bounds and quantization hold after every step") {
        SmallProblem sp;
        int steps = 0;
        RunOptions options;
        options.on_step = [&](const StepResult& r) {
            ++steps;
            for (double rho : r.state.rho) {
                REQUIRE(rho >= sp.params.rho_min);
                REQUIRE(rho <= sp.params.rho_max);
                REQUIRE(is_quantized(rho, sp.params));
            }
        };
        const auto trace = run(initial_density(sp.mesh, sp.params), sp.mesh, sp.bcs, sp.params, options);
        CHECK(steps == static_cast<int>(trace.records.size()));
        CHECK(steps > 1);
    }

    TEST_CASE("Euler rule also respects the box") {
        SmallProblem sp;
        sp.params.rule = UpdateRule::euler;
        sp.params.q = 0.05;
        sp.params.max_iters = 20;
        const auto trace = run(initial_density(sp.mesh, sp.params), sp.mesh, sp.bcs, sp.params);
        for (const auto& snap : trace.snapshots) {
            for (double rho : snap.rho) {
                CHECK(rho >= sp.params.rho_min);
                CHECK(rho <= sp.params.rho_max);
            }
        }
    }

    TEST_CASE("compliance identity holds on every solve") {
        SmallProblem sp;
        sp.params.max_iters = 25;
        RunOptions options;
        options.on_step = [&](const StepResult& r) {
            const double total = std::accumulate(r.costs.begin(), r.costs.end(), 0.0);
            CHECK(std::abs(total - r.energy) <= 1e-6 * r.energy);
        };
        run(initial_density(sp.mesh, sp.params), sp.mesh, sp.bcs, sp.params, options);
    }

    TEST_CASE("two runs are bit-identical") {
        SmallProblem sp;
        const auto a = run(initial_density(sp.mesh, sp.params), sp.mesh, sp.bcs, sp.params);
        const auto b = run(initial_density(sp.mesh, sp.params), sp.mesh, sp.bcs, sp.params);
        CHECK(a.final_state.rho == b.final_state.rho);
        REQUIRE(a.records.size() == b.records.size());
        for (std::size_t i = 0; i < a.records.size(); ++i) {
            CHECK(a.records[i].total_cost == b.records[i].total_cost);
            CHECK(a.records[i].total_mass == b.records[i].total_mass);
        }
    }

    TEST_CASE("trace iterations increase and snapshots follow the stride") {
        SmallProblem sp;
        sp.params.max_iters = 35;
        sp.params.snapshot_stride = 10;
        const auto trace = run(initial_density(sp.mesh, sp.params), sp.mesh, sp.bcs, sp.params);
        for (std::size_t i = 0; i < trace.records.size(); ++i) {
            CHECK(trace.records[i].iteration == static_cast<int>(i) + 1);
        }
        REQUIRE(trace.termination == Termination::max_iters);
        REQUIRE(trace.snapshots.size() == 4);
        CHECK(trace.snapshots[0].iteration == 10);
        CHECK(trace.snapshots[2].iteration == 30);
        CHECK(trace.snapshots[3].iteration == 35);
        CHECK(trace.snapshots[3].rho == trace.final_state.rho);
        CHECK(trace.final_state.iteration == 35);
    }

    TEST_CASE("zero stimulus converges at the first iteration") {
        const auto mesh = build_mesh(16, 16);
        BoundaryConditionSet bcs;
        bcs.set_temperature(mesh.node(3, 3), 0.0);
        bcs.set_temperature(mesh.node(12, 12), 0.0);
        OptParams p;
        p.mass = 40.0;
        const auto trace = run(initial_density(mesh, p), mesh, bcs, p);
        CHECK(trace.termination == Termination::converged);
        CHECK(trace.final_state.iteration == 1);
        CHECK(trace.final_state.rho == std::vector<double>(mesh.element_count(), p.rho_min));
        REQUIRE(trace.snapshots.size() == 1);
        CHECK(trace.snapshots[0].iteration == 1);
    }

    TEST_CASE("solver failures report the optimizer step") {
        SmallProblem sp;
        RunOptions options;
        options.solver.max_iterations = 1;
        options.solver.preconditioner = Preconditioner::jacobi;
        try {
            run(initial_density(sp.mesh, sp.params), sp.mesh, sp.bcs, sp.params, options);
            FAIL("expected SolverFailure");
        } catch (const SolverFailure& e) {
            CHECK(std::string(e.what()).find("optimizer step 1") != std::string::npos);
        }
    }

    TEST_CASE("invalid parameters are rejected before any solve") {
        SmallProblem sp;
        sp.params.theta = -1.0;
        CHECK_THROWS_AS(run(initial_density(sp.mesh, sp.params), sp.mesh, sp.bcs, sp.params),
                        std::invalid_argument);
    }
}
