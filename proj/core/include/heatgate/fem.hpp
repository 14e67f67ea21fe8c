#pragma once

#include "heatgate/mesh.hpp"

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace heatgate {

/// SIMP interpolation of the conductivity, k(rho) = k_min + (k_max - k_min) * rho^p.
struct ConductivityParams {
    double k_min = 0.009;
    double k_max = 1.0;
    double p = 2.0;

    void validate() const;
};

double element_conductivity(double rho, const ConductivityParams& params);

using ElementMatrix = std::array<std::array<double, 4>, 4>;

// Conduction matrix of the unit square bilinear element with k = 1 (2x2 Gauss rule).
const ElementMatrix& unit_conduction_matrix();

ElementMatrix element_stiffness(double k);

struct FaceFlux {
    int element = 0;
    Face face = Face::bottom;
    double flux = 0.0; // integrated over the unit face, positive = heat entering
};

/// Prescribed temperatures, face fluxes, volumetric source and an optional gauge pin.
///
/// Boundary not listed here is adiabatic. The gauge pin fixes one node to T = 0 and is
/// only meaningful for pure-Neumann problems.
class BoundaryConditionSet {
public:
    // Throws std::invalid_argument if the node already carries a different value.
    void set_temperature(int node, double value);
    void add_face_flux(int element, Face face, double flux);
    void set_source(std::vector<double> per_element);
    void set_gauge_node(int node) { gauge_node_ = node; }
    void clear_gauge_node() { gauge_node_.reset(); }

    const std::map<int, double>& dirichlet() const noexcept { return dirichlet_; }
    const std::vector<FaceFlux>& fluxes() const noexcept { return fluxes_; }
    std::span<const double> source() const noexcept { return source_; }
    std::optional<int> gauge_node() const noexcept { return gauge_node_; }

    void validate(const GridMesh& mesh) const;

private:
    std::map<int, double> dirichlet_;
    std::vector<FaceFlux> fluxes_;
    std::vector<double> source_;
    std::optional<int> gauge_node_;
};

// Equivalent nodal loads of the face fluxes and the source (length = node count).
std::vector<double> nodal_loads(const GridMesh& mesh, const BoundaryConditionSet& bcs);

// Lowest-indexed node that receives no flux load.
int default_gauge_node(const GridMesh& mesh, const BoundaryConditionSet& bcs);

/// Compressed-row symmetric matrix.
struct SparseMatrix {
    int rows = 0;
    std::vector<int> row_ptr;
    std::vector<int> col_idx;
    std::vector<double> values;

    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> diagonal() const;
    double at(int r, int c) const;
};

/// Global system K T = F together with the Dirichlet-reduced system on the free nodes.
struct LinearSystem {
    SparseMatrix stiffness;
    std::vector<double> load;

    std::vector<int> free_nodes;          // reduced index -> node
    std::vector<int> reduced_index;       // node -> reduced index, -1 when constrained
    std::vector<double> prescribed;       // node -> fixed value (0 on free nodes)

    SparseMatrix reduced_stiffness;
    std::vector<double> reduced_load;

    // Node-grid shape, used by the multigrid preconditioner.
    int grid_nodes_x = 0;
    int grid_nodes_y = 0;

    int unknowns() const noexcept { return static_cast<int>(free_nodes.size()); }
};

LinearSystem assemble(const GridMesh& mesh, std::span<const double> densities,
                      const ConductivityParams& params, const BoundaryConditionSet& bcs);

struct TemperatureField {
    std::vector<double> values;
};

enum class Preconditioner { jacobi, multigrid };

std::string_view to_string(Preconditioner p);
Preconditioner parse_preconditioner(std::string_view text);

struct SolveOptions {
    double relative_tolerance = 1e-10;
    int max_iterations = 0; // 0 selects 10 * unknowns
    Preconditioner preconditioner = Preconditioner::multigrid;
};

struct SolveStats {
    int iterations = 0;
    double relative_residual = 0.0;
};

struct Solution {
    TemperatureField temperature;
    SolveStats stats;
};

/// Preconditioned conjugate gradients on the reduced system.
///
/// `initial_guess`, when non-empty, is a full node vector used as the starting iterate.
/// Throws SolverFailure if the relative residual does not reach the tolerance.
Solution solve(const LinearSystem& system, const SolveOptions& options = {},
               std::span<const double> initial_guess = {});

// Per-element cost C_i = integral of grad T . k_i grad T over the element.
std::vector<double> element_cost(const GridMesh& mesh, std::span<const double> densities,
                                 const ConductivityParams& params, const TemperatureField& t);

// T^T K T over the full node vector.
double quadratic_energy(const LinearSystem& system, const TemperatureField& t);

} // namespace heatgate
