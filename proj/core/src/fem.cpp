#include "heatgate/fem.hpp"

#include "heatgate/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace heatgate {

namespace {

struct GaussPoint {
    double x;
    double y;
    double weight;
};

// 2x2 Gauss rule mapped onto the unit square.
std::array<GaussPoint, 4> gauss_points() {
    const double a = 0.5 - 0.5 / std::sqrt(3.0);
    const double b = 0.5 + 0.5 / std::sqrt(3.0);
    return {{{a, a, 0.25}, {b, a, 0.25}, {b, b, 0.25}, {a, b, 0.25}}};
}

// Gradients of the four bilinear shape functions at (x, y) on the unit square.
std::array<std::array<double, 2>, 4> shape_gradients(double x, double y) {
    return {{{-(1.0 - y), -(1.0 - x)}, {1.0 - y, -x}, {y, x}, {-y, 1.0 - x}}};
}

ElementMatrix integrate_unit_matrix() {
    ElementMatrix ke{};
    for (const auto& gp : gauss_points()) {
        const auto g = shape_gradients(gp.x, gp.y);
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) {
                ke[a][b] += gp.weight * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
            }
        }
    }
    return ke;
}

// Sparsity of the global matrix: each node couples with its (up to) 9 grid neighbours.
SparseMatrix grid_pattern(const GridMesh& mesh) {
    SparseMatrix m;
    m.rows = mesh.node_count();
    m.row_ptr.reserve(m.rows + 1);
    m.row_ptr.push_back(0);
    m.col_idx.reserve(static_cast<std::size_t>(m.rows) * 9);
    for (int j = 0; j <= mesh.ny(); ++j) {
        for (int i = 0; i <= mesh.nx(); ++i) {
            for (int dj = -1; dj <= 1; ++dj) {
                for (int di = -1; di <= 1; ++di) {
                    const int ii = i + di;
                    const int jj = j + dj;
                    if (ii >= 0 && ii <= mesh.nx() && jj >= 0 && jj <= mesh.ny()) {
                        m.col_idx.push_back(mesh.node(ii, jj));
                    }
                }
            }
            m.row_ptr.push_back(static_cast<int>(m.col_idx.size()));
        }
    }
    m.values.assign(m.col_idx.size(), 0.0);
    return m;
}

int find_entry(const SparseMatrix& m, int r, int c) {
    for (int k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
        if (m.col_idx[k] == c) {
            return k;
        }
    }
    return -1;
}

} // namespace

void ConductivityParams::validate() const {
    if (!(k_min > 0.0) || !(k_min < k_max)) {
        throw std::invalid_argument("conductivity bounds must satisfy 0 < k_min < k_max");
    }
    if (!(p > 1.0)) {
        throw std::invalid_argument("penalization exponent p must exceed 1");
    }
}

double element_conductivity(double rho, const ConductivityParams& params) {
    if (!(rho >= 0.0 && rho <= 1.0)) {
        throw std::invalid_argument("density " + std::to_string(rho) + " outside [0, 1]");
    }
    return params.k_min + (params.k_max - params.k_min) * std::pow(rho, params.p);
}

const ElementMatrix& unit_conduction_matrix() {
    static const ElementMatrix ke = integrate_unit_matrix();
    return ke;
}

ElementMatrix element_stiffness(double k) {
    if (!(k > 0.0)) {
        throw std::invalid_argument("element conductivity must be positive");
    }
    ElementMatrix ke = unit_conduction_matrix();
    for (auto& row : ke) {
        for (auto& v : row) {
            v *= k;
        }
    }
    return ke;
}

void BoundaryConditionSet::set_temperature(int node, double value) {
    const auto [it, inserted] = dirichlet_.emplace(node, value);
    if (!inserted && it->second != value) {
        throw std::invalid_argument("node " + std::to_string(node) +
                                    " already carries a different prescribed temperature");
    }
}

void BoundaryConditionSet::add_face_flux(int element, Face face, double flux) {
    fluxes_.push_back({element, face, flux});
}

void BoundaryConditionSet::set_source(std::vector<double> per_element) {
    source_ = std::move(per_element);
}

void BoundaryConditionSet::validate(const GridMesh& mesh) const {
    for (const auto& [node, value] : dirichlet_) {
        if (node < 0 || node >= mesh.node_count()) {
            throw std::invalid_argument("Dirichlet node " + std::to_string(node) + " outside mesh");
        }
        if (!std::isfinite(value)) {
            throw std::invalid_argument("non-finite prescribed temperature");
        }
    }
    for (const auto& f : fluxes_) {
        if (f.element < 0 || f.element >= mesh.element_count()) {
            throw std::invalid_argument("flux face on element " + std::to_string(f.element) +
                                        " outside mesh");
        }
    }
    if (!source_.empty() && static_cast<int>(source_.size()) != mesh.element_count()) {
        throw std::invalid_argument("source length does not match element count");
    }
    if (gauge_node_ && (*gauge_node_ < 0 || *gauge_node_ >= mesh.node_count())) {
        throw std::invalid_argument("gauge node outside mesh");
    }
}

std::vector<double> nodal_loads(const GridMesh& mesh, const BoundaryConditionSet& bcs) {
    std::vector<double> f(mesh.node_count(), 0.0);
    for (const auto& flux : bcs.fluxes()) {
        for (int n : mesh.face_nodes(flux.element, flux.face)) {
            f[n] += 0.5 * flux.flux;
        }
    }
    const auto source = bcs.source();
    for (std::size_t e = 0; e < source.size(); ++e) {
        for (int n : mesh.element_nodes(static_cast<int>(e))) {
            f[n] += 0.25 * source[e] * GridMesh::element_volume;
        }
    }
    return f;
}

int default_gauge_node(const GridMesh& mesh, const BoundaryConditionSet& bcs) {
    std::vector<char> loaded(mesh.node_count(), 0);
    for (const auto& flux : bcs.fluxes()) {
        for (int n : mesh.face_nodes(flux.element, flux.face)) {
            loaded[n] = 1;
        }
    }
    const auto it = std::find(loaded.begin(), loaded.end(), 0);
    return static_cast<int>(it - loaded.begin());
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    for (int r = 0; r < rows; ++r) {
        double s = 0.0;
        for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
            s += values[k] * x[col_idx[k]];
        }
        y[r] = s;
    }
}

std::vector<double> SparseMatrix::diagonal() const {
    std::vector<double> d(rows, 0.0);
    for (int r = 0; r < rows; ++r) {
        const int k = find_entry(*this, r, r);
        d[r] = k < 0 ? 0.0 : values[k];
    }
    return d;
}

double SparseMatrix::at(int r, int c) const {
    const int k = find_entry(*this, r, c);
    return k < 0 ? 0.0 : values[k];
}

LinearSystem assemble(const GridMesh& mesh, std::span<const double> densities,
                      const ConductivityParams& params, const BoundaryConditionSet& bcs) {
    if (static_cast<int>(densities.size()) != mesh.element_count()) {
        throw std::invalid_argument("density field length does not match element count");
    }
    params.validate();
    bcs.validate(mesh);

    LinearSystem sys;
    sys.stiffness = grid_pattern(mesh);
    const auto& k0 = unit_conduction_matrix();
    for (int e = 0; e < mesh.element_count(); ++e) {
        const double k = element_conductivity(densities[e], params);
        const auto nodes = mesh.element_nodes(e);
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) {
                sys.stiffness.values[find_entry(sys.stiffness, nodes[a], nodes[b])] += k * k0[a][b];
            }
        }
    }
    sys.load = nodal_loads(mesh, bcs);

    std::map<int, double> fixed = bcs.dirichlet();
    if (fixed.empty()) {
        const double net = std::accumulate(sys.load.begin(), sys.load.end(), 0.0);
        double gross = 0.0;
        for (double v : sys.load) {
            gross += std::abs(v);
        }
        if (std::abs(net) > 1e-9 * gross) {
            throw IllPosedProblem("pure-Neumann problem with unbalanced net flux " +
                                  std::to_string(net));
        }
        if (!bcs.gauge_node()) {
            throw SingularSystem("no Dirichlet nodes and no gauge pin: constant null space");
        }
        fixed.emplace(*bcs.gauge_node(), 0.0);
    }

    const int n = mesh.node_count();
    sys.prescribed.assign(n, 0.0);
    sys.reduced_index.assign(n, -1);
    for (const auto& [node, value] : fixed) {
        sys.prescribed[node] = value;
    }
    for (int node = 0; node < n; ++node) {
        if (!fixed.contains(node)) {
            sys.reduced_index[node] = static_cast<int>(sys.free_nodes.size());
            sys.free_nodes.push_back(node);
        }
    }

    auto& kr = sys.reduced_stiffness;
    const auto& kf = sys.stiffness;
    kr.rows = sys.unknowns();
    kr.row_ptr.reserve(kr.rows + 1);
    kr.row_ptr.push_back(0);
    sys.reduced_load.resize(kr.rows);
    for (int r = 0; r < kr.rows; ++r) {
        const int node = sys.free_nodes[r];
        double rhs = sys.load[node];
        for (int k = kf.row_ptr[node]; k < kf.row_ptr[node + 1]; ++k) {
            const int c = kf.col_idx[k];
            const int rc = sys.reduced_index[c];
            if (rc < 0) {
                rhs -= kf.values[k] * sys.prescribed[c];
            } else {
                kr.col_idx.push_back(rc);
                kr.values.push_back(kf.values[k]);
            }
        }
        kr.row_ptr.push_back(static_cast<int>(kr.col_idx.size()));
        sys.reduced_load[r] = rhs;
    }
    sys.grid_nodes_x = mesh.nx() + 1;
    sys.grid_nodes_y = mesh.ny() + 1;
    return sys;
}

std::vector<double> element_cost(const GridMesh& mesh, std::span<const double> densities,
                                 const ConductivityParams& params, const TemperatureField& t) {
    if (static_cast<int>(densities.size()) != mesh.element_count() ||
        static_cast<int>(t.values.size()) != mesh.node_count()) {
        throw std::invalid_argument("field lengths do not match the mesh");
    }
    static const auto points = gauss_points();

    std::vector<double> cost(mesh.element_count());
    for (int e = 0; e < mesh.element_count(); ++e) {
        const auto nodes = mesh.element_nodes(e);
        const double k = element_conductivity(densities[e], params);
        const std::array<double, 4> t0{t.values[nodes[0]], t.values[nodes[1]], t.values[nodes[2]],
                                       t.values[nodes[3]]};
        double mean = 0.0;
        for (int q = 0; q < 4; ++q) {
            const double x = points[q].x;
            const double y = points[q].y;
            const double gx = (1.0 - y) * (t0[1] - t0[0]) + y * (t0[2] - t0[3]);
            const double gy = (1.0 - x) * (t0[3] - t0[0]) + x * (t0[2] - t0[1]);
            mean += points[q].weight * k * (gx * gx + gy * gy);
        }
        cost[e] = mean * GridMesh::element_volume;
    }
    return cost;
}

double quadratic_energy(const LinearSystem& system, const TemperatureField& t) {
    // Rows of K sum to zero, so T^T K T = -1/2 sum_{r != c} K_rc (T_r - T_c)^2.
    const auto& k = system.stiffness;
    double s = 0.0;
    for (int r = 0; r < k.rows; ++r) {
        for (int i = k.row_ptr[r]; i < k.row_ptr[r + 1]; ++i) {
            const int c = k.col_idx[i];
            if (c != r) {
                const double d = t.values[r] - t.values[c];
                s -= k.values[i] * d * d;
            }
        }
    }
    return 0.5 * s;
}

} // namespace heatgate
