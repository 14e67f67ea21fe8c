#include "heatgate/mesh.hpp"

#include <stdexcept>
#include <string>

namespace heatgate {

GridMesh::GridMesh(int nx, int ny) : nx_(nx), ny_(ny) {
    if (nx < 1 || ny < 1) {
        throw std::invalid_argument("grid dimensions must be positive, got " + std::to_string(nx) +
                                    "x" + std::to_string(ny));
    }
}

std::array<int, 4> GridMesh::element_nodes(int e) const noexcept {
    const auto [col, row] = element_coord(e);
    return {node(col, row), node(col + 1, row), node(col + 1, row + 1), node(col, row + 1)};
}

std::array<int, 2> GridMesh::face_nodes(int e, Face face) const noexcept {
    const auto n = element_nodes(e);
    const int a = static_cast<int>(face);
    return {n[a], n[(a + 1) % 4]};
}

GridMesh build_mesh(int nx, int ny) { return GridMesh(nx, ny); }

} // namespace heatgate
