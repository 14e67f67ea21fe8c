#pragma once

#include <array>

namespace heatgate {

// Local edges of a quad, numbered counterclockwise starting with the bottom edge (nodes 0-1).
enum class Face { bottom = 0, right = 1, top = 2, left = 3 };

struct ElementCoord {
    int col = 0;
    int row = 0;

    friend bool operator==(const ElementCoord&, const ElementCoord&) = default;
};

/// Regular nx by ny grid of unit square elements.
///
/// Nodes are numbered row-major from the lower-left corner, node(i, j) = j * (nx + 1) + i.
/// Elements are numbered the same way, element(col, row) = row * nx + col, and list
/// their nodes counterclockwise from the lower-left corner.
class GridMesh {
public:
    GridMesh(int nx, int ny);

    int nx() const noexcept { return nx_; }
    int ny() const noexcept { return ny_; }
    int node_count() const noexcept { return (nx_ + 1) * (ny_ + 1); }
    int element_count() const noexcept { return nx_ * ny_; }

    int node(int i, int j) const noexcept { return j * (nx_ + 1) + i; }
    int element(int col, int row) const noexcept { return row * nx_ + col; }
    int element(ElementCoord c) const noexcept { return element(c.col, c.row); }
    ElementCoord element_coord(int e) const noexcept { return {e % nx_, e / nx_}; }

    bool contains(ElementCoord c) const noexcept {
        return c.col >= 0 && c.col < nx_ && c.row >= 0 && c.row < ny_;
    }

    std::array<int, 4> element_nodes(int e) const noexcept;
    std::array<int, 2> face_nodes(int e, Face face) const noexcept;

    static constexpr double element_volume = 1.0;

private:
    int nx_;
    int ny_;
};

GridMesh build_mesh(int nx, int ny);

} // namespace heatgate
