#pragma once

#include <cstdint>
#include <vector>

#include "gravjet/flux_algebra.hpp"
#include "gravjet/geometry.hpp"

namespace gravjet {

enum class NodeClass : std::uint8_t { Exterior, Interior, Dirichlet };

// Node-classified Cartesian grid over the truncated domain. Columns are
// anchored at x = -mu and x = +mu exactly and the orifice level y = H lies on
// a row (the requested spacings are nudged to make that so; the actual
// spacings are stored here).
struct Grid {
    TruncatedDomain dom;
    int nx = 0, ny = 0;
    double dx = 0.0, dy = 0.0;
    std::vector<double> xs, ys;
    std::vector<NodeClass> cls;
    std::vector<SegmentId> seg;
    std::vector<std::uint8_t> cell_active; // (nx-1) x (ny-1)
    int j_orifice = 0;                     // row index of y = H
    std::size_t n_interior = 0, n_dirichlet = 0;

    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
    std::size_t cidx(int i, int j) const { return static_cast<std::size_t>(j) * (nx - 1) + i; }
    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
    bool active(int i, int j) const { return cls[idx(i, j)] != NodeClass::Exterior; }
};

Grid build_grid(const TruncatedDomain& dom, double dx, double dy);

// The Dirichlet data Psi on the boundary segments: 0 on wall1/lid1, Q on
// wall2/lid2, Q1 on the ground, the clamped linear sheet profiles on the two
// outflow sides and the linear channel profile on the inflow side. Entries at
// non-Dirichlet nodes are 0.
std::vector<double> boundary_values(const Grid& grid, const DownstreamState& s,
                                    double Q, double g);

} // namespace gravjet
