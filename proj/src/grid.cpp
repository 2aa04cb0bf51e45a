#include "gravjet/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gravjet {

namespace {

double dist_point_segment(double px, double py, double ax, double ay, double bx, double by) {
    const double vx = bx - ax, vy = by - ay;
    const double L2 = vx * vx + vy * vy;
    double t = L2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / L2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = px - (ax + t * vx), dy = py - (ay + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

double dist_polyline(double px, double py, const std::vector<std::pair<double, double>>& poly) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < poly.size(); ++k)
        best = std::min(best, dist_point_segment(px, py, poly[k].first, poly[k].second,
                                                 poly[k + 1].first, poly[k + 1].second));
    return best;
}

int segment_priority(SegmentId s) {
    switch (s) {
        case SegmentId::Wall1:
        case SegmentId::Wall2:
        case SegmentId::Ground: return 0;
        case SegmentId::Lid1:
        case SegmentId::Lid2: return 1;
        default: return 2;
    }
}

} // namespace

Grid build_grid(const TruncatedDomain& dom, double dx, double dy) {
    if (!(dx > 0.0) || !(dy > 0.0))
        throw ResolutionTooCoarse("dx and dy must be positive");
    if (2.0 / dx < 8.0 - 1e-12)
        throw ResolutionTooCoarse("orifice must span at least 8 cells");

    Grid g;
    g.dom = dom;
    const double H = dom.geom.H;

    // Fit the spacings so x = +-mu are columns and y = 0, H are rows.
    const int ncx = std::max(1, static_cast<int>(std::lround(2.0 * dom.mu / dx)));
    g.dx = 2.0 * dom.mu / ncx;
    const int ncy_below = std::max(1, static_cast<int>(std::lround(H / dy)));
    g.dy = H / ncy_below;
    g.nx = ncx + 1;
    g.j_orifice = ncy_below;
    const int ny_above = static_cast<int>(std::ceil((dom.H2mu - H) / g.dy - 1e-12));
    g.ny = ncy_below + ny_above + 1;

    g.xs.resize(g.nx);
    for (int i = 0; i < g.nx; ++i) g.xs[i] = -dom.mu + i * g.dx;
    g.xs.front() = -dom.mu;
    g.xs.back() = dom.mu;
    for (int i = 0; i < g.nx; ++i) {
        if (std::abs(g.xs[i] + 1.0) < 1e-9 * g.dx) g.xs[i] = -1.0;
        if (std::abs(g.xs[i] - 1.0) < 1e-9 * g.dx) g.xs[i] = 1.0;
    }
    g.ys.resize(g.ny);
    for (int j = 0; j < g.ny; ++j) g.ys[j] = j * g.dy;
    g.ys.front() = 0.0;
    g.ys[g.j_orifice] = H;

    g.cls.assign(g.size(), NodeClass::Exterior);
    g.seg.assign(g.size(), SegmentId::None);

    // Pass 1: raw inside/outside of the closed domain.
    std::vector<std::uint8_t> in(g.size(), 0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            in[g.idx(i, j)] = dom.inside_closed(g.xs[i], g.ys[j]) ? 1 : 0;

    // Pass 2: structural boundary nodes, then inside nodes adjacent to outside.
    auto set_dir = [&](int i, int j, SegmentId s) {
        g.cls[g.idx(i, j)] = NodeClass::Dirichlet;
        g.seg[g.idx(i, j)] = s;
    };
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (!in[g.idx(i, j)]) continue;
            const double x = g.xs[i], y = g.ys[j];
            if (j == 0) {
                set_dir(i, j, SegmentId::Ground);
            } else if (j == g.j_orifice && x <= -1.0) {
                set_dir(i, j, x == -1.0 ? SegmentId::Wall1 : SegmentId::Lid1);
            } else if (j == g.j_orifice && x >= 1.0) {
                set_dir(i, j, x == 1.0 ? SegmentId::Wall2 : SegmentId::Lid2);
            } else if (i == 0 && y < H) {
                set_dir(i, j, SegmentId::Sigma1);
            } else if (i == 0 && y >= dom.H1mu - 1e-12) {
                set_dir(i, j, SegmentId::SigmaIn);
            } else if (i == g.nx - 1 && y < H) {
                set_dir(i, j, SegmentId::Sigma2);
            } else {
                g.cls[g.idx(i, j)] = NodeClass::Interior; // provisional
            }
        }
    }
    // Wall polylines for distance queries during snapping.
    const double step = std::min(g.dx, g.dy) * 0.5;
    auto w1 = dom.geom.g1.polyline(dom.H1mu, step);
    auto w2 = dom.geom.g2.polyline(dom.H2mu, step);
    for (int j = 1; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (g.cls[g.idx(i, j)] != NodeClass::Interior) continue;
            const bool edge = i == 0 || i == g.nx - 1 || j == g.ny - 1;
            bool boundary = edge;
            if (!boundary)
                boundary = !in[g.idx(i - 1, j)] || !in[g.idx(i + 1, j)] ||
                           !in[g.idx(i, j - 1)] || !in[g.idx(i, j + 1)];
            if (!boundary) continue;
            // Snap to the nearest boundary segment; walls and lids win ties.
            const double x = g.xs[i], y = g.ys[j];
            struct Cand { SegmentId s; double d; };
            Cand cands[] = {
                {SegmentId::Wall1, dist_polyline(x, y, w1)},
                {SegmentId::Wall2, dist_polyline(x, y, w2)},
                {SegmentId::Lid1, dist_point_segment(x, y, -dom.mu, H, -1.0, H)},
                {SegmentId::Lid2, dist_point_segment(x, y, 1.0, H, dom.mu, H)},
                {SegmentId::Ground, dist_point_segment(x, y, -dom.mu, 0, dom.mu, 0)},
                {SegmentId::Sigma1, dist_point_segment(x, y, -dom.mu, 0, -dom.mu, H)},
                {SegmentId::Sigma2, dist_point_segment(x, y, dom.mu, 0, dom.mu, H)},
                {SegmentId::SigmaIn, dist_point_segment(x, y, -dom.mu, dom.H1mu, -dom.mu, dom.H2mu)},
            };
            SegmentId best = SegmentId::Wall1;
            double bd = std::numeric_limits<double>::infinity();
            for (const auto& c : cands) {
                if (c.d < bd - 1e-12 ||
                    (c.d < bd + 1e-12 && segment_priority(c.s) < segment_priority(best))) {
                    best = c.s;
                    bd = c.d;
                }
            }
            set_dir(i, j, best);
        }
    }

    g.cell_active.assign(static_cast<std::size_t>(g.nx - 1) * (g.ny - 1), 0);
    for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i)
            g.cell_active[g.cidx(i, j)] =
                g.active(i, j) && g.active(i + 1, j) && g.active(i, j + 1) && g.active(i + 1, j + 1);

    g.n_interior = g.n_dirichlet = 0;
    for (auto c : g.cls) {
        if (c == NodeClass::Interior) ++g.n_interior;
        if (c == NodeClass::Dirichlet) ++g.n_dirichlet;
    }
    return g;
}

std::vector<double> boundary_values(const Grid& grid, const DownstreamState& s,
                                    double Q, double g) {
    const double slope1 = std::sqrt(std::max(2.0 * s.lambda - 2.0 * g * s.h1, 0.0));
    const double slope2 = std::sqrt(std::max(2.0 * s.lambda - 2.0 * g * s.h2, 0.0));
    const double H1mu = grid.dom.H1mu, H2mu = grid.dom.H2mu;
    std::vector<double> val(grid.size(), 0.0);
    for (int j = 0; j < grid.ny; ++j) {
        const double y = grid.ys[j];
        for (int i = 0; i < grid.nx; ++i) {
            const auto n = grid.idx(i, j);
            if (grid.cls[n] != NodeClass::Dirichlet) continue;
            switch (grid.seg[n]) {
                case SegmentId::Wall1:
                case SegmentId::Lid1: val[n] = 0.0; break;
                case SegmentId::Wall2:
                case SegmentId::Lid2: val[n] = Q; break;
                case SegmentId::Ground: val[n] = s.Q1; break;
                case SegmentId::Sigma1: val[n] = std::max(-slope1 * y + s.Q1, 0.0); break;
                case SegmentId::Sigma2: val[n] = std::min(slope2 * y + s.Q1, Q); break;
                case SegmentId::SigmaIn:
                    val[n] = std::clamp((y - H1mu) * Q / (H2mu - H1mu), 0.0, Q);
                    break;
                default: val[n] = 0.0; break;
            }
        }
    }
    return val;
}

} // namespace gravjet
