#include "gravjet/freeboundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gravjet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Crossing of psi = level along row j, scanning all columns. Returns false if
// the row never crosses; throws NonGraph on multiple crossings.
bool row_crossing(const StreamField& f, int j, double level, bool upward,
                  double& x_out, int& i_wet_out) {
    const Grid& g = *f.grid;
    int count = 0;
    for (int i = 0; i + 1 < g.nx; ++i) {
        const double a = f.psi[g.idx(i, j)], b = f.psi[g.idx(i + 1, j)];
        const bool cross = upward ? (a <= level && level < b) : (a > level && level >= b);
        const bool anti = upward ? (a > level && level >= b) : (a <= level && level < b);
        if (cross) {
            ++count;
            if (count > 1) throw NonGraph("multiple level crossings in one row");
            const double t = (b == a) ? 0.0 : (level - a) / (b - a);
            x_out = g.xs[i] + t * g.dx;
            i_wet_out = upward ? i : i + 1;
        } else if (anti) {
            throw NonGraph("level set is not a graph on this row");
        }
    }
    return count == 1;
}

void finish_curve(BoundaryCurve& c, const StreamField& f, bool left) {
    const Grid& g = *f.grid;
    const double H = g.dom.geom.H;
    c.status = c.y.empty() ? BoundaryStatus::NoSamples : BoundaryStatus::Ok;

    // Detachment: linear extrapolation to y = H from the two highest samples
    // at or below H - dy (the rows nearer the lid mix wall and free boundary).
    int b = -1;
    for (int k = static_cast<int>(c.y.size()) - 1; k >= 0; --k) {
        if (c.y[k] <= H - g.dy + 1e-12) { b = k; break; }
    }
    if (b >= 1) {
        const double ya = c.y[b - 1], yb = c.y[b];
        const double xa = c.x[b - 1], xb = c.x[b];
        c.detach = xb + (xb - xa) / (yb - ya) * (H - yb);
    } else {
        c.detach = left ? -kInf : kInf;
    }

    // Far-field height: average the sample heights on the near-horizontal tail
    // in the outer third of the window.
    const double third = 2.0 * g.dom.mu / 3.0;
    double acc = 0.0;
    int n = 0;
    for (std::size_t k = 0; k + 1 < c.y.size(); ++k) {
        if (std::abs(c.x[k]) < third || std::abs(c.x[k + 1]) < third) continue;
        const double slope = std::abs((c.x[k + 1] - c.x[k]) / (c.y[k + 1] - c.y[k]));
        if (slope > 10.0) {
            acc += 0.5 * (c.y[k] + c.y[k + 1]);
            ++n;
        }
    }
    if (n > 0) {
        c.asymptote = acc / n;
        return;
    }
    // Horizontal boundary (row-constant field): scan a column in the outer
    // third vertically instead.
    const double xq = (left ? -1.0 : 1.0) * 5.0 * g.dom.mu / 6.0;
    int iq = static_cast<int>(std::lround((xq - g.xs[0]) / g.dx));
    iq = std::clamp(iq, 1, g.nx - 2);
    const double level = c.level_used;
    c.asymptote = kNaN;
    for (int j = 0; j + 1 <= g.j_orifice && j + 1 < g.ny; ++j) {
        const double a = f.psi[g.idx(iq, j)], bb = f.psi[g.idx(iq, j + 1)];
        const bool cross = left ? (a > level && level >= bb) : (a < level && level <= bb);
        if (cross) {
            const double t = (bb == a) ? 0.0 : (level - a) / (bb - a);
            c.asymptote = g.ys[j] + t * g.dy;
            break;
        }
    }
}

} // namespace

FreeBoundarySet extract_boundaries(const StreamField& f, double level_eps) {
    const Grid& g = *f.grid;
    FreeBoundarySet fb;
    fb.level_eps = level_eps > 0.0 ? level_eps : 1e-6 * f.prm.Q;
    const double lvl1 = fb.level_eps;
    const double lvl2 = f.prm.Q - fb.level_eps;
    fb.k1.level_used = lvl1;
    fb.k2.level_used = lvl2;
    for (int j = 1; j < g.j_orifice; ++j) {
        double x;
        int iw;
        if (row_crossing(f, j, lvl1, true, x, iw)) {
            fb.k1.y.push_back(g.ys[j]);
            fb.k1.x.push_back(x);
            fb.k1.row.push_back(j);
            fb.k1.i_wet.push_back(iw + 1); // wet side is to the right of Gamma1
        }
        if (row_crossing(f, j, lvl2, true, x, iw)) {
            fb.k2.y.push_back(g.ys[j]);
            fb.k2.x.push_back(x);
            fb.k2.row.push_back(j);
            fb.k2.i_wet.push_back(iw); // wet side is to the left of Gamma2
        }
    }
    finish_curve(fb.k1, f, true);
    finish_curve(fb.k2, f, false);
    return fb;
}

void require_boundaries(const FreeBoundarySet& fb) {
    if (fb.k1.status != BoundaryStatus::Ok)
        throw EmptyBoundary("left free boundary absent");
    if (fb.k2.status != BoundaryStatus::Ok)
        throw EmptyBoundary("right free boundary absent");
}

namespace {

double percentile(std::vector<double> v, double q) {
    if (v.empty()) return kNaN;
    const std::size_t k = static_cast<std::size_t>(q * (v.size() - 1) + 0.5);
    std::nth_element(v.begin(), v.begin() + k, v.end());
    return v[k];
}

// One-sided second-order x-derivative at node i with the stencil extending in
// direction s (towards the wet side); falls back to first-order at the edge.
double dpsi_dx_onesided(const StreamField& f, int i, int j, int s) {
    const Grid& g = *f.grid;
    const auto v = [&](int ii) { return f.psi[g.idx(ii, j)]; };
    if (i + 2 * s >= 0 && i + 2 * s < g.nx)
        return s * (-3.0 * v(i) + 4.0 * v(i + s) - v(i + 2 * s)) / (2.0 * g.dx);
    if (i + s >= 0 && i + s < g.nx) return s * (v(i + s) - v(i)) / g.dx;
    return 0.0;
}

double dpsi_dy_into_jet(const StreamField& f, int i, int j) {
    const Grid& g = *f.grid;
    const auto v = [&](int jj) { return f.psi[g.idx(i, jj)]; };
    if (j >= 2) return (3.0 * v(j) - 4.0 * v(j - 1) + v(j - 2)) / (2.0 * g.dy);
    if (j >= 1 && j + 1 < g.ny) return (v(j + 1) - v(j - 1)) / (2.0 * g.dy);
    return (v(j + 1) - v(j)) / g.dy;
}

} // namespace

ResidualStats gradient_residual(const StreamField& f, const FreeBoundarySet& fb) {
    const Grid& g = *f.grid;
    ResidualStats st;
    std::vector<double> near;
    auto process = [&](const BoundaryCurve& c, double ax, int into) {
        for (std::size_t k = 0; k < c.y.size(); ++k) {
            const int i = c.i_wet[k], j = c.row[k];
            // dir of the one-sided stencil: towards the wet side.
            const double px = dpsi_dx_onesided(f, i, j, into);
            const double py = dpsi_dy_into_jet(f, i, j);
            const double denom = 2.0 * f.prm.lambda - 2.0 * f.prm.g * c.y[k];
            if (denom <= 0.0) continue;
            const double r = (px * px + py * py) / denom;
            const double dcell = std::hypot((c.x[k] - ax) / g.dx, (c.y[k] - f.prm.H) / g.dy);
            if (dcell <= 5.0) {
                near.push_back(r);
            } else {
                st.r.push_back(r);
                st.speed2.push_back(px * px + py * py);
                st.y_far.push_back(c.y[k]);
            }
        }
    };
    process(fb.k1, -1.0, +1);
    process(fb.k2, +1.0, -1);
    st.n = st.r.size();
    st.n_near = near.size();
    st.median = percentile(st.r, 0.5);
    st.p05 = percentile(st.r, 0.05);
    st.p95 = percentile(st.r, 0.95);
    st.median_near = percentile(near, 0.5);
    return st;
}

BarrierReport barrier_check(const StreamField& f) {
    const Grid& g = *f.grid;
    BarrierReport rep;
    rep.eps_h = 2.0 * (g.dx + g.dy) * std::sqrt(2.0 * f.prm.lambda);
    const double slope1 = std::sqrt(std::max(2.0 * f.prm.lambda - 2.0 * f.prm.g * f.prm.h1, 0.0));
    const double slope2 = std::sqrt(std::max(2.0 * f.prm.lambda - 2.0 * f.prm.g * f.prm.h2, 0.0));
    double wl = -kInf, wh = -kInf;
    for (int j = 0; j <= g.j_orifice; ++j) {
        const double y = g.ys[j];
        const double lo = std::max(-slope1 * y + f.prm.Q1, 0.0);
        const double hi = std::min(slope2 * y + f.prm.Q1, f.prm.Q);
        for (int i = 0; i < g.nx; ++i) {
            if (!g.active(i, j)) continue;
            const double v = f.psi[g.idx(i, j)];
            wl = std::max(wl, lo - v);
            wh = std::max(wh, v - hi);
        }
    }
    rep.worst_low = wl / rep.eps_h;
    rep.worst_high = wh / rep.eps_h;
    rep.pass = rep.worst_low <= 1.0 && rep.worst_high <= 1.0;
    return rep;
}

MonotonicityReport monotonicity_check(const StreamField& f) {
    const Grid& g = *f.grid;
    MonotonicityReport rep;
    rep.worst = -kInf;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i) {
            if (!g.active(i, j) || !g.active(i + 1, j)) continue;
            const double d = f.psi[g.idx(i, j)] - f.psi[g.idx(i + 1, j)];
            if (d > rep.worst) {
                rep.worst = d;
                rep.i = i;
                rep.j = j;
            }
        }
    rep.pass = rep.worst <= 1e-9 * f.prm.Q;
    return rep;
}

} // namespace gravjet
