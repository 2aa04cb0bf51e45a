#pragma once

#include <string>
#include <vector>

#include "gravjet/errors.hpp"

namespace gravjet {

// One nozzle wall x = g(y), defined for y in [H, top). Either the canonical
// analytic family g(y) = sign - (y-H)^2/(Hi-y) or a monotone piecewise-cubic
// interpolant of samples (Fritsch-Carlson, stays monotone where the data is).
class WallCurve {
public:
    static WallCurve analytic(double H, double Hi, int sign);
    static WallCurve from_samples(std::vector<double> y, std::vector<double> x);

    double x_at(double y) const;
    double y_min() const { return y_lo_; }
    // Largest y covered: Hi for the analytic form (open end), last sample otherwise.
    double y_max() const;
    bool analytic_form() const { return analytic_; }

    // Largest y with g(y) = x_target (walls run to x = -inf upward, so this is
    // the root closest to the wall end). Throws TruncationTooSmall if the wall
    // never reaches x_target.
    double y_at_x(double x_target) const;

    // Polyline (x, y) sampled so consecutive points differ by at most max_step
    // in both coordinates, restricted to y in [y_min, y_hi].
    std::vector<std::pair<double, double>> polyline(double y_hi, double max_step) const;

private:
    WallCurve() = default;
    double segment_eval(std::size_t k, double y) const;

    bool analytic_ = true;
    double y_lo_ = 0.0, hi_ = 0.0;
    int sign_ = -1;
    std::vector<double> ys_, xs_, ds_; // samples + endpoint slopes (sampled form)
};

struct NozzleGeometry {
    WallCurve g1, g2;
    double H, H1, H2;
};

// Canonical analytic nozzle; validates the normalization g_i(H) = (-1)^i.
NozzleGeometry build_nozzle(double H, double H1, double H2);
// Sampled walls, columns (y, x) each; H1/H2 are the declared wall end heights.
NozzleGeometry build_nozzle(std::vector<double> y1, std::vector<double> x1,
                            std::vector<double> y2, std::vector<double> x2,
                            double H, double H1, double H2);

enum class SegmentId : unsigned char {
    None, Wall1, Wall2, Lid1, Lid2, Sigma1, Sigma2, SigmaIn, Ground
};

const char* segment_name(SegmentId s);

// Omega_mu: the rectangle (-mu, mu) x (0, H) below the orifice plus the nozzle
// interior above it, cut at x = -mu. H1mu/H2mu are the wall heights where the
// walls cross the truncation line.
struct TruncatedDomain {
    NozzleGeometry geom;
    double mu;
    double H1mu, H2mu;

    double left_bound(double y) const;   // for y > H
    double right_bound(double y) const;  // for y > H
    bool inside_closed(double x, double y) const;
    bool inside_open(double x, double y) const;

    // Boundary segments as tagged polylines, tiling the boundary once.
    std::vector<std::pair<SegmentId, std::vector<std::pair<double, double>>>>
    boundary_polylines(double max_step) const;
};

TruncatedDomain truncate(const NozzleGeometry& geom, double mu);

} // namespace gravjet
