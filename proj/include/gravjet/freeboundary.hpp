#pragma once

#include <vector>

#include "gravjet/minimizer.hpp"

namespace gravjet {

enum class BoundaryStatus { Ok, NoSamples };

// One free streamline as a graph x = k(y), sampled at grid rows below the
// orifice. detach is the linear extrapolation of the two highest samples at or
// below y = H - dy; it is -inf (left) / +inf (right) when the boundary never
// enters the truncated window as a graph.
struct BoundaryCurve {
    std::vector<double> y, x;
    std::vector<int> row, i_wet; // grid row and wet-side column per sample
    double detach = 0.0;
    double asymptote = 0.0;   // far-field height estimate, NaN if unavailable
    double level_used = 0.0;  // the psi level this curve traces
    BoundaryStatus status = BoundaryStatus::NoSamples;
};

struct FreeBoundarySet {
    BoundaryCurve k1, k2;
    double level_eps = 0.0;
};

// Level-crossing extraction per grid row. Throws NonGraph if any row crosses a
// level more than once. level_eps < 0 selects the default 1e-6 * Q.
FreeBoundarySet extract_boundaries(const StreamField& f, double level_eps = -1.0);

// Throws EmptyBoundary unless both boundaries have samples.
void require_boundaries(const FreeBoundarySet& fb);

struct ResidualStats {
    double median = 0.0, p05 = 0.0, p95 = 0.0;
    std::size_t n = 0;
    double median_near = 0.0; // samples within 5 cells of a nozzle endpoint
    std::size_t n_near = 0;
    std::vector<double> r;       // far samples
    std::vector<double> speed2;  // |grad psi|^2 at far samples
    std::vector<double> y_far;   // sample heights, aligned with r
};

// Ratio r = |grad psi|^2 / (2 lambda - 2 g y) at each boundary sample, with
// one-sided second-order differences taken into the wet side.
ResidualStats gradient_residual(const StreamField& f, const FreeBoundarySet& fb);

struct BarrierReport {
    bool pass = false;
    double worst_low = 0.0;  // in eps_h units, positive means violation
    double worst_high = 0.0;
    double eps_h = 0.0;
};

// Containment between the sheet barriers below the orifice with slack
// eps_h = 2 (dx + dy) sqrt(2 lambda).
BarrierReport barrier_check(const StreamField& f);

struct MonotonicityReport {
    bool pass = false;
    double worst = 0.0; // max of psi(i,j) - psi(i+1,j), in flux units
    int i = -1, j = -1;
};

// psi nondecreasing in x along every row, slack 1e-9 * Q.
MonotonicityReport monotonicity_check(const StreamField& f);

} // namespace gravjet
