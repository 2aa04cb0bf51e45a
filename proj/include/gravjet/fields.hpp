#pragma once

#include <string>
#include <vector>

#include "gravjet/flux_algebra.hpp"
#include "gravjet/freeboundary.hpp"
#include "gravjet/minimizer.hpp"

namespace gravjet {

// Velocity and pressure recovered from the stream function. Values are NaN at
// exterior nodes; pressure is NaN at dry nodes as well.
struct FlowFields {
    const Grid* grid = nullptr;
    std::vector<double> u, v, p;
    std::vector<std::uint8_t> wet;
};

// u = dpsi/dy, v = -dpsi/dx: central differences at nodes with both neighbors
// present, one-sided second-order otherwise.
FlowFields velocity(const StreamField& f);

// p = p_atm + lambda - |grad psi|^2 / 2 - g y at wet nodes.
void pressure(FlowFields& ff, const StreamField& f, double p_atm);

// The separating streamline {psi = Q1} and the stagnation point on the ground.
struct Interface {
    std::vector<double> y, x;
    double H3 = 0.0;     // Q1 (H2 - H1) / Q + H1
    double S_x = 0.0;    // ground intercept of the least-squares line
    double slope0 = 0.0; // dk/dy of that line (lowest rows)
    int rows_used = 0;
};

Interface extract_interface(const StreamField& f, const JetParameters& p);

// Sup-norm deviations from one asymptotic state over a window: the outer
// x-fraction of the domain on the state's side, the inner part of its band.
struct BandDeviation {
    Region region{};
    double du_sup = 0.0, dv_sup = 0.0, dp_sup = 0.0;
    double grad_uv_sup = 0.0, grad_p_err_sup = 0.0;
    double u_ref = 0.0;           // reference velocity actually compared against
    double u_ref_limit = 0.0;     // the infinite-domain value
    std::size_t n_nodes = 0;
};

struct WindowSpec {
    double outer_x_fraction = 0.2;
    double inner_band_fraction = 0.6;
    // Upstream only: compare against the channel width at the window rather
    // than the H2 - H1 limit (the walls reach their limits algebraically in mu).
    bool truncation_corrected = true;
};

BandDeviation asymptotic_check(const FlowFields& ff, const StreamField& f,
                               const AsymptoticState& state, const JetParameters& p,
                               const WindowSpec& w = {});

struct CheckItem {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct VerificationReport {
    std::vector<CheckItem> items;
    bool all_pass() const {
        for (const auto& it : items)
            if (!it.pass) return false;
        return true;
    }
};

// Aggregated check list for a stored or freshly computed run: continuous fit,
// v < 0, interface/stagnation, p = p_atm on the free boundaries, barriers,
// monotonicity, gradient residual, asymptotics, flux bookkeeping.
VerificationReport verify_all(const StreamField& f, const JetParameters& p, double tau);

} // namespace gravjet
