#pragma once

#include <array>
#include <utility>

#include "gravjet/errors.hpp"

namespace gravjet {

// Physical inputs of a run. All quantities are density-normalized: pressure
// carries velocity^2 units, fluxes are area per time.
struct JetParameters {
    double Q;     // total incoming flux
    double g;     // gravitational acceleration
    double H;     // orifice height above the ground
    double H1;    // height of the lower (left) wall end
    double H2;    // height of the upper (right) wall end
    double p_atm = 0.0;
};

// The two free parameters together with the asymptotic sheet thicknesses they
// determine: Q1 = sqrt(2*lambda - 2*g*h1)*h1 and Q - Q1 = sqrt(2*lambda - 2*g*h2)*h2.
struct DownstreamState {
    double lambda; // Bernoulli free-surface constant, velocity^2
    double Q1;     // left effluent flux
    double h1;     // left asymptotic sheet thickness
    double h2;     // right asymptotic sheet thickness
};

enum class Region { upstream, left_downstream, right_downstream };

// Far-field state on one vertical band: u -> u_inf, v -> 0, p -> affine in y.
struct AsymptoticState {
    Region region;
    double u_inf;
    double band_lo, band_hi;
    double p_intercept, p_slope; // p(y) = p_intercept + p_slope * y
};

// Throws FluxTooSmall / GeometryOrderViolation / NonPositive; returns p unchanged.
JetParameters validate_params(const JetParameters& p);

// Smallest admissible lambda for a given flux split:
// max{Q1^2, (Q-Q1)^2} / (2 H^2) + g H.
double lambda_min(double Q1, double Q, double H, double g);

// Flux split determined by the sheet thicknesses. Rationalized evaluation of
// the quadratic root so the symmetric case h1 ~ h2 has no cancellation.
double q1_from_heights(double h1, double h2, double Q, double g, double H);

// lambda = Q1^2 / (2 h^2) + g h.
double lambda_from_height(double Q1, double h, double g);

struct HeightsDiagnostics {
    // Set when the interior minimum of the right-branch map lies below H and
    // lambda also equals the map's value at H, so t = H would be a second
    // root; the decreasing-branch root is returned regardless.
    bool h2_second_root_at_H = false;
};

// Inverts the two Bernoulli/flux relations: unique (h1, h2) on the decreasing
// branches, found by bisection to 1e-12 * H. Requires lambda >= lambda_min.
std::pair<double, double> heights_from_params(double lambda, double Q1, double Q,
                                              double g, double H,
                                              HeightsDiagnostics* diag = nullptr);

// Convenience constructors for a fully populated DownstreamState.
DownstreamState downstream_state(double lambda, double Q1, const JetParameters& p);
DownstreamState state_from_heights(double h1, double h2, const JetParameters& p);

// Checks the DownstreamState invariants (both flux relations to rtol, ranges,
// lambda above lambda_min). Throws DomainError on violation.
void check_state(const DownstreamState& s, const JetParameters& p, double rtol = 1e-10);

// The three far-field states of Theorem-style asymptotics: left/right
// downstream sheets and the upstream channel.
std::array<AsymptoticState, 3> asymptotic_states(const DownstreamState& s,
                                                 const JetParameters& p);

} // namespace gravjet
