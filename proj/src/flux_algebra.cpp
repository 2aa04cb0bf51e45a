#include "gravjet/flux_algebra.hpp"

#include <algorithm>
#include <cmath>

namespace gravjet {

JetParameters validate_params(const JetParameters& p) {
    if (p.g <= 0.0 || p.Q <= 0.0)
        throw NonPositive("Q and g must be positive");
    if (!(0.0 < p.H && p.H < p.H1 && p.H1 < p.H2))
        throw GeometryOrderViolation("heights must satisfy 0 < H < H1 < H2");
    if (!(p.Q > 2.0 * std::sqrt(p.g * p.H * p.H * p.H)))
        throw FluxTooSmall("Q must exceed 2*sqrt(g*H^3)");
    return p;
}

double lambda_min(double Q1, double Q, double H, double g) {
    if (Q1 < 0.0 || Q1 > Q)
        throw DomainError("Q1 must lie in [0, Q]");
    const double m = std::max(Q1 * Q1, (Q - Q1) * (Q - Q1));
    return m / (2.0 * H * H) + g * H;
}

double q1_from_heights(double h1, double h2, double Q, double g, double H) {
    if (h1 < 0.0 || h2 < 0.0 || h1 > H || h2 > H)
        throw DomainError("heights must lie in [0, H]");
    if (h1 == 0.0 && h2 == 0.0)
        throw DomainError("h1 and h2 cannot both vanish");
    if (!(Q > 2.0 * std::sqrt(g * H * H * H)))
        throw DomainError("Q must exceed 2*sqrt(g*H^3)");
    if (h1 == 0.0) return 0.0;
    if (h2 == 0.0) return Q;
    if (std::abs(h2 - h1) < 1e-14 * H) return 0.5 * Q;
    // Root of (h2^2-h1^2) Q1^2 + 2 h1^2 Q Q1 - (h1^2 Q^2 + 2 g h1^2 h2^2 (h2-h1)) = 0,
    // written with the conjugate in the denominator so h2 -> h1 is regular.
    const double s = std::sqrt(Q * Q + 2.0 * g * (h2 * h2 - h1 * h1) * (h2 - h1));
    return h1 * (Q * Q + 2.0 * g * (h2 - h1) * h2 * h2) / (Q * h1 + s * h2);
}

double lambda_from_height(double Q1, double h, double g) {
    if (h <= 0.0)
        throw DomainError("height must be positive");
    return Q1 * Q1 / (2.0 * h * h) + g * h;
}

namespace {

// Solves flux^2/(2 t^2) + g t = lambda for t on the decreasing branch
// (0, min{(flux^2/g)^(1/3), H}] by bisection.
double invert_height_map(double lambda, double flux, double g, double H) {
    if (flux == 0.0) return 0.0;
    const double t_interior = std::cbrt(flux * flux / g);
    const double hi0 = std::min(t_interior, H);
    auto map = [&](double t) { return flux * flux / (2.0 * t * t) + g * t; };
    if (map(hi0) > lambda) {
        // Cannot happen for lambda >= lambda_min; guards the branch analysis.
        throw ParameterBelowMinimum("no root on the decreasing branch");
    }
    double lo = flux / std::sqrt(2.0 * lambda); // map(lo) = lambda + g*lo > lambda
    double hi = hi0;
    const double tol = 1e-12 * H;
    for (int it = 0; it < 200 && (hi - lo) > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (map(mid) > lambda)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

std::pair<double, double> heights_from_params(double lambda, double Q1, double Q,
                                              double g, double H,
                                              HeightsDiagnostics* diag) {
    if (Q1 < 0.0 || Q1 > Q)
        throw DomainError("Q1 must lie in [0, Q]");
    if (lambda < lambda_min(Q1, Q, H, g))
        throw ParameterBelowMinimum("lambda below lambda_min(Q1, Q, H, g)");
    const double h1 = invert_height_map(lambda, Q1, g, H);
    const double h2 = invert_height_map(lambda, Q - Q1, g, H);
    if (diag) {
        const double flux2 = Q - Q1;
        diag->h2_second_root_at_H = false;
        if (flux2 > 0.0) {
            const double t_interior = std::cbrt(flux2 * flux2 / g);
            const double at_H = flux2 * flux2 / (2.0 * H * H) + g * H;
            if (t_interior < H && std::abs(at_H - lambda) <= 1e-12 * lambda)
                diag->h2_second_root_at_H = true;
        }
    }
    return {h1, h2};
}

DownstreamState downstream_state(double lambda, double Q1, const JetParameters& p) {
    auto [h1, h2] = heights_from_params(lambda, Q1, p.Q, p.g, p.H);
    return DownstreamState{lambda, Q1, h1, h2};
}

DownstreamState state_from_heights(double h1, double h2, const JetParameters& p) {
    const double Q1 = q1_from_heights(h1, h2, p.Q, p.g, p.H);
    const double lambda = (h1 > 0.0) ? lambda_from_height(Q1, h1, p.g)
                                     : lambda_from_height(p.Q - Q1, h2, p.g);
    return DownstreamState{lambda, Q1, h1, h2};
}

void check_state(const DownstreamState& s, const JetParameters& p, double rtol) {
    if (s.Q1 < 0.0 || s.Q1 > p.Q)
        throw DomainError("state: Q1 out of [0, Q]");
    if (s.h1 < 0.0 || s.h1 > p.H || s.h2 < 0.0 || s.h2 > p.H)
        throw DomainError("state: heights out of [0, H]");
    if ((s.h1 == 0.0 && s.Q1 != 0.0) || (s.h2 == 0.0 && s.Q1 != p.Q))
        throw DomainError("state: zero height with nonzero matching flux");
    if (s.lambda < lambda_min(s.Q1, p.Q, p.H, p.g) * (1.0 - 1e-12))
        throw DomainError("state: lambda below lambda_min");
    const double scale = std::max(1.0, p.Q);
    if (s.h1 > 0.0) {
        const double lhs = std::sqrt(2.0 * s.lambda - 2.0 * p.g * s.h1) * s.h1;
        if (std::abs(lhs - s.Q1) > rtol * scale)
            throw DomainError("state: left flux relation violated");
    }
    if (s.h2 > 0.0) {
        const double rhs = std::sqrt(2.0 * s.lambda - 2.0 * p.g * s.h2) * s.h2;
        if (std::abs(rhs - (p.Q - s.Q1)) > rtol * scale)
            throw DomainError("state: right flux relation violated");
    }
}

std::array<AsymptoticState, 3> asymptotic_states(const DownstreamState& s,
                                                 const JetParameters& p) {
    check_state(s, p);
    AsymptoticState left{Region::left_downstream,
                         s.h1 > 0.0 ? -s.Q1 / s.h1 : -std::sqrt(2.0 * s.lambda),
                         0.0, s.h1,
                         p.p_atm + p.g * s.h1, -p.g};
    AsymptoticState right{Region::right_downstream,
                          s.h2 > 0.0 ? (p.Q - s.Q1) / s.h2 : std::sqrt(2.0 * s.lambda),
                          0.0, s.h2,
                          p.p_atm + p.g * s.h2, -p.g};
    const double W = p.H2 - p.H1;
    AsymptoticState up{Region::upstream,
                       p.Q / W,
                       p.H1, p.H2,
                       p.p_atm + s.lambda - p.Q * p.Q / (2.0 * W * W), -p.g};
    return {left, right, up};
}

} // namespace gravjet
