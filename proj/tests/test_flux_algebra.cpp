#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gravjet/flux_algebra.hpp"

using namespace gravjet;

namespace {

// Independent oracle: solve the quadratic
//   (h2^2 - h1^2) Q1^2 + 2 h1^2 Q Q1 - (h1^2 Q^2 + 2 g h1^2 h2^2 (h2 - h1)) = 0
// with the textbook formula and keep the root in [0, Q]. Used to freeze the
// worked values below; also run directly against the implementation.
double q1_oracle(double h1, double h2, double Q, double g) {
    const double a = h2 * h2 - h1 * h1;
    const double b = 2.0 * h1 * h1 * Q;
    const double cc = -(h1 * h1 * Q * Q + 2.0 * g * h1 * h1 * h2 * h2 * (h2 - h1));
    if (std::abs(a) < 1e-300) return 0.5 * Q;
    const double disc = std::sqrt(b * b - 4.0 * a * cc);
    const double r1 = (-b + disc) / (2.0 * a);
    const double r2 = (-b - disc) / (2.0 * a);
    if (r1 >= 0.0 && r1 <= Q) return r1;
    return r2;
}

const JetParameters P{3.0, 1.0, 1.0, 2.0, 3.0, 0.0};

} // namespace

TEST_CASE("validate_params accepts the canonical parameters") {
    const auto p = validate_params(P);
    CHECK(p.Q == 3.0);
}

TEST_CASE("validate_params rejects Q at and below the flux threshold") {
    JetParameters p = P;
    p.Q = 2.0; // exactly 2 sqrt(g H^3): strict inequality excludes it
    CHECK_THROWS_AS(validate_params(p), FluxTooSmall);
    p.Q = 1.5;
    CHECK_THROWS_AS(validate_params(p), FluxTooSmall);
}

TEST_CASE("validate_params rejects disordered heights and nonpositive inputs") {
    JetParameters p = P;
    p.H1 = 0.5;
    CHECK_THROWS_AS(validate_params(p), GeometryOrderViolation);
    p = P;
    p.g = 0.0;
    CHECK_THROWS_AS(validate_params(p), NonPositive);
    p = P;
    p.Q = -1.0;
    CHECK_THROWS_AS(validate_params(p), NonPositive);
}

TEST_CASE("lambda_min formula and domain") {
    CHECK(lambda_min(1.0, 3.0, 1.0, 1.0) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(lambda_min(1.5, 3.0, 1.0, 1.0) == doctest::Approx(2.125).epsilon(1e-15));
    CHECK(lambda_min(0.0, 3.0, 1.0, 1.0) == doctest::Approx(5.5).epsilon(1e-15));
    CHECK_THROWS_AS(lambda_min(3.5, 3.0, 1.0, 1.0), DomainError);
}

TEST_CASE("q1_from_heights: symmetric, degenerate and generic points") {
    CHECK(q1_from_heights(0.4, 0.4, 3.0, 1.0, 1.0) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(q1_from_heights(0.0, 0.6, 3.0, 1.0, 1.0) == 0.0);
    CHECK(q1_from_heights(0.6, 0.0, 3.0, 1.0, 1.0) == 3.0);

    // Worked point: both flux relations must give the same lambda.
    const double q1 = q1_from_heights(0.5, 0.6, 3.0, 1.0, 1.0);
    const double oracle = q1_oracle(0.5, 0.6, 3.0, 1.0);
    CHECK(q1 == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(q1 == doctest::Approx(1.3736302).epsilon(1e-7));
    const double lam1 = lambda_from_height(q1, 0.5, 1.0);
    const double lam2 = lambda_from_height(3.0 - q1, 0.6, 1.0);
    CHECK(lam1 == doctest::Approx(lam2).epsilon(1e-12));
    CHECK(lam1 == doctest::Approx(4.2737200).epsilon(1e-7));

    CHECK_THROWS_AS(q1_from_heights(0.0, 0.0, 3.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(q1_from_heights(1.5, 0.6, 3.0, 1.0, 1.0), DomainError);
}

TEST_CASE("lambda_from_height basics") {
    CHECK(lambda_from_height(2.0, 1.0, 1.0) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(lambda_from_height(0.0, 0.7, 1.0) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK_THROWS_AS(lambda_from_height(1.0, 0.0, 1.0), DomainError);
}

TEST_CASE("heights_from_params: worked point and boundary cases") {
    const double q1 = q1_from_heights(0.5, 0.6, 3.0, 1.0, 1.0);
    const double lam = lambda_from_height(q1, 0.5, 1.0);
    auto [h1, h2] = heights_from_params(lam, q1, 3.0, 1.0, 1.0);
    CHECK(h1 == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(h2 == doctest::Approx(0.6).epsilon(1e-10));

    // Equality at lambda_min forces the max-flux sheet to fill the gap.
    auto [a1, a2] = heights_from_params(3.0, 2.0, 3.0, 1.0, 1.0);
    CHECK(a1 == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(a2 < 1.0);
    auto [b1, b2] = heights_from_params(2.125, 1.5, 3.0, 1.0, 1.0);
    CHECK(b1 == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(b2 == doctest::Approx(1.0).epsilon(1e-10));

    CHECK_THROWS_AS(heights_from_params(2.0, 1.5, 3.0, 1.0, 1.0), ParameterBelowMinimum);

    // Degenerate splits must not crash.
    auto [z1, z2] = heights_from_params(5.5, 0.0, 3.0, 1.0, 1.0);
    CHECK(z1 == 0.0);
    CHECK(z2 > 0.0);
}

TEST_CASE("round-trip over the (h1, h2) lattice") {
    const int N = 50;
    double worst = 0.0;
    for (int a = 1; a <= N; ++a) {
        for (int b = 1; b <= N; ++b) {
            const double h1 = a / double(N), h2 = b / double(N);
            const double q1 = q1_from_heights(h1, h2, 3.0, 1.0, 1.0);
            const double lam = (h1 > 0.0) ? lambda_from_height(q1, h1, 1.0)
                                          : lambda_from_height(3.0 - q1, h2, 1.0);
            auto [r1, r2] = heights_from_params(lam, q1, 3.0, 1.0, 1.0);
            worst = std::max({worst, std::abs(r1 - h1), std::abs(r2 - h2)});
            // Both branch lambdas agree.
            if (h1 > 0.0 && h2 > 0.0) {
                const double lam2 = lambda_from_height(3.0 - q1, h2, 1.0);
                CHECK(std::abs(lam - lam2) <= 1e-10 * lam);
            }
        }
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("monotonicity of heights in Q1 at fixed lambda") {
    const double lam = 4.0;
    double prev_h1 = -1.0, prev_h2 = 2.0;
    int count = 0;
    for (int k = 0; k <= 100; ++k) {
        const double q1 = 3.0 * k / 100.0;
        if (lam < lambda_min(q1, 3.0, 1.0, 1.0)) continue;
        auto [h1, h2] = heights_from_params(lam, q1, 3.0, 1.0, 1.0);
        CHECK(h1 >= prev_h1 - 1e-12);
        CHECK(h2 <= prev_h2 + 1e-12);
        prev_h1 = h1;
        prev_h2 = h2;
        ++count;
    }
    CHECK(count > 50);
}

TEST_CASE("asymptotic states: velocities, bands, pressure forms") {
    const double q1 = q1_from_heights(0.5, 0.6, 3.0, 1.0, 1.0);
    const double lam = lambda_from_height(q1, 0.5, 1.0);
    const DownstreamState s{lam, q1, 0.5, 0.6};
    const auto st = asymptotic_states(s, P);

    CHECK(st[0].u_inf == doctest::Approx(-q1 / 0.5).epsilon(1e-12));
    CHECK(std::abs(st[0].u_inf) == doctest::Approx(2.74726).epsilon(1e-4));
    CHECK(st[1].u_inf == doctest::Approx((3.0 - q1) / 0.6).epsilon(1e-12));
    CHECK(st[1].u_inf == doctest::Approx(2.71062).epsilon(1e-4));
    // Bernoulli cross-check of the downstream speeds.
    CHECK(std::abs(st[0].u_inf) ==
          doctest::Approx(std::sqrt(2.0 * lam - 2.0 * 0.5)).epsilon(1e-9));
    CHECK(st[1].u_inf == doctest::Approx(std::sqrt(2.0 * lam - 2.0 * 0.6)).epsilon(1e-9));
    CHECK(st[2].u_inf == doctest::Approx(3.0).epsilon(1e-15));

    // Downstream pressure: p(y) = p_atm + g (h - y).
    CHECK(st[0].p_intercept == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(st[0].p_slope == doctest::Approx(-1.0).epsilon(1e-15));

    // The two algebraic forms of the upstream profile agree pointwise.
    for (int k = 0; k <= 20; ++k) {
        const double y = 2.0 + k / 20.0;
        const double form_a = st[2].p_intercept + st[2].p_slope * y;
        const double form_b = P.p_atm + P.g * (s.h1 - y) + s.Q1 * s.Q1 / (2.0 * s.h1 * s.h1) -
                              P.Q * P.Q / (2.0 * (P.H1 - P.H2) * (P.H1 - P.H2));
        CHECK(form_a == doctest::Approx(form_b).epsilon(1e-12));
    }
}

TEST_CASE("check_state rejects inconsistent quadruples") {
    const double q1 = q1_from_heights(0.5, 0.6, 3.0, 1.0, 1.0);
    const double lam = lambda_from_height(q1, 0.5, 1.0);
    DownstreamState s{lam, q1, 0.5, 0.6};
    CHECK_NOTHROW(check_state(s, P));
    s.h1 = 0.55;
    CHECK_THROWS_AS(check_state(s, P), DomainError);
}
