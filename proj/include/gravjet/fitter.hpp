#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gravjet/fields.hpp"
#include "gravjet/freeboundary.hpp"
#include "gravjet/minimizer.hpp"

namespace gravjet {

struct FitProblem {
    JetParameters params{};
    NozzleGeometry geometry{};
    double mu = 6.0;
    double dx = 1.0 / 64, dy = 1.0 / 64;
    double tau = -1.0; // fit tolerance on the detachment abscissas; < 0: 2 max(dx, dy)
    // Parameter brackets; negative values select the defaults
    // lambda_lo = lambda_min(Q/2) (1 + 1e-6), lambda_hi = 20 lambda_lo,
    // q1 in [0.02 Q, 0.98 Q].
    double lambda_lo = -1.0, lambda_hi = -1.0;
    double q1_lo = -1.0, q1_hi = -1.0;
    int budget = 60; // full solves
    SolveParams solver{};
    int cache_capacity = 24; // converged fields kept for warm starts
};

struct Detachment {
    double k1H = 0.0, k2H = 0.0;
    double energy = 0.0;
    int sweeps = 0;
    bool solver_converged = true;
};

using DetachmentFn = std::function<Detachment(double lambda, double q1)>;

struct TraceEntry {
    int iter;
    double lambda, q1, k1H, k2H, energy;
    int sweeps;
};

enum class FitStatus { Converged, BudgetExhausted, NotCentered };

struct FitResult {
    double lambda_star = 0.0, q1_star = 0.0;
    double k1H = 0.0, k2H = 0.0;
    double F1 = 0.0, F2 = 0.0; // k1H + 1, k2H - 1
    int solves = 0;
    bool converged = false;
    FitStatus status = FitStatus::BudgetExhausted;
    bool monotonicity_violation = false; // triggered the lattice fallback
    bool q1_near_boundary = false;       // within tau sqrt(2 lambda) of 0 or Q
    std::vector<TraceEntry> trace;
    std::shared_ptr<StreamField> field; // converged field at the fitted point
};

// Runs one truncated solve at (lambda, Q1) and returns the detachment
// abscissas; warm-starts from the nearest cached converged field.
class DetachmentEvaluator {
public:
    DetachmentEvaluator(const FitProblem& problem);
    Detachment operator()(double lambda, double q1);
    const Grid& grid() const { return grid_; }
    int solves() const { return solves_; }
    std::shared_ptr<StreamField> last_field() const { return last_; }

private:
    const FitProblem& prob_;
    Grid grid_;
    struct CacheEntry {
        double lambda, q1;
        std::vector<double> psi;
    };
    std::vector<CacheEntry> cache_;
    std::shared_ptr<StreamField> last_;
    int solves_ = 0;
};

struct FitOptions {
    double Q, g, H;
    double tau;
    double lambda_lo, lambda_hi, q1_lo, q1_hi;
    int budget = 60;
};

// The continuation core: an outer bisection on lambda drives the jet width
// k2H - k1H to 2 while an inner bisection on Q1 centers (k1H + k2H)/2 at 0.
// Monotonicity of the center in Q1 is asserted; a violation falls back to a
// coarse lattice search followed by local bisection.
FitResult fit_generic(const DetachmentFn& eval, const FitOptions& opt);

FitResult fit(const FitProblem& problem);

struct SweepCell {
    double lambda, q1;
    double k1H = 0.0, k2H = 0.0;
    bool ok = false;
    std::string error;
};

std::vector<SweepCell> sweep_map(const FitProblem& problem,
                                 const std::vector<double>& lambdas,
                                 const std::vector<double>& q1s);

} // namespace gravjet
