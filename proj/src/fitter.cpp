#include "gravjet/fitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gravjet {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double center_of(const Detachment& d) {
    if (std::isinf(d.k1H) && std::isinf(d.k2H)) return 0.0; // both boundaries out: undecided
    if (std::isinf(d.k1H)) return -kInf;
    if (std::isinf(d.k2H)) return kInf;
    return 0.5 * (d.k1H + d.k2H);
}

double width_of(const Detachment& d) {
    if (std::isinf(d.k1H) || std::isinf(d.k2H)) return kInf;
    return d.k2H - d.k1H;
}

} // namespace

DetachmentEvaluator::DetachmentEvaluator(const FitProblem& problem)
    : prob_(problem), grid_(build_grid(gravjet::truncate(problem.geometry, problem.mu),
                                       problem.dx, problem.dy)) {}

Detachment DetachmentEvaluator::operator()(double lambda, double q1) {
    const auto& p = prob_.params;
    const DownstreamState st = downstream_state(lambda, q1, p);
    StreamField f;
    // Warm start from the nearest cached converged field in parameter space.
    const CacheEntry* best = nullptr;
    double bd = kInf;
    for (const auto& c : cache_) {
        const double d = std::abs(c.lambda - lambda) / std::max(lambda, 1e-30) +
                         std::abs(c.q1 - q1) / p.Q;
        if (d < bd) {
            bd = d;
            best = &c;
        }
    }
    if (best) {
        f = init_field(grid_, st, p.Q, p.g);
        StreamField warm;
        warm.grid = &grid_;
        warm.psi = best->psi;
        for (std::size_t n = 0; n < f.psi.size(); ++n)
            if (grid_.cls[n] == NodeClass::Interior)
                f.psi[n] = std::clamp(warm.psi[n], 0.0, p.Q);
    } else {
        f = init_field(grid_, st, p.Q, p.g);
    }
    const SolveDiagnostics diag = solve(f, prob_.solver);
    ++solves_;
    const auto fb = extract_boundaries(f);
    Detachment d;
    d.k1H = fb.k1.status == BoundaryStatus::Ok ? fb.k1.detach : -kInf;
    d.k2H = fb.k2.status == BoundaryStatus::Ok ? fb.k2.detach : kInf;
    d.energy = diag.final_energy;
    d.sweeps = diag.sweeps;
    d.solver_converged = diag.converged;
    if (static_cast<int>(cache_.size()) >= prob_.cache_capacity)
        cache_.erase(cache_.begin());
    cache_.push_back(CacheEntry{lambda, q1, f.psi});
    last_ = std::make_shared<StreamField>(std::move(f));
    return d;
}

namespace {

struct FitCtx {
    const DetachmentFn* eval;
    const FitOptions* opt;
    FitResult res;
    bool done = false;

    // Admissible Q1 interval at this lambda: lambda >= lambda_min(Q1).
    std::pair<double, double> q1_range(double lambda) const {
        const double cap = opt->H * std::sqrt(std::max(2.0 * (lambda - opt->g * opt->H), 0.0));
        const double lo = std::max(opt->q1_lo, opt->Q - cap);
        const double hi = std::min(opt->q1_hi, cap);
        return {lo, std::max(hi, lo)};
    }

    Detachment probe(double lambda, double q1) {
        Detachment d = (*eval)(lambda, q1);
        res.trace.push_back(
            TraceEntry{static_cast<int>(res.trace.size()), lambda, q1, d.k1H, d.k2H, d.energy, d.sweeps});
        ++res.solves;
        const double f1 = d.k1H + 1.0, f2 = d.k2H - 1.0;
        const double score = std::max(std::abs(f1), std::abs(f2));
        const double best_score = std::max(std::abs(res.F1), std::abs(res.F2));
        if (res.trace.size() == 1 || score < best_score) {
            res.lambda_star = lambda;
            res.q1_star = q1;
            res.k1H = d.k1H;
            res.k2H = d.k2H;
            res.F1 = f1;
            res.F2 = f2;
        }
        if (std::abs(f1) <= opt->tau && std::abs(f2) <= opt->tau) {
            res.lambda_star = lambda;
            res.q1_star = q1;
            res.k1H = d.k1H;
            res.k2H = d.k2H;
            res.F1 = f1;
            res.F2 = f2;
            done = true;
        }
        return d;
    }

    bool budget_left() const { return res.solves < opt->budget; }
};

// Inner loop: bisect Q1 at fixed lambda until the jet is centered. Returns the
// detachment at the final Q1 and that Q1. Monotonicity violations are flagged.
struct CenterResult {
    double q1;
    Detachment d;
    bool centered;
};

CenterResult center_q1(FitCtx& ctx, double lambda, double q1_hint, double ctol) {
    auto [qa, qb] = ctx.q1_range(lambda);
    struct Obs {
        double q1, c;
    };
    std::vector<Obs> obs;
    auto watch = [&](double q1, const Detachment& d) {
        const double c = center_of(d);
        obs.push_back(Obs{q1, c});
        std::sort(obs.begin(), obs.end(), [](const Obs& a, const Obs& b) { return a.q1 < b.q1; });
        for (std::size_t k = 0; k + 1 < obs.size(); ++k)
            if (obs[k + 1].c > obs[k].c + 2.0 * ctol + 1e-12)
                ctx.res.monotonicity_violation = true;
        return c;
    };
    if (qb - qa < 1e-12 * ctx.opt->Q) {
        const double q1 = 0.5 * (qa + qb);
        Detachment d = ctx.probe(lambda, q1);
        watch(q1, d);
        return {q1, d, true};
    }
    // Try to bracket the center around the hint before full-interval bisection.
    double lo = qa, hi = qb;
    double q0 = std::clamp(q1_hint, qa, qb);
    Detachment d0 = ctx.probe(lambda, q0);
    double c0 = watch(q0, d0);
    if (ctx.done || std::abs(c0) <= ctol || !ctx.budget_left()) return {q0, d0, std::abs(c0) <= ctol};
    if (c0 > 0.0) lo = q0; else hi = q0; // center decreases with Q1
    Detachment dend = ctx.probe(lambda, c0 > 0.0 ? hi : lo);
    double cend = watch(c0 > 0.0 ? hi : lo, dend);
    if (ctx.done || !ctx.budget_left()) return {c0 > 0.0 ? hi : lo, dend, std::abs(cend) <= ctol};
    if (c0 > 0.0 && cend > 0.0) return {hi, dend, false}; // cannot center inside bracket
    if (c0 < 0.0 && cend < 0.0) return {lo, dend, false};
    double q_best = q0;
    Detachment d_best = d0;
    double c_best = c0;
    for (int it = 0; it < 12 && ctx.budget_left(); ++it) {
        const double qm = 0.5 * (lo + hi);
        Detachment dm = ctx.probe(lambda, qm);
        const double cm = watch(qm, dm);
        if (std::abs(cm) < std::abs(c_best)) {
            q_best = qm;
            d_best = dm;
            c_best = cm;
        }
        if (ctx.done || std::abs(cm) <= ctol) return {qm, dm, true};
        if (cm > 0.0) lo = qm; else hi = qm;
        if (hi - lo < 1e-10 * ctx.opt->Q) break;
    }
    return {q_best, d_best, std::abs(c_best) <= ctol};
}

void lattice_fallback(FitCtx& ctx) {
    // Coarse sign-pattern scan of the bracket rectangle, then local bisection
    // around the most balanced cell.
    const int NL = 6, NQ = 6;
    double best_score = kInf, bl = ctx.opt->lambda_lo, bq = 0.5 * ctx.opt->Q;
    for (int a = 0; a <= NL && ctx.budget_left() && !ctx.done; ++a) {
        const double lam = ctx.opt->lambda_lo +
                           (ctx.opt->lambda_hi - ctx.opt->lambda_lo) * a / static_cast<double>(NL);
        auto [qa, qb] = ctx.q1_range(lam);
        for (int b = 0; b <= NQ && ctx.budget_left() && !ctx.done; ++b) {
            const double q1 = qa + (qb - qa) * b / static_cast<double>(NQ);
            Detachment d = ctx.probe(lam, q1);
            const double sc = std::max(std::abs(d.k1H + 1.0), std::abs(d.k2H - 1.0));
            if (sc < best_score) {
                best_score = sc;
                bl = lam;
                bq = q1;
            }
        }
    }
    if (ctx.done || !ctx.budget_left()) return;
    // Local alternating bisection in a one-lattice-cell neighborhood.
    double llo = std::max(ctx.opt->lambda_lo, bl - (ctx.opt->lambda_hi - ctx.opt->lambda_lo) / NL);
    double lhi = std::min(ctx.opt->lambda_hi, bl + (ctx.opt->lambda_hi - ctx.opt->lambda_lo) / NL);
    double q1h = bq;
    for (int it = 0; it < 20 && ctx.budget_left() && !ctx.done; ++it) {
        const double lam = 0.5 * (llo + lhi);
        CenterResult c = center_q1(ctx, lam, q1h, 0.25 * ctx.opt->tau);
        q1h = c.q1;
        if (ctx.done) break;
        const double W = width_of(c.d);
        if (W > 2.0) llo = lam; else lhi = lam;
        if (lhi - llo < 1e-12 * std::max(1.0, llo)) break;
    }
}

} // namespace

FitResult fit_generic(const DetachmentFn& eval, const FitOptions& opt) {
    FitCtx ctx;
    ctx.eval = &eval;
    ctx.opt = &opt;
    const double ctol = 0.25 * opt.tau;

    // Verify the bracket: wide at lambda_lo (Q1 pinned near Q/2 there), narrow
    // at lambda_hi.
    double q1h = 0.5 * opt.Q;
    CenterResult at_lo = center_q1(ctx, opt.lambda_lo, q1h, ctol);
    if (!ctx.done) {
        const double Wlo = width_of(at_lo.d);
        if (!(Wlo > 2.0))
            throw NoBracket("width at lambda_lo is not above 2; lower lambda_lo");
        q1h = at_lo.q1;
        CenterResult at_hi = center_q1(ctx, opt.lambda_hi, q1h, ctol);
        if (!ctx.done) {
            const double Whi = width_of(at_hi.d);
            if (!(Whi < 2.0))
                throw NoBracket("width at lambda_hi is not below 2; raise lambda_hi");
            double llo = opt.lambda_lo, lhi = opt.lambda_hi;
            q1h = at_hi.q1;
            while (!ctx.done && ctx.budget_left() && !ctx.res.monotonicity_violation) {
                const double lam = 0.5 * (llo + lhi);
                CenterResult c = center_q1(ctx, lam, q1h, ctol);
                q1h = c.q1;
                if (ctx.done) break;
                const double W = width_of(c.d);
                if (W > 2.0) llo = lam; else lhi = lam;
                if (lhi - llo < 1e-13 * std::max(1.0, llo)) break;
            }
            if (!ctx.done && ctx.res.monotonicity_violation && ctx.budget_left())
                lattice_fallback(ctx);
        }
    }

    ctx.res.converged = ctx.done;
    ctx.res.status = ctx.done ? FitStatus::Converged : FitStatus::BudgetExhausted;
    const double margin = opt.tau * std::sqrt(2.0 * std::max(ctx.res.lambda_star, 0.0));
    ctx.res.q1_near_boundary =
        ctx.res.q1_star < margin || ctx.res.q1_star > opt.Q - margin;
    return ctx.res;
}

FitResult fit(const FitProblem& problem) {
    FitProblem prob = problem;
    const auto p = validate_params(prob.params);
    if (prob.tau < 0.0) prob.tau = 2.0 * std::max(prob.dx, prob.dy);
    const double lmin_half = lambda_min(0.5 * p.Q, p.Q, p.H, p.g);
    FitOptions opt{};
    opt.Q = p.Q;
    opt.g = p.g;
    opt.H = p.H;
    opt.tau = prob.tau;
    opt.lambda_lo = prob.lambda_lo > 0.0 ? prob.lambda_lo : lmin_half * (1.0 + 1e-6);
    opt.lambda_hi = prob.lambda_hi > 0.0 ? prob.lambda_hi : 20.0 * opt.lambda_lo;
    opt.q1_lo = prob.q1_lo >= 0.0 ? prob.q1_lo : 0.02 * p.Q;
    opt.q1_hi = prob.q1_hi > 0.0 ? prob.q1_hi : 0.98 * p.Q;
    opt.budget = prob.budget;
    if (opt.tau < 2.0 * std::max(prob.dx, prob.dy) - 1e-15)
        throw DomainError("fit tolerance cannot be tighter than two grid cells");

    DetachmentEvaluator ev(prob);
    std::shared_ptr<StreamField> fitted;
    DetachmentFn fn = [&](double lambda, double q1) {
        Detachment d = ev(lambda, q1);
        const double f1 = d.k1H + 1.0, f2 = d.k2H - 1.0;
        if (std::abs(f1) <= prob.tau && std::abs(f2) <= prob.tau) fitted = ev.last_field();
        return d;
    };
    FitResult res = fit_generic(fn, opt);
    res.field = res.converged && fitted ? fitted : ev.last_field();
    return res;
}

std::vector<SweepCell> sweep_map(const FitProblem& problem, const std::vector<double>& lambdas,
                                 const std::vector<double>& q1s) {
    FitProblem prob = problem;
    if (prob.tau < 0.0) prob.tau = 2.0 * std::max(prob.dx, prob.dy);
    DetachmentEvaluator ev(prob);
    std::vector<SweepCell> cells;
    for (double lam : lambdas)
        for (double q1 : q1s) {
            SweepCell c{lam, q1};
            try {
                Detachment d = ev(lam, q1);
                c.k1H = d.k1H;
                c.k2H = d.k2H;
                c.ok = true;
            } catch (const Error& e) {
                c.error = e.what();
            }
            cells.push_back(std::move(c));
        }
    return cells;
}

} // namespace gravjet
