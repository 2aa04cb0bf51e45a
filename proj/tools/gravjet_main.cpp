// gravjet: steady two-dimensional impinging jet flows under gravity, computed
// by discrete minimization of a free-boundary functional on truncated domains
// and continuation of the two free parameters (lambda, Q1) until the free
// streamlines detach at the nozzle endpoints.
//
// Exit codes: 0 success, 1 configuration error, 2 solver error, 3 fit error,
// 4 verification failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "gravjet/io.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using nlohmann::json;
using namespace gravjet;
namespace fs = std::filesystem;

namespace {

void apply_thread_cap() {
#ifdef _OPENMP
    if (const char* env = std::getenv("GRAVJET_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) omp_set_num_threads(n);
    }
#endif
}

json params_json(const JetParameters& p) {
    return json{{"Q", p.Q},   {"g", p.g},   {"H", p.H},
                {"H1", p.H1}, {"H2", p.H2}, {"p_atm", p.p_atm}};
}

json state_json(const DownstreamState& s) {
    return json{{"lambda", s.lambda}, {"Q1", s.Q1}, {"h1", s.h1}, {"h2", s.h2}};
}

json states_json(const std::array<AsymptoticState, 3>& st) {
    json arr = json::array();
    for (const auto& a : st) {
        const char* name = a.region == Region::upstream ? "upstream"
                           : a.region == Region::left_downstream ? "left_downstream"
                                                                 : "right_downstream";
        arr.push_back(json{{"region", name},
                           {"u_inf", a.u_inf},
                           {"band", {a.band_lo, a.band_hi}},
                           {"pressure_intercept", a.p_intercept},
                           {"pressure_slope", a.p_slope}});
    }
    return arr;
}

json report_json(const VerificationReport& rep) {
    json items = json::array();
    for (const auto& it : rep.items)
        items.push_back(json{{"name", it.name},
                             {"pass", it.pass},
                             {"measured", it.measured},
                             {"threshold", it.threshold},
                             {"detail", it.detail}});
    return json{{"all_pass", rep.all_pass()}, {"items", items}};
}

DownstreamState point_state(const RunConfig& cfg) {
    if (cfg.h1 >= 0.0 && cfg.h2 >= 0.0) return state_from_heights(cfg.h1, cfg.h2, cfg.physical);
    if (cfg.lambda > 0.0 && cfg.q1 >= 0.0) return downstream_state(cfg.lambda, cfg.q1, cfg.physical);
    throw ValidationError("provide either (lambda, q1) or (h1, h2) in [point] or via flags");
}

struct RunDir {
    fs::path dir;
    explicit RunDir(const std::string& path) : dir(path) { fs::create_directories(dir); }
    std::string file(const std::string& name) const { return (dir / name).string(); }
};

// One full solve at a fixed parameter point, with artifact export.
int do_solve(const RunConfig& cfg, bool quiet = false) {
    const auto state = point_state(cfg);
    const auto geom = make_geometry(cfg);
    const Grid grid = build_grid(gravjet::truncate(geom, cfg.mu), cfg.dx, cfg.dy);
    StreamField f = init_field(grid, state, cfg.physical.Q, cfg.physical.g);
    const auto t0 = std::chrono::steady_clock::now();
    const auto diag = solve(f, make_solver_params(cfg));
    const auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const auto fb = extract_boundaries(f);
    const auto res = gradient_residual(f, fb);
    FlowFields flow = velocity(f);
    pressure(flow, f, cfg.physical.p_atm);

    RunDir out(cfg.out_dir);
    write_config_echo(cfg, out.file("config_echo.ini"));
    if (cfg.write_csv) {
        write_field_csv(out.file("fields.csv"), f, &flow);
        write_boundaries_csv(out.file("boundaries.csv"), fb);
        const auto gamma = extract_interface(f, cfg.physical);
        write_interface_csv(out.file("interface.csv"), gamma);
    }
    if (cfg.write_vtk) write_vtk(out.file("fields.vtk"), f, &flow);

    json summary{{"type", "solve"},
                 {"params", params_json(cfg.physical)},
                 {"point", state_json(state)},
                 {"numerics",
                  {{"mu", cfg.mu},
                   {"dx", grid.dx},
                   {"dy", grid.dy},
                   {"nx", grid.nx},
                   {"ny", grid.ny},
                   {"omega", cfg.omega},
                   {"sweep_mode", cfg.sweep_mode},
                   {"solver_tol", cfg.solver_tol}}},
                 {"result",
                  {{"energy", diag.final_energy},
                   {"sweeps", diag.sweeps},
                   {"converged", diag.converged},
                   {"near_tie_nodes", diag.near_tie_count},
                   {"detach1", fb.k1.detach},
                   {"detach2", fb.k2.detach},
                   {"asymptote1", fb.k1.asymptote},
                   {"asymptote2", fb.k2.asymptote},
                   {"residual_median", res.median},
                   {"residual_p05", res.p05},
                   {"residual_p95", res.p95}}}};
    std::ofstream(out.file("summary.json")) << summary.dump(2) << "\n";
    std::ofstream(out.file("run.log")) << "solve wall seconds: " << dt << "\n";
    if (!quiet) std::cout << summary.dump(2) << "\n";
    return diag.converged ? 0 : 2;
}

int do_fit(const RunConfig& cfg) {
    FitProblem prob = make_fit_problem(cfg);
    const FitResult res = fit(prob);

    RunDir out(cfg.out_dir);
    write_config_echo(cfg, out.file("config_echo.ini"));
    write_trace_csv(out.file("trace.csv"), res.trace);

    json summary{{"type", "fit"},
                 {"params", params_json(cfg.physical)},
                 {"fit",
                  {{"lambda_star", res.lambda_star},
                   {"q1_star", res.q1_star},
                   {"k1H", res.k1H},
                   {"k2H", res.k2H},
                   {"F1", res.F1},
                   {"F2", res.F2},
                   {"tau", prob.tau},
                   {"solves", res.solves},
                   {"converged", res.converged},
                   {"q1_near_boundary", res.q1_near_boundary},
                   {"monotonicity_fallback", res.monotonicity_violation}}}};
    if (res.field) {
        StreamField& f = *res.field;
        FlowFields flow = velocity(f);
        pressure(flow, f, cfg.physical.p_atm);
        summary["point"] = state_json(
            DownstreamState{f.prm.lambda, f.prm.Q1, f.prm.h1, f.prm.h2});
        if (cfg.write_csv) {
            write_field_csv(out.file("fields.csv"), f, &flow);
            write_boundaries_csv(out.file("boundaries.csv"), extract_boundaries(f));
            write_interface_csv(out.file("interface.csv"), extract_interface(f, cfg.physical));
        }
        if (cfg.write_vtk) write_vtk(out.file("fields.vtk"), f, &flow);
    }
    std::ofstream(out.file("summary.json")) << summary.dump(2) << "\n";
    std::cout << summary.dump(2) << "\n";
    return res.converged ? 0 : 3;
}

int do_params(const RunConfig& cfg) {
    const auto state = point_state(cfg);
    check_state(state, cfg.physical);
    const auto st = asymptotic_states(state, cfg.physical);
    json outj{{"type", "params"},
              {"params", params_json(cfg.physical)},
              {"state", state_json(state)},
              {"asymptotic_states", states_json(st)}};
    std::cout << outj.dump(2) << "\n";
    if (!cfg.out_dir.empty()) {
        RunDir out(cfg.out_dir);
        std::ofstream(out.file("params.json")) << outj.dump(2) << "\n";
    }
    return 0;
}

int do_sweep(const RunConfig& cfg) {
    FitProblem prob = make_fit_problem(cfg);
    const double q = cfg.physical.Q;
    const double llo = cfg.sweep_lambda_lo > 0.0
                           ? cfg.sweep_lambda_lo
                           : lambda_min(q / 2, q, cfg.physical.H, cfg.physical.g) * 1.01;
    const double lhi = cfg.sweep_lambda_hi > 0.0 ? cfg.sweep_lambda_hi : 3.0 * llo;
    const double qlo = cfg.sweep_q1_lo >= 0.0 ? cfg.sweep_q1_lo : 0.25 * q;
    const double qhi = cfg.sweep_q1_hi > 0.0 ? cfg.sweep_q1_hi : 0.75 * q;
    std::vector<double> ls, qs;
    for (int a = 0; a < cfg.sweep_lambda_count; ++a)
        ls.push_back(cfg.sweep_lambda_count > 1
                         ? llo + (lhi - llo) * a / (cfg.sweep_lambda_count - 1.0)
                         : llo);
    for (int b = 0; b < cfg.sweep_q1_count; ++b)
        qs.push_back(cfg.sweep_q1_count > 1 ? qlo + (qhi - qlo) * b / (cfg.sweep_q1_count - 1.0)
                                            : qlo);
    const auto cells = sweep_map(prob, ls, qs);
    RunDir out(cfg.out_dir);
    write_config_echo(cfg, out.file("config_echo.ini"));
    write_sweep_csv(out.file("sweep.csv"), cells);
    int bad = 0;
    for (const auto& c : cells)
        if (!c.ok) ++bad;
    std::cout << "sweep: " << cells.size() << " cells, " << bad << " failed\n";
    return 0;
}

// Rebuild the run from its echoed config, load the stored field, re-check.
int do_verify(const std::string& run_dir) {
    const fs::path dir(run_dir);
    RunConfig cfg = parse_config((dir / "config_echo.ini").string());
    std::ifstream sin(dir / "summary.json");
    if (!sin) throw ValidationError("missing summary.json in " + run_dir);
    json summary = json::parse(sin);
    const double lambda = summary["point"]["lambda"].get<double>();
    const double q1 = summary["point"]["Q1"].get<double>();
    const auto state = downstream_state(lambda, q1, cfg.physical);

    const auto geom = make_geometry(cfg);
    const Grid grid = build_grid(gravjet::truncate(geom, cfg.mu), cfg.dx, cfg.dy);
    StreamField f = init_field(grid, state, cfg.physical.Q, cfg.physical.g);
    load_field_csv((dir / "fields.csv").string(), f);

    const auto rep = verify_all(f, cfg.physical, cfg.tau);
    for (const auto& it : rep.items)
        std::cout << (it.pass ? "PASS " : "FAIL ") << it.name << " measured=" << fmt17(it.measured)
                  << " threshold=" << fmt17(it.threshold)
                  << (it.detail.empty() ? "" : "  (" + it.detail + ")") << "\n";
    std::ofstream((dir / "verify.json").string()) << report_json(rep).dump(2) << "\n";
    return rep.all_pass() ? 0 : 4;
}

int do_export(const std::string& run_dir, const std::string& format) {
    const fs::path dir(run_dir);
    RunConfig cfg = parse_config((dir / "config_echo.ini").string());
    std::ifstream sin(dir / "summary.json");
    if (!sin) throw ValidationError("missing summary.json in " + run_dir);
    json summary = json::parse(sin);
    const auto state = downstream_state(summary["point"]["lambda"].get<double>(),
                                        summary["point"]["Q1"].get<double>(), cfg.physical);
    const auto geom = make_geometry(cfg);
    const Grid grid = build_grid(gravjet::truncate(geom, cfg.mu), cfg.dx, cfg.dy);
    StreamField f = init_field(grid, state, cfg.physical.Q, cfg.physical.g);
    load_field_csv((dir / "fields.csv").string(), f);
    FlowFields flow = velocity(f);
    pressure(flow, f, cfg.physical.p_atm);
    if (format == "vtk")
        write_vtk((dir / "fields.vtk").string(), f, &flow);
    else
        write_field_csv((dir / "fields.csv").string(), f, &flow);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    apply_thread_cap();
    CLI::App app{"gravjet: gravity-driven impinging jet free-boundary solver"};
    app.require_subcommand(1);

    std::string config_path, out_override, run_dir, format = "vtk";
    double mu_override = -1.0, dx_override = -1.0, tau_override = -1.0;
    double lambda_flag = -1.0, q1_flag = -1.0, h1_flag = -1.0, h2_flag = -1.0;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", config_path, "run configuration file");
        if (needs_config) opt->required();
        cmd->add_option("--out", out_override, "output directory override");
        cmd->add_option("--mu", mu_override, "truncation half-width override");
        cmd->add_option("--dx", dx_override, "grid spacing override (sets dy too)");
        cmd->add_option("--tau", tau_override, "fit tolerance override");
    };

    auto* c_params = app.add_subcommand("params", "flux algebra at one parameter point");
    add_common(c_params, true);
    c_params->add_option("--lambda", lambda_flag, "Bernoulli constant");
    c_params->add_option("--q1", q1_flag, "left effluent flux");
    c_params->add_option("--h1", h1_flag, "left sheet thickness");
    c_params->add_option("--h2", h2_flag, "right sheet thickness");

    auto* c_solve = app.add_subcommand("solve", "one truncated solve at fixed (lambda, Q1)");
    add_common(c_solve, true);
    c_solve->add_option("--lambda", lambda_flag, "Bernoulli constant");
    c_solve->add_option("--q1", q1_flag, "left effluent flux");
    c_solve->add_option("--h1", h1_flag, "left sheet thickness");
    c_solve->add_option("--h2", h2_flag, "right sheet thickness");

    auto* c_fit = app.add_subcommand("fit", "continuation of (lambda, Q1) to the continuous fit");
    add_common(c_fit, true);

    auto* c_sweep = app.add_subcommand("sweep", "detachment map over a parameter lattice");
    add_common(c_sweep, true);

    auto* c_verify = app.add_subcommand("verify", "re-check a stored run directory");
    c_verify->add_option("--run", run_dir, "run directory")->required();

    auto* c_export = app.add_subcommand("export", "re-emit stored fields");
    c_export->add_option("--run", run_dir, "run directory")->required();
    c_export->add_option("--format", format, "vtk or csv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_verify->parsed()) return do_verify(run_dir);
        if (c_export->parsed()) return do_export(run_dir, format);

        RunConfig cfg = parse_config(config_path);
        if (!out_override.empty()) cfg.out_dir = out_override;
        if (mu_override > 0.0) cfg.mu = mu_override;
        if (dx_override > 0.0) {
            cfg.dx = dx_override;
            cfg.dy = dx_override;
            if (tau_override <= 0.0) cfg.tau = 2.0 * dx_override;
        }
        if (tau_override > 0.0) cfg.tau = tau_override;
        if (lambda_flag > 0.0) cfg.lambda = lambda_flag;
        if (q1_flag >= 0.0) cfg.q1 = q1_flag;
        if (h1_flag >= 0.0) cfg.h1 = h1_flag;
        if (h2_flag >= 0.0) cfg.h2 = h2_flag;

        if (c_params->parsed()) return do_params(cfg);
        if (c_solve->parsed()) return do_solve(cfg);
        if (c_fit->parsed()) return do_fit(cfg);
        if (c_sweep->parsed()) return do_sweep(cfg);
    } catch (const ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const NormalizationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const CrossingWalls& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const TruncationTooSmall& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const ResolutionTooCoarse& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const FluxTooSmall& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const GeometryOrderViolation& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const NonPositive& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const NoBracket& e) {
        std::cerr << "fit error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
