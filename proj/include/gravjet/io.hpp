#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gravjet/fields.hpp"
#include "gravjet/fitter.hpp"

namespace gravjet {

struct GeometryConfig {
    std::string type = "canonical"; // "canonical" | "samples"
    std::string wall1_path, wall2_path;
};

// Effective run configuration: INI-style sections [physical], [geometry],
// [numerics], [fit], [output], [point], [sweep].
struct RunConfig {
    JetParameters physical{3.0, 1.0, 1.0, 2.0, 3.0, 0.0};
    GeometryConfig geometry;
    // numerics
    double mu = 6.0;
    double dx = 1.0 / 64.0, dy = 1.0 / 64.0;
    double solver_tol = 1e-10;
    int max_sweeps = 0;
    double omega = 1.85;
    std::string sweep_mode = "colored"; // "colored" | "lex"
    // fit
    double lambda_lo = -1.0, lambda_hi = -1.0, q1_lo = -1.0, q1_hi = -1.0;
    double tau = -1.0;
    int budget = 60;
    // output
    std::string out_dir = "gravjet-run";
    bool write_csv = true;
    bool write_vtk = false;
    // point inputs for `params` / `solve`
    double lambda = -1.0, q1 = -1.0, h1 = -1.0, h2 = -1.0;
    // sweep lattice
    double sweep_lambda_lo = -1.0, sweep_lambda_hi = -1.0;
    double sweep_q1_lo = -1.0, sweep_q1_hi = -1.0;
    int sweep_lambda_count = 5, sweep_q1_count = 5;
};

RunConfig parse_config(const std::string& path);
void write_config_echo(const RunConfig& cfg, const std::string& path);

NozzleGeometry make_geometry(const RunConfig& cfg);
SolveParams make_solver_params(const RunConfig& cfg);
FitProblem make_fit_problem(const RunConfig& cfg);

std::string fmt17(double v);

// Field snapshot: one row per non-exterior node, in node (row-major) order.
void write_field_csv(const std::string& path, const StreamField& f, const FlowFields* flow);
// Reads psi back into a field built on an identical grid.
void load_field_csv(const std::string& path, StreamField& f);

void write_boundaries_csv(const std::string& path, const FreeBoundarySet& fb);
void write_interface_csv(const std::string& path, const Interface& gamma);
void write_trace_csv(const std::string& path, const std::vector<TraceEntry>& trace);
void write_sweep_csv(const std::string& path, const std::vector<SweepCell>& cells);
void write_vtk(const std::string& path, const StreamField& f, const FlowFields* flow);

// (y, x) sample table with a header line, one pair per line.
std::pair<std::vector<double>, std::vector<double>> load_wall_samples(const std::string& path);

} // namespace gravjet
