#pragma once

#include <cstdint>
#include <vector>

#include "gravjet/grid.hpp"

namespace gravjet {

struct FieldParams {
    double lambda, Q1, Q, g, H;
    double h1, h2;
};

// Discrete stream function on a Grid. psi holds one value per node; Dirichlet
// nodes carry the boundary data exactly and are never touched by sweeps.
struct StreamField {
    const Grid* grid = nullptr;
    FieldParams prm{};
    std::vector<double> psi;
    std::vector<double> cell_w; // penalty weight (2*lambda - 2*g*yc)*dx*dy, 0 above the orifice
};

enum class SweepMode { Colored, Lex };

struct SolveParams {
    double tol = 1e-10;    // stop when per-sweep relative energy decrease <= tol
    int max_sweeps = 0;    // 0: 50 * sqrt(interior node count)
    double omega = 1.85;   // over-relaxation, accepted only when it lowers energy
    SweepMode mode = SweepMode::Colored;
    bool full_energy_each_sweep = false; // re-sum the energy every sweep (diagnostics)
    int anchor_every = 64;               // otherwise re-sum this often
};

struct SweepStats {
    double decrease = 0.0;   // sum of local energy decreases, >= 0 by construction
    double max_update = 0.0;
};

struct SolveDiagnostics {
    int sweeps = 0;
    double final_energy = 0.0;
    double max_update = 0.0;
    bool converged = false;
    std::vector<double> energies; // energy after each sweep, energies[0] = initial
    std::size_t near_tie_count = 0;
};

// Interior init: midpoint of the lower/upper sheet barriers below the orifice,
// clamped channel profile above it. Dirichlet nodes get boundary_values.
StreamField init_field(const Grid& grid, const DownstreamState& s, double Q, double g);

// Re-impose boundary data for new parameters while keeping interior values
// (warm start). Interior values are clamped to [0, Q].
void rebind_field(StreamField& f, const DownstreamState& s, double Q, double g);

// J = sum over active cells of the bilinear gradient energy plus the wet-cell
// penalty. A cell is wet iff its 4-corner average is strictly in (0, Q) and at
// least one corner is strictly in (0, Q). Kahan-compensated, deterministic.
double energy(const StreamField& f);

SweepStats sweep_serial(StreamField& f, double omega, bool forward);
SweepStats sweep_colored(StreamField& f, double omega);

SolveDiagnostics solve(StreamField& f, const SolveParams& params = {});

std::vector<std::uint8_t> wet_mask(const StreamField& f); // per node, 0 < psi < Q

// Synthetic rectangle grid [-mu, mu] x [0, H] with a Dirichlet ring, used by
// tests and micro-benchmarks; no nozzle region above the orifice row.
Grid build_rect_grid(double mu, double H, double dx, double dy);

} // namespace gravjet
