#include "gravjet/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace gravjet {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct IniFile {
    // section -> key -> (value, line)
    std::map<std::string, std::map<std::string, std::pair<std::string, int>>> data;
    std::string path;

    bool has(const std::string& sec, const std::string& key) const {
        auto s = data.find(sec);
        return s != data.end() && s->second.count(key) > 0;
    }
    std::string get(const std::string& sec, const std::string& key) const {
        return data.at(sec).at(key).first;
    }
    double get_num(const std::string& sec, const std::string& key) const {
        const auto& [val, line] = data.at(sec).at(key);
        try {
            std::size_t pos = 0;
            const double v = std::stod(val, &pos);
            if (pos != val.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ParseError(path + ":" + std::to_string(line) + ": '" + key +
                             "' is not a number: " + val);
        }
    }
};

IniFile read_ini(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path);
    IniFile ini;
    ini.path = path;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ParseError(path + ":" + std::to_string(lineno) + ": unterminated section");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        if (key.empty())
            throw ParseError(path + ":" + std::to_string(lineno) + ": empty key");
        ini.data[section][key] = {val, lineno};
    }
    return ini;
}

} // namespace

RunConfig parse_config(const std::string& path) {
    IniFile ini = read_ini(path);
    RunConfig cfg;
    // Track handled keys so typos surface as errors.
    std::map<std::string, std::map<std::string, bool>> seen;
    auto num = [&](const std::string& sec, const std::string& key, double& out) {
        if (ini.has(sec, key)) {
            out = ini.get_num(sec, key);
            seen[sec][key] = true;
        }
    };
    auto integer = [&](const std::string& sec, const std::string& key, int& out) {
        if (ini.has(sec, key)) {
            out = static_cast<int>(ini.get_num(sec, key));
            seen[sec][key] = true;
        }
    };
    auto str = [&](const std::string& sec, const std::string& key, std::string& out) {
        if (ini.has(sec, key)) {
            out = ini.get(sec, key);
            seen[sec][key] = true;
        }
    };
    auto boolean = [&](const std::string& sec, const std::string& key, bool& out) {
        if (ini.has(sec, key)) {
            const std::string v = ini.get(sec, key);
            if (v == "true" || v == "1")
                out = true;
            else if (v == "false" || v == "0")
                out = false;
            else
                throw ValidationError("field [" + sec + "] " + key + " must be true/false");
            seen[sec][key] = true;
        }
    };

    num("physical", "Q", cfg.physical.Q);
    num("physical", "g", cfg.physical.g);
    num("physical", "H", cfg.physical.H);
    num("physical", "H1", cfg.physical.H1);
    num("physical", "H2", cfg.physical.H2);
    num("physical", "p_atm", cfg.physical.p_atm);
    str("geometry", "type", cfg.geometry.type);
    str("geometry", "wall1", cfg.geometry.wall1_path);
    str("geometry", "wall2", cfg.geometry.wall2_path);
    num("numerics", "mu", cfg.mu);
    num("numerics", "dx", cfg.dx);
    num("numerics", "dy", cfg.dy);
    num("numerics", "solver_tol", cfg.solver_tol);
    integer("numerics", "max_sweeps", cfg.max_sweeps);
    num("numerics", "omega", cfg.omega);
    str("numerics", "sweep_mode", cfg.sweep_mode);
    num("fit", "lambda_lo", cfg.lambda_lo);
    num("fit", "lambda_hi", cfg.lambda_hi);
    num("fit", "q1_lo", cfg.q1_lo);
    num("fit", "q1_hi", cfg.q1_hi);
    num("fit", "tau", cfg.tau);
    integer("fit", "budget", cfg.budget);
    str("output", "dir", cfg.out_dir);
    boolean("output", "csv", cfg.write_csv);
    boolean("output", "vtk", cfg.write_vtk);
    num("point", "lambda", cfg.lambda);
    num("point", "q1", cfg.q1);
    num("point", "h1", cfg.h1);
    num("point", "h2", cfg.h2);
    num("sweep", "lambda_lo", cfg.sweep_lambda_lo);
    num("sweep", "lambda_hi", cfg.sweep_lambda_hi);
    num("sweep", "q1_lo", cfg.sweep_q1_lo);
    num("sweep", "q1_hi", cfg.sweep_q1_hi);
    integer("sweep", "lambda_count", cfg.sweep_lambda_count);
    integer("sweep", "q1_count", cfg.sweep_q1_count);

    for (const auto& [sec, keys] : ini.data)
        for (const auto& [key, val] : keys)
            if (!seen[sec][key])
                throw ParseError(ini.path + ":" + std::to_string(val.second) + ": unknown key '" +
                                 key + "' in section [" + sec + "]");

    // Semantic validation. Numeric module preconditions surface as
    // ValidationError naming the offending field.
    try {
        validate_params(cfg.physical);
    } catch (const FluxTooSmall& e) {
        throw ValidationError(std::string("[physical] Q: FluxTooSmall: ") + e.what());
    } catch (const GeometryOrderViolation& e) {
        throw ValidationError(std::string("[physical] H/H1/H2: ") + e.what());
    } catch (const NonPositive& e) {
        throw ValidationError(std::string("[physical]: ") + e.what());
    }
    if (cfg.geometry.type != "canonical" && cfg.geometry.type != "samples")
        throw ValidationError("[geometry] type must be 'canonical' or 'samples'");
    if (cfg.geometry.type == "samples") {
        for (const std::string* p : {&cfg.geometry.wall1_path, &cfg.geometry.wall2_path}) {
            if (p->empty()) throw ValidationError("[geometry] wall sample paths required");
            std::ifstream probe(*p);
            if (!probe) throw ValidationError("[geometry] wall sample file not found: " + *p);
        }
    }
    if (!(cfg.mu > 1.0)) throw ValidationError("[numerics] mu must exceed 1");
    if (!(cfg.dx > 0.0 && cfg.dy > 0.0)) throw ValidationError("[numerics] dx, dy must be positive");
    if (cfg.tau < 0.0) cfg.tau = 2.0 * std::max(cfg.dx, cfg.dy);
    if (cfg.sweep_mode != "colored" && cfg.sweep_mode != "lex")
        throw ValidationError("[numerics] sweep_mode must be 'colored' or 'lex'");
    return cfg;
}

void write_config_echo(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    out << "[physical]\n";
    out << "Q = " << fmt17(cfg.physical.Q) << "\n";
    out << "g = " << fmt17(cfg.physical.g) << "\n";
    out << "H = " << fmt17(cfg.physical.H) << "\n";
    out << "H1 = " << fmt17(cfg.physical.H1) << "\n";
    out << "H2 = " << fmt17(cfg.physical.H2) << "\n";
    out << "p_atm = " << fmt17(cfg.physical.p_atm) << "\n";
    out << "\n[geometry]\n";
    out << "type = " << cfg.geometry.type << "\n";
    if (!cfg.geometry.wall1_path.empty()) out << "wall1 = " << cfg.geometry.wall1_path << "\n";
    if (!cfg.geometry.wall2_path.empty()) out << "wall2 = " << cfg.geometry.wall2_path << "\n";
    out << "\n[numerics]\n";
    out << "mu = " << fmt17(cfg.mu) << "\n";
    out << "dx = " << fmt17(cfg.dx) << "\n";
    out << "dy = " << fmt17(cfg.dy) << "\n";
    out << "solver_tol = " << fmt17(cfg.solver_tol) << "\n";
    out << "max_sweeps = " << cfg.max_sweeps << "\n";
    out << "omega = " << fmt17(cfg.omega) << "\n";
    out << "sweep_mode = " << cfg.sweep_mode << "\n";
    out << "\n[fit]\n";
    out << "lambda_lo = " << fmt17(cfg.lambda_lo) << "\n";
    out << "lambda_hi = " << fmt17(cfg.lambda_hi) << "\n";
    out << "q1_lo = " << fmt17(cfg.q1_lo) << "\n";
    out << "q1_hi = " << fmt17(cfg.q1_hi) << "\n";
    out << "tau = " << fmt17(cfg.tau) << "\n";
    out << "budget = " << cfg.budget << "\n";
    out << "\n[output]\n";
    out << "dir = " << cfg.out_dir << "\n";
    out << "csv = " << (cfg.write_csv ? "true" : "false") << "\n";
    out << "vtk = " << (cfg.write_vtk ? "true" : "false") << "\n";
    if (cfg.lambda >= 0.0 || cfg.h1 >= 0.0) {
        out << "\n[point]\n";
        if (cfg.lambda >= 0.0) out << "lambda = " << fmt17(cfg.lambda) << "\n";
        if (cfg.q1 >= 0.0) out << "q1 = " << fmt17(cfg.q1) << "\n";
        if (cfg.h1 >= 0.0) out << "h1 = " << fmt17(cfg.h1) << "\n";
        if (cfg.h2 >= 0.0) out << "h2 = " << fmt17(cfg.h2) << "\n";
    }
}

NozzleGeometry make_geometry(const RunConfig& cfg) {
    if (cfg.geometry.type == "canonical")
        return build_nozzle(cfg.physical.H, cfg.physical.H1, cfg.physical.H2);
    auto [y1, x1] = load_wall_samples(cfg.geometry.wall1_path);
    auto [y2, x2] = load_wall_samples(cfg.geometry.wall2_path);
    return build_nozzle(std::move(y1), std::move(x1), std::move(y2), std::move(x2), cfg.physical.H,
                        cfg.physical.H1, cfg.physical.H2);
}

SolveParams make_solver_params(const RunConfig& cfg) {
    SolveParams sp;
    sp.tol = cfg.solver_tol;
    sp.max_sweeps = cfg.max_sweeps;
    sp.omega = cfg.omega;
    sp.mode = cfg.sweep_mode == "lex" ? SweepMode::Lex : SweepMode::Colored;
    return sp;
}

FitProblem make_fit_problem(const RunConfig& cfg) {
    FitProblem prob;
    prob.params = cfg.physical;
    prob.geometry = make_geometry(cfg);
    prob.mu = cfg.mu;
    prob.dx = cfg.dx;
    prob.dy = cfg.dy;
    prob.tau = cfg.tau;
    prob.lambda_lo = cfg.lambda_lo;
    prob.lambda_hi = cfg.lambda_hi;
    prob.q1_lo = cfg.q1_lo;
    prob.q1_hi = cfg.q1_hi;
    prob.budget = cfg.budget;
    prob.solver = make_solver_params(cfg);
    return prob;
}

void write_field_csv(const std::string& path, const StreamField& f, const FlowFields* flow) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    const Grid& g = *f.grid;
    const auto wet = flow ? flow->wet : wet_mask(f);
    out << (flow ? "x,y,psi,u,v,p,wet\n" : "x,y,psi,wet\n");
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const auto n = g.idx(i, j);
            if (g.cls[n] == NodeClass::Exterior) continue;
            out << fmt17(g.xs[i]) << ',' << fmt17(g.ys[j]) << ',' << fmt17(f.psi[n]);
            if (flow)
                out << ',' << fmt17(flow->u[n]) << ',' << fmt17(flow->v[n]) << ','
                    << fmt17(flow->p[n]);
            out << ',' << int(wet[n]) << '\n';
        }
}

void load_field_csv(const std::string& path, StreamField& f) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    const Grid& g = *f.grid;
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty field file");
    std::size_t row = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const auto n = g.idx(i, j);
            if (g.cls[n] == NodeClass::Exterior) continue;
            if (!std::getline(in, line))
                throw ParseError(path + ": too few rows for this grid");
            ++row;
            std::stringstream ss(line);
            std::string tok;
            double vals[3];
            for (int k = 0; k < 3; ++k) {
                if (!std::getline(ss, tok, ','))
                    throw ParseError(path + ":" + std::to_string(row + 1) + ": short row");
                vals[k] = std::strtod(tok.c_str(), nullptr);
            }
            if (std::abs(vals[0] - g.xs[i]) > 1e-9 || std::abs(vals[1] - g.ys[j]) > 1e-9)
                throw ParseError(path + ":" + std::to_string(row + 1) +
                                 ": node coordinates do not match the grid");
            f.psi[n] = vals[2];
        }
}

void write_boundaries_csv(const std::string& path, const FreeBoundarySet& fb) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "y,x,which\n";
    for (std::size_t k = 0; k < fb.k1.y.size(); ++k)
        out << fmt17(fb.k1.y[k]) << ',' << fmt17(fb.k1.x[k]) << ",1\n";
    for (std::size_t k = 0; k < fb.k2.y.size(); ++k)
        out << fmt17(fb.k2.y[k]) << ',' << fmt17(fb.k2.x[k]) << ",2\n";
}

void write_interface_csv(const std::string& path, const Interface& gamma) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "y,x\n";
    for (std::size_t k = 0; k < gamma.y.size(); ++k)
        out << fmt17(gamma.y[k]) << ',' << fmt17(gamma.x[k]) << "\n";
}

void write_trace_csv(const std::string& path, const std::vector<TraceEntry>& trace) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "iteration,lambda,q1,k1H,k2H,energy,sweeps\n";
    for (const auto& t : trace)
        out << t.iter << ',' << fmt17(t.lambda) << ',' << fmt17(t.q1) << ',' << fmt17(t.k1H) << ','
            << fmt17(t.k2H) << ',' << fmt17(t.energy) << ',' << t.sweeps << '\n';
}

void write_sweep_csv(const std::string& path, const std::vector<SweepCell>& cells) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "lambda,q1,k1H,k2H,F1,F2,ok,error\n";
    for (const auto& c : cells) {
        out << fmt17(c.lambda) << ',' << fmt17(c.q1) << ',' << fmt17(c.k1H) << ',' << fmt17(c.k2H)
            << ',' << fmt17(c.k1H + 1.0) << ',' << fmt17(c.k2H - 1.0) << ',' << (c.ok ? 1 : 0)
            << ',' << c.error << '\n';
    }
}

void write_vtk(const std::string& path, const StreamField& f, const FlowFields* flow) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    const Grid& g = *f.grid;
    out << "# vtk DataFile Version 3.0\n";
    out << "gravjet stream function snapshot\n";
    out << "ASCII\nDATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << g.nx << ' ' << g.ny << " 1\n";
    out << "ORIGIN " << fmt17(g.xs[0]) << ' ' << fmt17(g.ys[0]) << " 0\n";
    out << "SPACING " << fmt17(g.dx) << ' ' << fmt17(g.dy) << " 1\n";
    out << "POINT_DATA " << g.size() << "\n";
    auto scalar = [&](const char* name, auto&& value) {
        out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) out << value(g.idx(i, j)) << ' ';
            out << '\n';
        }
    };
    scalar("psi", [&](std::size_t n) { return fmt17(f.psi[n]); });
    scalar("domain", [&](std::size_t n) { return std::to_string(static_cast<int>(g.cls[n])); });
    if (flow) {
        scalar("u", [&](std::size_t n) { return fmt17(flow->u[n]); });
        scalar("v", [&](std::size_t n) { return fmt17(flow->v[n]); });
        scalar("p", [&](std::size_t n) { return fmt17(flow->p[n]); });
        scalar("wet", [&](std::size_t n) { return std::to_string(int(flow->wet[n])); });
    }
}

std::pair<std::vector<double>, std::vector<double>> load_wall_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("wall sample file not found: " + path);
    std::vector<double> ys, xs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (lineno == 1 && t.find("y") != std::string::npos && t.find("x") != std::string::npos)
            continue; // header
        std::stringstream ss(t);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected 'y,x'");
        ys.push_back(std::strtod(a.c_str(), nullptr));
        xs.push_back(std::strtod(b.c_str(), nullptr));
    }
    return {ys, xs};
}

} // namespace gravjet
