#include "lamg/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lamg/matrix_market.hpp"

namespace lamg {

CoarseningParams RunConfig::coarsening_params() const {
    CoarseningParams p;
    p.kernel = kernel;
    p.lars = lars;
    p.strength_threshold = strength_threshold;
    p.maxvol_iterations = maxvol_iterations;
    return p;
}

namespace {

int parse_int(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("config: invalid integer for " + key + ": '" + value + "'");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("config: invalid number for " + key + ": '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config: invalid boolean for " + key + ": '" + value + "'");
}

std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "problem.source") {
        if (value != "mesh" && value != "matrix_market")
            throw ConfigError("config: problem.source must be mesh or matrix_market");
        cfg.problem_source = value;
    } else if (key == "problem.mesh_levels") {
        cfg.mesh_levels = parse_int(key, value);
    } else if (key == "problem.mesh_fan") {
        cfg.mesh_fan = parse_int(key, value);
    } else if (key == "problem.alpha") {
        cfg.alpha = parse_double(key, value);
    } else if (key == "problem.epsilon") {
        cfg.epsilon = parse_double(key, value);
    } else if (key == "problem.matrix_path") {
        cfg.matrix_path = value;
    } else if (key == "kernel.function") {
        if (value == "nearest_neighbor")
            cfg.kernel.kind = KernelSpec::Kind::nearest_neighbor;
        else if (value == "tri_cube")
            cfg.kernel.kind = KernelSpec::Kind::tri_cube;
        else
            throw ConfigError("config: kernel.function must be nearest_neighbor or tri_cube");
    } else if (key == "kernel.radius") {
        cfg.kernel.radius = parse_int(key, value);
    } else if (key == "kernel.distance") {
        if (value != "graph") throw ConfigError("config: kernel.distance supports only 'graph'");
        cfg.kernel_distance = value;
    } else if (key == "lars.correlation_threshold") {
        cfg.lars.correlation_threshold = parse_double(key, value);
    } else if (key == "lars.caliber") {
        cfg.lars.caliber = parse_int(key, value);
    } else if (key == "lars.max_active_factor") {
        cfg.lars.max_active_factor = parse_double(key, value);
    } else if (key == "lars.sign_constrained") {
        cfg.lars.sign_constrained = parse_bool(key, value);
    } else if (key == "coarsening.strength_threshold") {
        cfg.strength_threshold = parse_double(key, value);
    } else if (key == "coarsening.maxvol_iterations") {
        cfg.maxvol_iterations = parse_int(key, value);
    } else if (key == "smoother.kind") {
        if (value == "gauss_seidel")
            cfg.smoother.kind = SmootherKind::gauss_seidel;
        else if (value == "block_gauss_seidel")
            cfg.smoother.kind = SmootherKind::block_gauss_seidel;
        else
            throw ConfigError("config: smoother.kind must be gauss_seidel or block_gauss_seidel");
    } else if (key == "smoother.blocks") {
        cfg.smoother.nblocks = parse_int(key, value);
    } else if (key == "bootstrap.test_vectors") {
        cfg.bootstrap.K = parse_int(key, value);
    } else if (key == "bootstrap.initial_smoothing") {
        cfg.bootstrap.nu = parse_int(key, value);
    } else if (key == "bootstrap.setup_cycles") {
        cfg.bootstrap.setup_cycles = parse_int(key, value);
    } else if (key == "bootstrap.eigenvectors") {
        cfg.bootstrap.n_eigenvectors = parse_int(key, value);
    } else if (key == "bootstrap.coarsest_cap") {
        cfg.bootstrap.coarsest_cap = parse_int(key, value);
    } else if (key == "solver.tolerance") {
        cfg.bootstrap.pcg_tolerance = parse_double(key, value);
    } else if (key == "solver.max_iterations") {
        cfg.bootstrap.pcg_max_iterations = parse_int(key, value);
    } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(std::strtoull(value.c_str(), nullptr, 10));
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
    cfg.explicit_keys[key] = value;
}

void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        if (line[start] == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: missing '=' at " + path + ":" + std::to_string(lineno));
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t");
            size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

std::vector<std::string> resolved_config_lines(const RunConfig& cfg) {
    std::vector<std::string> lines;
    auto add = [&](const std::string& k, const std::string& v) { lines.push_back(k + "=" + v); };
    add("problem.source", cfg.problem_source);
    add("problem.mesh_levels", std::to_string(cfg.mesh_levels));
    add("problem.mesh_fan", std::to_string(cfg.mesh_fan));
    add("problem.alpha", format_double(cfg.alpha));
    add("problem.epsilon", format_double(cfg.epsilon));
    add("problem.matrix_path", cfg.matrix_path);
    add("kernel.function",
        cfg.kernel.kind == KernelSpec::Kind::tri_cube ? "tri_cube" : "nearest_neighbor");
    add("kernel.radius", std::to_string(cfg.kernel.radius));
    add("kernel.distance", cfg.kernel_distance);
    add("lars.correlation_threshold", format_double(cfg.lars.correlation_threshold));
    add("lars.caliber", std::to_string(cfg.lars.caliber));
    add("lars.max_active_factor", format_double(cfg.lars.max_active_factor));
    add("lars.sign_constrained", cfg.lars.sign_constrained ? "true" : "false");
    add("coarsening.strength_threshold", format_double(cfg.strength_threshold));
    add("coarsening.maxvol_iterations", std::to_string(cfg.maxvol_iterations));
    add("smoother.kind",
        cfg.smoother.kind == SmootherKind::gauss_seidel ? "gauss_seidel" : "block_gauss_seidel");
    add("smoother.blocks", std::to_string(cfg.smoother.nblocks));
    add("bootstrap.test_vectors", std::to_string(cfg.bootstrap.K));
    add("bootstrap.initial_smoothing", std::to_string(cfg.bootstrap.nu));
    add("bootstrap.setup_cycles", std::to_string(cfg.bootstrap.setup_cycles));
    add("bootstrap.eigenvectors", std::to_string(cfg.bootstrap.n_eigenvectors));
    add("bootstrap.coarsest_cap", std::to_string(cfg.bootstrap.coarsest_cap));
    add("solver.tolerance", format_double(cfg.bootstrap.pcg_tolerance));
    add("solver.max_iterations", std::to_string(cfg.bootstrap.pcg_max_iterations));
    add("seed", std::to_string(cfg.seed));
    return lines;
}

Problem make_problem(const RunConfig& cfg) {
    Problem p;
    if (cfg.problem_source == "mesh") {
        p.mesh = disc_mesh(cfg.mesh_levels, cfg.mesh_fan);
        p.has_mesh = true;
        DiffusionCoefficients c = coefficients_from_angle({cfg.alpha, cfg.epsilon});
        AssembledSystem sys = assemble(p.mesh, c);
        p.A = std::move(sys.A);
        p.interior_map = std::move(sys.interior_map);
        p.b = assemble_unit_load(p.mesh, p.interior_map);
    } else {
        p.A = read_matrix_market_file(cfg.matrix_path);
        if (p.A.nrows != p.A.ncols) throw ConfigError("config: loaded matrix is not square");
        NormalSampler rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
        p.b.resize(p.A.nrows);
        for (double& v : p.b) v = rng.next();
    }
    return p;
}

PipelineResult run_setup(const Problem& problem, const RunConfig& cfg) {
    PipelineResult out;
    CoarseningParams cparams = cfg.coarsening_params();
    out.setup = setup_initial(problem.A, cfg.bootstrap, cparams, cfg.smoother, cfg.seed);
    int cycles = resolve_setup_cycles(cfg.bootstrap, problem.A.nrows);
    for (int c = 0; c < cycles; ++c) {
        if (out.setup.hierarchy.depth() < 2) break;
        out.setup = bootstrap_cycle(out.setup, cfg.bootstrap, cparams, cfg.smoother);
        ++out.cycles_used;
    }
    return out;
}

Hierarchy two_level_slice(const Hierarchy& h) {
    if (h.depth() < 2) throw std::invalid_argument("two_level_slice: need >= 2 levels");
    Hierarchy two;
    Level fine;
    fine.A = h.levels[0].A;
    fine.P = h.levels[0].P;
    fine.Pt = h.levels[0].Pt;
    fine.smoother = h.levels[0].smoother;
    Level coarse;
    coarse.A = h.levels[1].A;
    coarse.smoother = h.levels[1].smoother;
    two.levels.push_back(std::move(fine));
    two.levels.push_back(std::move(coarse));
    two.coarsest_solver = cholesky(dense_from_sparse(two.levels[1].A));
    return two;
}

}  // namespace lamg
