#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lamg/coarsening.hpp"
#include "lamg/fem.hpp"
#include "lamg/multilevel.hpp"

namespace lamg {

/// Full run configuration; defaults follow the reference parameter table
/// (tri-cube kernel of radius 4, correlation and strength thresholds 1e-2,
/// caliber 3, 4 maxvol iterations, Gauss-Seidel, K = 8, 4 initial sweeps).
struct RunConfig {
    // problem
    std::string problem_source = "mesh";  // mesh | matrix_market
    int mesh_levels = 2;
    int mesh_fan = 6;
    double alpha = 0.0;
    double epsilon = 1.0;
    std::string matrix_path;

    KernelSpec kernel;
    std::string kernel_distance = "graph";

    LarsOptions lars;
    double strength_threshold = 1e-2;
    int maxvol_iterations = 4;

    SmootherConfig smoother;

    BootstrapConfig bootstrap;

    std::uint64_t seed = 1;
    std::string out_dir = ".";

    std::map<std::string, std::string> explicit_keys;  // keys set by file or --set

    CoarseningParams coarsening_params() const;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Applies `key=value` pairs; unknown keys or malformed values throw
/// ConfigError.
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

/// Parses a flat key=value file ('#' comments, blank lines ignored).
void load_config_file(RunConfig& cfg, const std::string& path);

/// Canonical resolved listing, one key=value per line, for provenance
/// headers. Deterministic formatting.
std::vector<std::string> resolved_config_lines(const RunConfig& cfg);

/// The assembled or loaded problem plus metadata for reporting.
struct Problem {
    SparseMatrix A;
    std::vector<double> b;
    Mesh mesh;                      // empty for loaded matrices
    std::vector<int> interior_map;  // empty for loaded matrices
    bool has_mesh = false;
};

Problem make_problem(const RunConfig& cfg);

/// Full setup (initial hierarchy + bootstrap cycles per config/schedule).
struct PipelineResult {
    SetupResult setup;
    int cycles_used = 0;
};

PipelineResult run_setup(const Problem& problem, const RunConfig& cfg);

/// Two-grid sub-hierarchy (finest two levels with a direct coarse solve);
/// only valid when the hierarchy has >= 2 levels.
Hierarchy two_level_slice(const Hierarchy& h);

}  // namespace lamg
