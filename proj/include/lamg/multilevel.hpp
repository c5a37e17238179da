#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lamg/coarsening.hpp"
#include "lamg/dense.hpp"
#include "lamg/smoothers.hpp"
#include "lamg/sparse.hpp"

namespace lamg {

/// Smoother selection for a hierarchy; the per-level block partitions are
/// built from the level matrices.
struct SmootherConfig {
    SmootherKind kind = SmootherKind::gauss_seidel;
    int nblocks = 6;  // block Gauss-Seidel only
};

struct Level {
    SparseMatrix A;
    std::optional<SparseMatrix> P;   // absent on the coarsest level
    std::optional<SparseMatrix> Pt;  // cached restriction P^T
    SmootherSpec smoother;
    std::optional<Interpolation> interp_meta;
    CoarseningReport coarsening_report;
};

struct Hierarchy {
    std::vector<Level> levels;
    std::optional<CholeskyFactor> coarsest_solver;

    int depth() const { return static_cast<int>(levels.size()); }
    int finest_size() const { return levels.empty() ? 0 : levels.front().A.nrows; }
};

struct BootstrapConfig {
    int K = 8;                  // test vectors
    int nu = 4;                 // smoothing sweeps (initial and per level)
    int setup_cycles = -1;      // -1: pick by problem size
    int n_eigenvectors = 0;     // 0: use K
    int coarsest_cap = 60;
    double pcg_tolerance = 1e-10;
    int pcg_max_iterations = 500;
};

int resolve_setup_cycles(const BootstrapConfig& cfg, int n);
int resolve_eigenvector_count(const BootstrapConfig& cfg);

struct SolveReport {
    int iterations = 0;
    bool converged = false;
    std::vector<double> residual_history;  // length iterations + 1
    int setup_cycles_used = 0;
    std::vector<int> level_sizes;
    std::vector<double> coarsening_ratios;
    std::optional<double> convergence_factor;
};

struct SetupResult {
    Hierarchy hierarchy;
    std::vector<TestVectorSet> level_vectors;  // per level, as used for coarsening
};

/// Builds the initial hierarchy: seeded random test vectors smoothed on the
/// homogeneous system, least angle regression coarsening, Galerkin products,
/// restricted and re-smoothed vectors per coarse level.
SetupResult setup_initial(const SparseMatrix& A, const BootstrapConfig& cfg,
                          const CoarseningParams& cparams, const SmootherConfig& scfg,
                          std::uint64_t seed);

/// Hierarchy build from a given finest-level vector set (shared by
/// setup_initial and bootstrap_cycle).
SetupResult build_hierarchy(const SparseMatrix& A, TestVectorSet finest_vectors,
                            const BootstrapConfig& cfg, const CoarseningParams& cparams,
                            const SmootherConfig& scfg);

/// One bootstrap setup cycle: solves the coarsest-grid generalized
/// eigenproblem A_c V = lambda P^T P V for the composite interpolation P,
/// prolongates and smooths the eigenvectors, and rebuilds the hierarchy with
/// the augmented vector set.
SetupResult bootstrap_cycle(const SetupResult& current, const BootstrapConfig& cfg,
                            const CoarseningParams& cparams, const SmootherConfig& scfg);

/// One V(1,1)-cycle: forward pre-smoothing, coarse-grid correction, backward
/// post-smoothing; direct solve on the coarsest level.
std::vector<double> vcycle(const Hierarchy& h, std::span<const double> b, std::vector<double> x);

/// Preconditioned conjugate gradients with the V-cycle as preconditioner
/// (plain CG when h is null).
std::pair<std::vector<double>, SolveReport> pcg(const SparseMatrix& A, std::span<const double> b,
                                                const Hierarchy* h, double tol, int maxit);

/// Power-iteration estimate of the asymptotic A-norm convergence factor of
/// the cycle's error propagator (geometric mean of the last 5 ratios).
double estimate_two_grid_factor(const Hierarchy& h, int iters = 50, std::uint64_t seed = 7);

}  // namespace lamg
