#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lamg/kernel.hpp"
#include "lamg/lars.hpp"
#include "lamg/smoothers.hpp"
#include "lamg/sparse.hpp"

namespace lamg {

struct CoarseningParams {
    KernelSpec kernel;
    LarsOptions lars;
    double strength_threshold = 1e-2;  // theta, relative to the row max
    int maxvol_iterations = 4;         // outer refit/maxvol loops
};

/// Directed graph of strong couplings surviving relative thresholding, plus
/// the importance score sigma_j = sum of |p_ij| contributed to other rows.
struct StrengthGraph {
    std::vector<std::vector<std::pair<int, double>>> edges;  // i -> (j, |p_ij|)
    std::vector<double> sigma;
};

/// C/F split with per-fine-row interpolatory sets and weights. Coarse rows
/// interpolate by the identity.
struct Interpolation {
    int n = 0;
    std::vector<std::uint8_t> is_coarse;
    std::vector<std::vector<int>> cols;        // per fine row, ascending variable ids
    std::vector<std::vector<double>> weights;  // final (unpenalized refit) weights
    std::vector<int> coarse;                   // ascending
    std::vector<int> coarse_index;             // -1 for fine variables

    void rebuild_coarse_index();
    int coarse_count() const { return static_cast<int>(coarse.size()); }
};

struct FitAllResult {
    std::vector<std::optional<LocalFit>> fits;  // empty for skipped/isolated variables
    std::vector<std::uint8_t> isolated;
};

/// Per-variable local LARS fits. With restrict_to given, only variables
/// outside the set are fit and columns are limited to members of the set.
FitAllResult fit_all(const SparseMatrix& A, const TestVectorSet& vectors,
                     const CoarseningParams& params,
                     const std::vector<std::uint8_t>* restrict_to = nullptr);

StrengthGraph strength_graph(const FitAllResult& fits, int n, double theta);

/// Greedy importance-ordered independent set; returns the coarse mask.
std::vector<std::uint8_t> independent_set(const StrengthGraph& g, int n);

struct MaxvolResult {
    bool converged = true;  // true iff max |p_ij| <= 1 on return
    int swaps = 0;
    int forced_coarse = 0;
};

/// Swaps the fine/coarse pair at the largest out-of-bounds interpolation
/// weight until all weights are bounded by one; affected rows are refit by
/// coarse-restricted LARS.
MaxvolResult maxvol_correction(Interpolation& P, const SparseMatrix& A, const TestVectorSet& vectors,
                               const CoarseningParams& params);

struct CoarseningReport {
    int outer_iterations = 0;
    int total_swaps = 0;
    int total_demotions = 0;
    int forced_coarse = 0;
    bool maxvol_clear = true;
    StrengthGraph strength;  // initial, post-threshold
};

struct CoarseningResult {
    Interpolation interp;
    CoarseningReport report;
};

/// The full coarsening pipeline: unrestricted fits and thresholding, the
/// importance-ordered independent set, then alternating coarse-restricted
/// refits, demotion of unused coarse variables, and maxvol correction.
CoarseningResult lar_coarsening(const SparseMatrix& A, const TestVectorSet& vectors,
                                const CoarseningParams& params);

/// n x n_c CSR interpolation operator; identity rows for coarse variables.
SparseMatrix build_P(const Interpolation& interp, int n);

}  // namespace lamg
