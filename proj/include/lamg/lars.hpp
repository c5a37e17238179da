#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "lamg/dense.hpp"
#include "lamg/kernel.hpp"
#include "lamg/smoothers.hpp"
#include "lamg/sparse.hpp"

namespace lamg {

/// Local regression problem for one variable: target holds the weighted
/// observations of the center, the design holds kernel-scaled unit-norm
/// columns of its neighbors.
struct RegressionProblem {
    std::vector<double> target;  // length K
    DenseMatrix design;          // K x m
    std::vector<int> column_ids; // variable per column
    struct Scale {
        double raw_norm;  // 2-norm of the weighted raw column
        double kernel;    // kernel weight of the column's variable
    };
    std::vector<Scale> column_scale;

    int rows() const { return design.nrows; }
    int cols() const { return design.ncols; }
};

struct LarsOptions {
    double correlation_threshold = 1e-2;  // relative to the initial max |rho|
    int caliber = 3;
    double max_active_factor = 2.0;       // stop once |A| reaches ceil(factor * caliber)
    bool sign_constrained = false;
    std::optional<std::vector<int>> signs;  // +-1 per column; default sign(rho0)
};

struct IsolatedVariableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// `moved` marks the transit step directly after a drop: the rewound
/// iteration advances the coefficients without inserting anyone.
enum class LarsEventKind { added, dropped, moved, finished };

struct LarsStep {
    std::vector<int> active;            // column positions, insertion order
    std::vector<double> x;              // penalized coefficients, full length m
    std::vector<double> x_unpenalized;  // restricted LSQ on the active set
    std::vector<double> rho;            // correlations at the step's vertex
    double alpha = 0.0;
    LarsEventKind event = LarsEventKind::finished;
    int event_column = -1;  // column position for added/dropped

    int active_size() const { return static_cast<int>(active.size()); }
};

struct LarsPath {
    std::vector<LarsStep> steps;
};

/// Builds the kernel-weighted local regression problem for variable i from
/// the test vectors. Columns with zero kernel weight or vanishing norm are
/// dropped; an empty column set throws (isolated variable).
RegressionProblem build_local_problem(int i, const TestVectorSet& vectors, const Neighborhood& nbhd,
                                      const KernelSpec& kernel,
                                      const std::vector<std::uint8_t>* restrict_to = nullptr);

/// Least angle regression path with lasso drop/rewind semantics and both
/// stopping criteria (inactive correlation threshold, caliber cap).
LarsPath lars_path(const RegressionProblem& prob, const LarsOptions& opts);

/// Sign-constrained variant: columns are scaled by the prescribed signs
/// (default sign of the initial correlations), only positive correlations
/// enter, and coefficients are unscaled on output.
LarsPath lars_path_signed(const RegressionProblem& prob, const LarsOptions& opts);

struct LocalFit {
    std::vector<int> selected;          // variable ids
    std::vector<double> p_penalized;    // interpolation-scale weights
    std::vector<double> p_unpenalized;  // idem, from the restricted refit
};

/// Backtracks the last step whose active-set size equals the caliber (or the
/// last step with the largest smaller size) and unscales the coefficients of
/// that step into interpolation weights.
LocalFit select_fit(const LarsPath& path, const LarsOptions& opts, const RegressionProblem& prob);

}  // namespace lamg
