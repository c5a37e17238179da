#include "lamg/lars.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lamg {

RegressionProblem build_local_problem(int i, const TestVectorSet& vectors, const Neighborhood& nbhd,
                                      const KernelSpec& kernel,
                                      const std::vector<std::uint8_t>* restrict_to) {
    if (nbhd.center != i) throw std::invalid_argument("build_local_problem: neighborhood center mismatch");
    const int K = vectors.count();
    if (K < 1) throw std::invalid_argument("build_local_problem: no test vectors");

    std::vector<double> sqrtw(K);
    for (int k = 0; k < K; ++k) sqrtw[k] = std::sqrt(vectors.weights[k]);

    RegressionProblem prob;
    prob.target.resize(K);
    for (int k = 0; k < K; ++k) prob.target[k] = sqrtw[k] * vectors.vectors[k][i];

    std::vector<std::vector<double>> cols;
    for (const auto& [j, d] : nbhd.members) {
        if (j == i) continue;
        if (restrict_to && !(*restrict_to)[j]) continue;
        double kw = kernel_weight(kernel, d);
        if (kw == 0.0) continue;
        std::vector<double> raw(K);
        for (int k = 0; k < K; ++k) raw[k] = sqrtw[k] * vectors.vectors[k][j];
        double nrm = norm2(raw);
        if (nrm < 1e-13) continue;
        for (double& e : raw) e *= kw / nrm;
        cols.push_back(std::move(raw));
        prob.column_ids.push_back(j);
        prob.column_scale.push_back({nrm, kw});
    }
    if (cols.empty()) throw IsolatedVariableError("variable " + std::to_string(i) +
                                                  " has no usable regression columns");

    prob.design = DenseMatrix(K, static_cast<int>(cols.size()));
    for (int j = 0; j < prob.design.ncols; ++j)
        for (int k = 0; k < K; ++k) prob.design(k, j) = cols[j][k];
    return prob;
}

namespace {

constexpr double kTinyStep = 1e-14;

std::vector<double> correlations(const DenseMatrix& W, std::span<const double> r) {
    std::vector<double> rho(W.ncols, 0.0);
    for (int k = 0; k < W.nrows; ++k) {
        double rk = r[k];
        if (rk == 0.0) continue;
        for (int j = 0; j < W.ncols; ++j) rho[j] += W(k, j) * rk;
    }
    return rho;
}

std::vector<double> residual(const DenseMatrix& W, std::span<const double> target,
                             std::span<const double> x) {
    std::vector<double> r(target.begin(), target.end());
    for (int j = 0; j < W.ncols; ++j) {
        double xj = x[j];
        if (xj == 0.0) continue;
        for (int k = 0; k < W.nrows; ++k) r[k] -= W(k, j) * xj;
    }
    return r;
}

// Least squares coefficients on the gathered active columns, aligned with
// `active`. Rank deficiency resolves to the minimum-norm solution.
std::vector<double> active_lsq(const DenseMatrix& W, std::span<const double> rhs,
                               const std::vector<int>& active) {
    DenseMatrix Wa(W.nrows, static_cast<int>(active.size()));
    for (int c = 0; c < Wa.ncols; ++c)
        for (int k = 0; k < W.nrows; ++k) Wa(k, c) = W(k, active[c]);
    return solve_dense_lsq(Wa, rhs).x;
}

// Restricted refit that never emits a negative coefficient (scaled domain):
// sign-violating columns are removed one at a time, most negative first.
std::vector<double> feasible_refit(const DenseMatrix& W, std::span<const double> target,
                                   std::vector<int> work) {
    std::vector<double> coef;
    while (!work.empty()) {
        coef = active_lsq(W, target, work);
        int worst = -1;
        double worst_val = 0.0;
        for (size_t p = 0; p < work.size(); ++p) {
            if (coef[p] < worst_val) {
                worst_val = coef[p];
                worst = static_cast<int>(p);
            } else if (worst >= 0 && coef[p] == worst_val && work[p] < work[worst]) {
                worst = static_cast<int>(p);
            }
        }
        if (worst < 0) break;
        work.erase(work.begin() + worst);
        coef.clear();
    }
    std::vector<double> full(W.ncols, 0.0);
    for (size_t p = 0; p < work.size(); ++p) full[work[p]] = coef.empty() ? 0.0 : coef[p];
    return full;
}

LarsPath lars_core(const DenseMatrix& W, const std::vector<double>& target, const LarsOptions& opts,
                   bool signed_mode) {
    const int K = W.nrows;
    const int m = W.ncols;
    if (m < 1) throw std::invalid_argument("lars_path: design has no columns");
    if (opts.caliber < 1) throw std::invalid_argument("lars_path: caliber must be >= 1");
    if (opts.max_active_factor < 1.0)
        throw std::invalid_argument("lars_path: max_active_factor must be >= 1");

    LarsPath path;
    std::vector<double> x(m, 0.0);
    std::vector<int> active;
    std::vector<char> is_active(m, 0);
    bool rewind = false;
    bool insertions_closed = false;  // signed variant: all correlations crossed zero

    std::vector<double> rho0 = correlations(W, target);
    double rho0max = 0.0;
    for (double v : rho0) rho0max = std::max(rho0max, std::abs(v));
    const double corr_stop = opts.correlation_threshold * rho0max;
    const int natural_cap = std::min(K, m);
    const int caliber_cap = std::max(1, static_cast<int>(std::ceil(opts.max_active_factor * opts.caliber)));
    const int safety_cap = 50 * std::min(K, m) + 50;
    const double inf = std::numeric_limits<double>::infinity();

    while (true) {
        std::vector<double> r = residual(W, target, x);
        std::vector<double> rho = correlations(W, r);

        double max_abs = 0.0;
        double max_inact_abs = 0.0;
        double max_inact_signed = -inf;
        bool have_inactive = static_cast<int>(active.size()) < m;
        for (int j = 0; j < m; ++j) {
            max_abs = std::max(max_abs, std::abs(rho[j]));
            if (is_active[j]) continue;
            max_inact_abs = std::max(max_inact_abs, std::abs(rho[j]));
            max_inact_signed = std::max(max_inact_signed, rho[j]);
        }
        if (!path.steps.empty() && have_inactive && max_inact_abs < corr_stop) break;
        // All correlations at roundoff level: the recorded vertex already is
        // the final least squares fit.
        if (!path.steps.empty() && max_abs <= 1e-13 * std::max(1.0, rho0max)) {
            path.steps.back().event = LarsEventKind::finished;
            break;
        }

        // Insertion of the most correlated inactive column, unless a drop
        // just rewound the path or the signed variant ran out of positive
        // correlations.
        int inserted = -1;
        if (rewind) {
            rewind = false;
        } else {
            if (signed_mode && have_inactive && max_inact_signed <= 0.0) insertions_closed = true;
            bool can_insert =
                have_inactive && static_cast<int>(active.size()) < natural_cap && !insertions_closed;
            if (can_insert) {
                int best = -1;
                double best_val = -inf;
                for (int j = 0; j < m; ++j) {
                    if (is_active[j]) continue;
                    double val = signed_mode ? rho[j] : std::abs(rho[j]);
                    if (val > best_val) {
                        best_val = val;
                        best = j;
                    }
                }
                active.push_back(best);
                is_active[best] = 1;
                inserted = best;
            }
        }

        if (active.empty()) {
            LarsStep s;
            s.x.assign(m, 0.0);
            s.x_unpenalized.assign(m, 0.0);
            s.rho = rho;
            s.alpha = 0.0;
            s.event = LarsEventKind::finished;
            path.steps.push_back(std::move(s));
            break;
        }

        std::vector<double> d = active_lsq(W, r, active);

        // Drop candidates: active coefficients heading for zero before the
        // full least squares step. The just-inserted column is exempt.
        // Candidates within a whisker of the full step count as the full
        // step: crossings at the least squares point complete the path.
        auto snap_to_one = [](double a) { return std::abs(a - 1.0) <= 1e-12 ? 1.0 : a; };

        double a_drop = inf;
        int drop_pos = -1;
        for (size_t p = 0; p < active.size(); ++p) {
            int col = active[p];
            if (col == inserted) continue;
            if (d[p] == 0.0) continue;
            double a = snap_to_one(-x[col] / d[p]);
            if (!(a >= 0.0) || a > 1.0) continue;
            if (a < a_drop || (a == a_drop && drop_pos >= 0 && col < active[drop_pos])) {
                a_drop = a;
                drop_pos = static_cast<int>(p);
            }
        }

        // Crossing candidates: inactive correlations tying the active ones.
        double a_cross = inf;
        if (static_cast<int>(active.size()) < m) {
            double c = 0.0;
            for (int col : active) c = std::max(c, signed_mode ? rho[col] : std::abs(rho[col]));
            std::vector<double> t(K, 0.0);
            for (size_t p = 0; p < active.size(); ++p) {
                int col = active[p];
                double dp = d[p];
                if (dp == 0.0) continue;
                for (int k = 0; k < K; ++k) t[k] += W(k, col) * dp;
            }
            // A numerator at roundoff level means the column is already tied
            // at this vertex (it just left the active set): that is no
            // crossing, the insertion rule deals with it.
            const double tied_tol = 1e-12 * std::max(c, 1e-300);
            for (int j = 0; j < m; ++j) {
                if (is_active[j]) continue;
                double mu = 0.0;
                for (int k = 0; k < K; ++k) mu += W(k, j) * t[k];
                if (std::abs(c - rho[j]) > tied_tol) {
                    double cand = snap_to_one((c - rho[j]) / (c - mu));
                    if (std::isfinite(cand) && cand >= kTinyStep && cand <= 1.0)
                        a_cross = std::min(a_cross, cand);
                }
                if (!signed_mode && std::abs(c + rho[j]) > tied_tol) {
                    double cand = snap_to_one((c + rho[j]) / (c + mu));
                    if (std::isfinite(cand) && cand >= kTinyStep && cand <= 1.0)
                        a_cross = std::min(a_cross, cand);
                }
            }
        }

        bool drop_branch = drop_pos >= 0 && a_drop < a_cross;
        double step = drop_branch ? a_drop : (a_cross < inf ? a_cross : 1.0);

        for (size_t p = 0; p < active.size(); ++p) x[active[p]] += step * d[p];

        bool finished = (step == 1.0);
        int dropped_col = -1;
        if (drop_branch) {
            dropped_col = active[drop_pos];
            x[dropped_col] = 0.0;
            is_active[dropped_col] = 0;
            active.erase(active.begin() + drop_pos);
            rewind = true;
        }

        LarsStep s;
        s.active = active;
        s.x = x;
        s.rho = std::move(rho);
        s.alpha = step;
        if (signed_mode) {
            s.x_unpenalized = feasible_refit(W, target, active);
        } else if (drop_branch) {
            std::vector<double> coef = active_lsq(W, target, active);
            s.x_unpenalized.assign(m, 0.0);
            for (size_t p = 0; p < active.size(); ++p) s.x_unpenalized[active[p]] = coef[p];
        } else {
            s.x_unpenalized.assign(m, 0.0);
            for (size_t p = 0; p < active.size(); ++p)
                s.x_unpenalized[active[p]] = x[active[p]] + (1.0 - step) * d[p];
        }
        if (finished) {
            s.event = LarsEventKind::finished;
        } else if (drop_branch) {
            s.event = LarsEventKind::dropped;
            s.event_column = dropped_col;
        } else if (inserted >= 0) {
            s.event = LarsEventKind::added;
            s.event_column = inserted;
        } else {
            s.event = LarsEventKind::moved;
        }
        path.steps.push_back(std::move(s));

        if (finished) break;
        if (static_cast<int>(active.size()) >= caliber_cap) break;
        if (static_cast<int>(path.steps.size()) >= safety_cap) {
            path.steps.back().event = LarsEventKind::finished;
            break;
        }
    }

    if (path.steps.empty()) {
        LarsStep s;
        s.x.assign(m, 0.0);
        s.x_unpenalized.assign(m, 0.0);
        s.rho = std::move(rho0);
        s.alpha = 0.0;
        s.event = LarsEventKind::finished;
        path.steps.push_back(std::move(s));
    }
    return path;
}

}  // namespace

LarsPath lars_path(const RegressionProblem& prob, const LarsOptions& opts) {
    return lars_core(prob.design, prob.target, opts, false);
}

LarsPath lars_path_signed(const RegressionProblem& prob, const LarsOptions& opts) {
    const int m = prob.cols();
    std::vector<double> sign(m, 1.0);
    if (opts.signs) {
        if (static_cast<int>(opts.signs->size()) != m)
            throw std::invalid_argument("lars_path_signed: signs size mismatch");
        for (int j = 0; j < m; ++j) {
            int s = (*opts.signs)[j];
            if (s != 1 && s != -1) throw std::invalid_argument("lars_path_signed: signs must be +-1");
            sign[j] = s;
        }
    } else {
        std::vector<double> rho0 = correlations(prob.design, prob.target);
        for (int j = 0; j < m; ++j) sign[j] = rho0[j] >= 0.0 ? 1.0 : -1.0;
    }

    DenseMatrix scaled = prob.design;
    for (int j = 0; j < m; ++j) {
        if (sign[j] == 1.0) continue;
        for (int k = 0; k < scaled.nrows; ++k) scaled(k, j) = -scaled(k, j);
    }
    LarsPath path = lars_core(scaled, prob.target, opts, true);
    for (LarsStep& s : path.steps) {
        for (int j = 0; j < m; ++j) {
            s.x[j] *= sign[j];
            s.x_unpenalized[j] *= sign[j];
            s.rho[j] *= sign[j];
        }
    }
    return path;
}

LocalFit select_fit(const LarsPath& path, const LarsOptions& opts, const RegressionProblem& prob) {
    if (path.steps.empty()) throw std::invalid_argument("select_fit: empty path");

    int chosen = -1;
    for (int s = static_cast<int>(path.steps.size()) - 1; s >= 0; --s) {
        if (path.steps[s].active_size() == opts.caliber) {
            chosen = s;
            break;
        }
    }
    if (chosen < 0) {
        int best_size = -1;
        for (int s = 0; s < static_cast<int>(path.steps.size()); ++s) {
            int sz = path.steps[s].active_size();
            if (sz < opts.caliber && sz >= best_size) {
                best_size = sz;
                chosen = s;
            }
        }
    }
    if (chosen < 0) chosen = static_cast<int>(path.steps.size()) - 1;

    const LarsStep& step = path.steps[chosen];
    std::vector<int> order(step.active);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return prob.column_ids[a] < prob.column_ids[b]; });

    LocalFit fit;
    for (int col : order) {
        double scale = prob.column_scale[col].kernel / prob.column_scale[col].raw_norm;
        fit.selected.push_back(prob.column_ids[col]);
        fit.p_penalized.push_back(step.x[col] * scale);
        fit.p_unpenalized.push_back(step.x_unpenalized[col] * scale);
    }
    return fit;
}

}  // namespace lamg
