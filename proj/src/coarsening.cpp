#include "lamg/coarsening.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lamg {

void Interpolation::rebuild_coarse_index() {
    coarse.clear();
    for (int i = 0; i < n; ++i)
        if (is_coarse[i]) coarse.push_back(i);
    coarse_index.assign(n, -1);
    for (size_t p = 0; p < coarse.size(); ++p) coarse_index[coarse[p]] = static_cast<int>(p);
}

namespace {

LocalFit fit_one(const SymmetrizedGraph& graph, const TestVectorSet& vectors,
                 const CoarseningParams& params, int i, const std::vector<std::uint8_t>* restrict_to) {
    Neighborhood nbhd = graph_neighborhood(graph, i, params.kernel.radius);
    RegressionProblem prob = build_local_problem(i, vectors, nbhd, params.kernel, restrict_to);
    LarsPath path =
        params.lars.sign_constrained ? lars_path_signed(prob, params.lars) : lars_path(prob, params.lars);
    return select_fit(path, params.lars, prob);
}

struct PipelineState {
    const TestVectorSet& vectors;
    const CoarseningParams& params;
    SymmetrizedGraph graph;
    std::vector<std::uint8_t> forced;  // isolated variables pinned coarse

    PipelineState(const SparseMatrix& a, const TestVectorSet& v, const CoarseningParams& p)
        : vectors(v), params(p), graph(SymmetrizedGraph::build(a)), forced(a.nrows, 0) {}

    // Refits one fine row against the current coarse set; returns false and
    // pins the variable coarse when no coarse neighbor is reachable.
    bool refit_row(Interpolation& P, int i) {
        try {
            LocalFit fit = fit_one(graph, vectors, params, i, &P.is_coarse);
            P.cols[i] = std::move(fit.selected);
            P.weights[i] = std::move(fit.p_unpenalized);
            return true;
        } catch (const IsolatedVariableError&) {
            P.is_coarse[i] = 1;
            P.cols[i].clear();
            P.weights[i].clear();
            forced[i] = 1;
            return false;
        }
    }
};

MaxvolResult maxvol_inner(Interpolation& P, PipelineState& state) {
    MaxvolResult res;
    const int budget = std::max(100, P.n);

    while (true) {
        int row = -1, pos = -1;
        double worst = 1.0;
        for (int i = 0; i < P.n; ++i) {
            if (P.is_coarse[i]) continue;
            for (size_t k = 0; k < P.weights[i].size(); ++k) {
                double w = std::abs(P.weights[i][k]);
                if (w > worst) {
                    worst = w;
                    row = i;
                    pos = static_cast<int>(k);
                }
            }
        }
        if (row < 0) {
            res.converged = true;
            break;
        }
        if (res.swaps >= budget) {
            res.converged = false;
            break;
        }

        int leaving = P.cols[row][pos];
        P.is_coarse[row] = 1;
        P.cols[row].clear();
        P.weights[row].clear();
        P.is_coarse[leaving] = 0;
        ++res.swaps;

        std::vector<int> to_refit;
        for (int i = 0; i < P.n; ++i) {
            if (P.is_coarse[i]) continue;
            if (i == leaving || std::binary_search(P.cols[i].begin(), P.cols[i].end(), leaving))
                to_refit.push_back(i);
        }
        for (int i : to_refit)
            if (!state.refit_row(P, i)) ++res.forced_coarse;
    }
    P.rebuild_coarse_index();
    return res;
}

}  // namespace

FitAllResult fit_all(const SparseMatrix& A, const TestVectorSet& vectors, const CoarseningParams& params,
                     const std::vector<std::uint8_t>* restrict_to) {
    if (vectors.count() < 1) throw std::invalid_argument("fit_all: no test vectors");
    const int n = A.nrows;
    SymmetrizedGraph graph = SymmetrizedGraph::build(A);

    FitAllResult out;
    out.fits.resize(n);
    out.isolated.assign(n, 0);
    for (int i = 0; i < n; ++i) {
        if (restrict_to && (*restrict_to)[i]) continue;  // coarse rows stay identity
        try {
            out.fits[i] = fit_one(graph, vectors, params, i, restrict_to);
        } catch (const IsolatedVariableError&) {
            out.isolated[i] = 1;
        }
    }
    return out;
}

StrengthGraph strength_graph(const FitAllResult& fits, int n, double theta) {
    StrengthGraph g;
    g.edges.resize(n);
    g.sigma.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        if (!fits.fits[i]) continue;
        const LocalFit& fit = *fits.fits[i];
        double row_max = 0.0;
        for (double p : fit.p_penalized) row_max = std::max(row_max, std::abs(p));
        for (size_t k = 0; k < fit.selected.size(); ++k) {
            double w = std::abs(fit.p_penalized[k]);
            if (w < theta * row_max) continue;
            g.edges[i].push_back({fit.selected[k], w});
            g.sigma[fit.selected[k]] += w;
        }
    }
    return g;
}

std::vector<std::uint8_t> independent_set(const StrengthGraph& g, int n) {
    // Reverse adjacency: which rows draw strength from j.
    std::vector<std::vector<int>> users(n);
    for (int i = 0; i < n; ++i)
        for (const auto& [j, w] : g.edges[i]) users[j].push_back(i);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return g.sigma[a] > g.sigma[b]; });

    std::vector<std::uint8_t> coarse(n, 0);
    std::vector<std::uint8_t> removed(n, 0);
    for (int i : order) {
        if (removed[i]) continue;
        coarse[i] = 1;
        removed[i] = 1;
        for (int user : users[i]) removed[user] = 1;
    }
    return coarse;
}

MaxvolResult maxvol_correction(Interpolation& P, const SparseMatrix& A, const TestVectorSet& vectors,
                               const CoarseningParams& params) {
    PipelineState state(A, vectors, params);
    return maxvol_inner(P, state);
}

CoarseningResult lar_coarsening(const SparseMatrix& A, const TestVectorSet& vectors,
                                const CoarseningParams& params) {
    const int n = A.nrows;
    CoarseningResult out;
    PipelineState state(A, vectors, params);

    // Unrestricted fits, thresholding, importance-ordered independent set.
    FitAllResult initial = fit_all(A, vectors, params, nullptr);
    out.report.strength = strength_graph(initial, n, params.strength_threshold);

    Interpolation& P = out.interp;
    P.n = n;
    P.is_coarse = independent_set(out.report.strength, n);
    P.cols.resize(n);
    P.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        if (initial.isolated[i]) {
            P.is_coarse[i] = 1;
            state.forced[i] = 1;
        }
    }

    const int max_outer = std::max(1, params.maxvol_iterations);
    for (int outer = 0; outer < max_outer; ++outer) {
        out.report.outer_iterations = outer + 1;
        int changes = 0;

        // Coarse-restricted interpolation rows for the fine variables.
        for (int i = 0; i < n; ++i) {
            if (P.is_coarse[i]) continue;
            if (!state.refit_row(P, i)) ++changes;
        }

        // Demote coarse variables no fine row interpolates from.
        std::vector<int> used(n, 0);
        for (int i = 0; i < n; ++i) {
            if (P.is_coarse[i]) continue;
            for (int j : P.cols[i]) ++used[j];
        }
        std::vector<int> demoted;
        for (int j = 0; j < n; ++j)
            if (P.is_coarse[j] && !state.forced[j] && used[j] == 0) demoted.push_back(j);
        for (int j : demoted) P.is_coarse[j] = 0;
        for (int j : demoted) {
            if (!state.refit_row(P, j)) ++changes;
        }
        changes += static_cast<int>(demoted.size());
        out.report.total_demotions += static_cast<int>(demoted.size());

        P.rebuild_coarse_index();

        if (params.maxvol_iterations > 0) {
            MaxvolResult mv = maxvol_inner(P, state);
            out.report.total_swaps += mv.swaps;
            out.report.maxvol_clear = mv.converged;
            changes += mv.swaps + mv.forced_coarse;
        }

        if (changes == 0) break;
    }

    P.rebuild_coarse_index();
    out.report.forced_coarse = std::accumulate(state.forced.begin(), state.forced.end(), 0);
    return out;
}

SparseMatrix build_P(const Interpolation& interp, int n) {
    if (interp.n != n) throw std::invalid_argument("build_P: size mismatch");
    std::vector<Triplet> trips;
    for (int i = 0; i < n; ++i) {
        if (interp.is_coarse[i]) {
            trips.push_back({i, interp.coarse_index[i], 1.0});
        } else {
            if (interp.cols[i].empty())
                throw std::runtime_error("build_P: fine variable " + std::to_string(i) +
                                         " has an empty interpolatory set");
            for (size_t k = 0; k < interp.cols[i].size(); ++k) {
                int j = interp.cols[i][k];
                int cj = interp.coarse_index[j];
                if (cj < 0) throw std::runtime_error("build_P: interpolation references a fine variable");
                trips.push_back({i, cj, interp.weights[i][k]});
            }
        }
    }
    return csr_from_triplets(n, interp.coarse_count(), trips);
}

}  // namespace lamg
