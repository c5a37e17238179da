#include <doctest.h>

#include <cmath>
#include <set>

#include "lamg/coarsening.hpp"
#include "lamg/fem.hpp"
#include "test_support.hpp"

using namespace lamg;

namespace {

SparseMatrix path_graph(int n) {
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) {
        t.push_back({i, i, 2.0});
        if (i > 0) t.push_back({i, i - 1, -1.0});
        if (i + 1 < n) t.push_back({i, i + 1, -1.0});
    }
    return csr_from_triplets(n, n, t);
}

CoarseningParams default_params() {
    CoarseningParams p;
    p.kernel = {KernelSpec::Kind::tri_cube, 4};
    p.lars.correlation_threshold = 1e-2;
    p.lars.caliber = 3;
    p.strength_threshold = 1e-2;
    p.maxvol_iterations = 4;
    return p;
}

TestVectorSet smooth_vectors(const SparseMatrix& A, int K, int nu, std::uint64_t seed) {
    SmootherSpec gs;
    return generate_test_vectors(A, K, nu, gs, seed);
}

bool interp_equal(const Interpolation& a, const Interpolation& b) {
    return a.is_coarse == b.is_coarse && a.cols == b.cols && a.weights == b.weights &&
           a.coarse == b.coarse;
}

}  // namespace

TEST_CASE("kernel weights") {
    KernelSpec tc{KernelSpec::Kind::tri_cube, 4};
    KernelSpec nn{KernelSpec::Kind::nearest_neighbor, 4};
    CHECK(kernel_weight(tc, 0) == 1.0);
    CHECK(kernel_weight(nn, 4) == 0.0);
    CHECK(kernel_weight(tc, 4) == 0.0);
    CHECK(kernel_weight(tc, 2) == 343.0 / 512.0);
    CHECK(kernel_weight(nn, 2) == 1.0);
    CHECK_THROWS_AS(kernel_weight(tc, -1), std::invalid_argument);
}

TEST_CASE("single-variable system is forced coarse") {
    SparseMatrix A = csr_from_triplets(1, 1, std::vector<Triplet>{{0, 0, 1.0}});
    TestVectorSet vecs;
    vecs.vectors = {{1.0}};
    vecs.weights = {1.0};
    CoarseningResult res = lar_coarsening(A, vecs, default_params());
    CHECK(res.interp.coarse == std::vector<int>{0});
    CHECK(res.report.forced_coarse == 1);
}

TEST_CASE("1D interior fits select the two nearest neighbors") {
    const int n = 11;
    SparseMatrix A = path_graph(n);
    // Three independent smooth functions sampled on the line.
    TestVectorSet vecs;
    vecs.weights = {1.0, 1.0, 1.0};
    vecs.vectors.resize(3, std::vector<double>(n));
    for (int i = 0; i < n; ++i) {
        double x = (i + 1.0) / (n + 1.0);
        vecs.vectors[0][i] = std::sin(3.14159265358979 * x);
        vecs.vectors[1][i] = x * (1.0 - x);
        vecs.vectors[2][i] = std::sin(2.0 * 3.14159265358979 * x);
    }

    CoarseningParams params = default_params();
    params.kernel = {KernelSpec::Kind::nearest_neighbor, 3};
    params.lars.caliber = 2;
    params.lars.correlation_threshold = 0.0;

    FitAllResult fits = fit_all(A, vecs, params);
    const int center = 5;
    REQUIRE(fits.fits[center].has_value());
    CHECK(fits.fits[center]->selected == std::vector<int>{center - 1, center + 1});

    // Exhaustive 2-subset least squares oracle over the neighborhood.
    Neighborhood nb = graph_neighborhood(A, center, 3);
    std::vector<int> candidates;
    for (auto [j, d] : nb.members)
        if (j != center && d < 3) candidates.push_back(j);
    double best = 1e300;
    std::pair<int, int> best_pair{-1, -1};
    for (size_t a = 0; a < candidates.size(); ++a) {
        for (size_t b = a + 1; b < candidates.size(); ++b) {
            DenseMatrix W(3, 2);
            std::vector<double> v(3);
            for (int k = 0; k < 3; ++k) {
                W(k, 0) = vecs.vectors[k][candidates[a]];
                W(k, 1) = vecs.vectors[k][candidates[b]];
                v[k] = vecs.vectors[k][center];
            }
            auto x = oracle::normal_equations_lsq(W, v);
            double rss = 0.0;
            for (int k = 0; k < 3; ++k) {
                double r = v[k] - W(k, 0) * x[0] - W(k, 1) * x[1];
                rss += r * r;
            }
            if (rss < best) {
                best = rss;
                best_pair = {std::min(candidates[a], candidates[b]),
                             std::max(candidates[a], candidates[b])};
            }
        }
    }
    CHECK(best_pair.first == center - 1);
    CHECK(best_pair.second == center + 1);
}

TEST_CASE("restricted fits only select inside the restriction") {
    Mesh m = disc_mesh(2);
    AssembledSystem sys = assemble(m, DiffusionCoefficients{});
    TestVectorSet vecs = smooth_vectors(sys.A, 8, 4, 3);
    CoarseningParams params = default_params();

    std::vector<std::uint8_t> mask(sys.A.nrows, 0);
    for (int i = 0; i < sys.A.nrows; i += 3) mask[i] = 1;

    FitAllResult fits = fit_all(sys.A, vecs, params, &mask);
    for (int i = 0; i < sys.A.nrows; ++i) {
        if (mask[i]) {
            CHECK_FALSE(fits.fits[i].has_value());
        } else if (fits.fits[i]) {
            for (int j : fits.fits[i]->selected) CHECK(mask[j] == 1);
        }
    }
}

TEST_CASE("strength graph thresholding and importance bookkeeping") {
    FitAllResult fits;
    fits.fits.resize(3);
    fits.isolated.assign(3, 0);
    LocalFit f0;
    f0.selected = {1, 2};
    f0.p_penalized = {1.0, 0.005};
    f0.p_unpenalized = {1.0, 0.005};
    fits.fits[0] = f0;

    StrengthGraph g = strength_graph(fits, 3, 0.01);
    REQUIRE(g.edges[0].size() == 1);  // the 0.005 edge is below 0.01 * 1.0
    CHECK(g.edges[0][0].first == 1);
    CHECK(g.sigma[1] == doctest::Approx(1.0));
    CHECK(g.sigma[2] == 0.0);

    StrengthGraph keep = strength_graph(fits, 3, 0.0);
    CHECK(keep.edges[0].size() == 2);  // theta = 0 drops nothing

    // sigma recomputes exactly from the surviving edges
    std::vector<double> sigma(3, 0.0);
    for (int i = 0; i < 3; ++i)
        for (auto [j, w] : keep.edges[i]) sigma[j] += w;
    CHECK(sigma == keep.sigma);
}

TEST_CASE("independent set on simple graphs") {
    StrengthGraph empty;
    empty.edges.resize(4);
    empty.sigma.assign(4, 0.0);
    auto all = independent_set(empty, 4);
    CHECK(all == std::vector<std::uint8_t>{1, 1, 1, 1});

    // path 0-1-2 with unit couplings: sigma = (1, 2, 1), pick 1, remove 0 and 2
    StrengthGraph path;
    path.edges.resize(3);
    path.edges[0] = {{1, 1.0}};
    path.edges[1] = {{0, 1.0}, {2, 1.0}};
    path.edges[2] = {{1, 1.0}};
    path.sigma = {1.0, 2.0, 1.0};
    auto coarse = independent_set(path, 3);
    CHECK(coarse == std::vector<std::uint8_t>{0, 1, 0});
}

TEST_CASE("independent set output is independent in the removal sense") {
    Mesh m = disc_mesh(2);
    AssembledSystem sys = assemble(m, DiffusionCoefficients{});
    TestVectorSet vecs = smooth_vectors(sys.A, 8, 4, 5);
    CoarseningParams params = default_params();
    FitAllResult fits = fit_all(sys.A, vecs, params);
    StrengthGraph g = strength_graph(fits, sys.A.nrows, params.strength_threshold);
    auto coarse = independent_set(g, sys.A.nrows);
    // No coarse variable draws strength from another coarse variable picked
    // before it would have been removed: check no edge between two members.
    for (int i = 0; i < sys.A.nrows; ++i) {
        if (!coarse[i]) continue;
        for (auto [j, w] : g.edges[i]) {
            if (coarse[j]) {
                // i -> j both coarse: legal only if i was picked before j...
                // the greedy removes any i with an edge into a picked j, so
                // mutual membership requires sigma[i] >= sigma[j] ordering.
                CHECK(g.sigma[i] >= g.sigma[j]);
            }
        }
    }
}

TEST_CASE("maxvol correction is a fixed point on bounded weights") {
    Mesh m = disc_mesh(2);
    AssembledSystem sys = assemble(m, DiffusionCoefficients{});
    TestVectorSet vecs = smooth_vectors(sys.A, 8, 4, 9);
    CoarseningParams params = default_params();
    CoarseningResult res = lar_coarsening(sys.A, vecs, params);

    double maxw = 0.0;
    for (int i = 0; i < res.interp.n; ++i)
        for (double w : res.interp.weights[i]) maxw = std::max(maxw, std::abs(w));
    REQUIRE(res.report.maxvol_clear);
    CHECK(maxw <= 1.0);

    Interpolation copy = res.interp;
    MaxvolResult mv = maxvol_correction(copy, sys.A, vecs, params);
    CHECK(mv.swaps == 0);
    CHECK(mv.converged);
    CHECK(interp_equal(copy, res.interp));
}

TEST_CASE("maxvol swaps the offending pair") {
    // Hand-built interpolation with one out-of-bounds weight on a small mesh;
    // the remaining rows reference only variable 2 so the refit cascade after
    // the swap stays local.
    Mesh m = disc_mesh(1);
    AssembledSystem sys = assemble(m, DiffusionCoefficients{});
    const int n = sys.A.nrows;  // 7 interior vertices at level 1
    REQUIRE(n == 7);
    TestVectorSet vecs;
    vecs.weights = {1.0, 1.0, 1.0};
    vecs.vectors.resize(3, std::vector<double>(n));
    for (int i = 0; i < n; ++i) {
        auto& p = m.vertices[sys.interior_map[i]];
        vecs.vectors[0][i] = 1.0;
        vecs.vectors[1][i] = 1.0 + 0.3 * p[0];
        vecs.vectors[2][i] = 1.0 + 0.3 * p[1];
    }
    CoarseningParams params = default_params();
    params.kernel.radius = 3;
    params.lars.caliber = 2;

    Interpolation P;
    P.n = n;
    P.is_coarse.assign(n, 0);
    P.cols.resize(n);
    P.weights.resize(n);
    P.is_coarse[0] = 1;
    P.is_coarse[2] = 1;
    for (int i = 0; i < n; ++i) {
        if (P.is_coarse[i]) continue;
        if (i == 4) {
            P.cols[i] = {0, 2};
            P.weights[i] = {1.5, 0.1};
        } else {
            P.cols[i] = {2};
            P.weights[i] = {0.9};
        }
    }
    P.rebuild_coarse_index();

    MaxvolResult mv = maxvol_correction(P, sys.A, vecs, params);
    CHECK(mv.swaps >= 1);
    CHECK(P.is_coarse[4] == 1);  // the row holding the 1.5 entry joined C
    REQUIRE(mv.converged);
    for (int i = 0; i < n; ++i)
        for (double w : P.weights[i]) CHECK(std::abs(w) <= 1.0);
}

TEST_CASE("lar_coarsening on a strongly coupled pair") {
    SparseMatrix A =
        csr_from_triplets(2, 2, std::vector<Triplet>{{0, 0, 2.0}, {0, 1, -1.0}, {1, 0, -1.0}, {1, 1, 2.0}});
    TestVectorSet vecs;
    vecs.weights = {1.0, 1.0};
    vecs.vectors = {{1.0, 0.9}, {0.8, 1.0}};
    CoarseningParams params = default_params();
    params.lars.caliber = 1;
    CoarseningResult res = lar_coarsening(A, vecs, params);
    CHECK(res.interp.coarse_count() == 1);
    int fine = res.interp.is_coarse[0] ? 1 : 0;
    REQUIRE(res.interp.cols[fine].size() == 1);
    CHECK(res.interp.cols[fine][0] == 1 - fine);
}

TEST_CASE("isotropic disc coarsening hits the expected ratio band") {
    Mesh m = disc_mesh(3);  // 169 interior vertices
    AssembledSystem sys = assemble(m, DiffusionCoefficients{});
    TestVectorSet vecs = smooth_vectors(sys.A, 8, 4, 1);
    CoarseningParams params = default_params();
    CoarseningResult res = lar_coarsening(sys.A, vecs, params);

    double ratio = static_cast<double>(res.interp.coarse_count()) / sys.A.nrows;
    CHECK(ratio >= 0.2);
    CHECK(ratio <= 0.45);

    // Every fine variable interpolates from a nonempty coarse subset.
    for (int i = 0; i < res.interp.n; ++i) {
        if (res.interp.is_coarse[i]) continue;
        REQUIRE_FALSE(res.interp.cols[i].empty());
        for (int j : res.interp.cols[i]) CHECK(res.interp.is_coarse[j] == 1);
    }
    CHECK(res.report.maxvol_clear);
    CHECK(res.report.total_swaps < sys.A.nrows / 4);
}

TEST_CASE("lar_coarsening is deterministic") {
    Mesh m = disc_mesh(2);
    AssembledSystem sys = assemble(m, DiffusionCoefficients{});
    TestVectorSet vecs = smooth_vectors(sys.A, 8, 4, 23);
    CoarseningParams params = default_params();
    CoarseningResult a = lar_coarsening(sys.A, vecs, params);
    CoarseningResult b = lar_coarsening(sys.A, vecs, params);
    CHECK(interp_equal(a.interp, b.interp));
    CHECK(a.report.total_swaps == b.report.total_swaps);
}

TEST_CASE("build_P structure") {
    Interpolation all;
    all.n = 3;
    all.is_coarse = {1, 1, 1};
    all.cols.resize(3);
    all.weights.resize(3);
    all.rebuild_coarse_index();
    SparseMatrix I = build_P(all, 3);
    CHECK(I.nrows == 3);
    CHECK(I.ncols == 3);
    for (int i = 0; i < 3; ++i) {
        REQUIRE(I.row_end(i) - I.row_begin(i) == 1);
        CHECK(I.col_indices[I.row_begin(i)] == i);
        CHECK(I.values[I.row_begin(i)] == 1.0);
    }

    Interpolation mixed;
    mixed.n = 3;
    mixed.is_coarse = {1, 0, 1};
    mixed.cols = {{}, {0, 2}, {}};
    mixed.weights = {{}, {0.5, 0.25}, {}};
    mixed.rebuild_coarse_index();
    SparseMatrix P = build_P(mixed, 3);
    CHECK(P.ncols == 2);

    // each coarse column carries its unit entry
    SparseMatrix Pt = transpose(P);
    for (int c = 0; c < 2; ++c) {
        bool has_unit = false;
        for (int k = Pt.row_begin(c); k < Pt.row_end(c); ++k)
            if (Pt.values[k] == 1.0 && Pt.col_indices[k] == mixed.coarse[c]) has_unit = true;
        CHECK(has_unit);
    }

    // P^T P has diagonal >= 1
    SparseMatrix G = galerkin(sparse_identity(3), P);
    auto D = oracle::to_dense(G);
    for (int c = 0; c < 2; ++c) CHECK(D[c][c] >= 1.0);

    Interpolation broken = mixed;
    broken.cols[1].clear();
    broken.weights[1].clear();
    CHECK_THROWS_AS(build_P(broken, 3), std::runtime_error);
}

TEST_CASE("theta = 0 keeps the raw fit selection") {
    Mesh m = disc_mesh(2);
    AssembledSystem sys = assemble(m, DiffusionCoefficients{});
    TestVectorSet vecs = smooth_vectors(sys.A, 8, 4, 13);
    CoarseningParams params = default_params();
    FitAllResult fits = fit_all(sys.A, vecs, params);
    StrengthGraph g = strength_graph(fits, sys.A.nrows, 0.0);
    for (int i = 0; i < sys.A.nrows; ++i) {
        if (!fits.fits[i]) continue;
        REQUIRE(g.edges[i].size() == fits.fits[i]->selected.size());
        for (size_t k = 0; k < g.edges[i].size(); ++k)
            CHECK(g.edges[i][k].first == fits.fits[i]->selected[k]);
    }
}
