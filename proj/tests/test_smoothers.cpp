#include <doctest.h>

#include <cmath>
#include <random>

#include "lamg/dense.hpp"
#include "lamg/fem.hpp"
#include "lamg/smoothers.hpp"
#include "test_support.hpp"

using namespace lamg;

namespace {

SparseMatrix spd_2x2() {
    return csr_from_triplets(2, 2,
                             std::vector<Triplet>{{0, 0, 2.0}, {0, 1, -1.0}, {1, 0, -1.0}, {1, 1, 2.0}});
}

SparseMatrix random_spd(int n, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    DenseMatrix M(n, n);
    for (double& v : M.values) v = u(gen);
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += M(k, i) * M(k, j);
            if (i == j) s += n;
            t.push_back({i, j, s});
        }
    return csr_from_triplets(n, n, t);
}

double a_norm(const SparseMatrix& A, const std::vector<double>& e) {
    return std::sqrt(dot(e, spmv(A, e)));
}

SparseMatrix path_graph(int n) {
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) {
        t.push_back({i, i, 2.0});
        if (i > 0) t.push_back({i, i - 1, -1.0});
        if (i + 1 < n) t.push_back({i, i + 1, -1.0});
    }
    return csr_from_triplets(n, n, t);
}

}  // namespace

TEST_CASE("gs_sweep forward against the hand recurrence") {
    SparseMatrix A = spd_2x2();
    std::vector<double> x = {0.0, 0.0}, b = {1.0, 1.0};
    gs_sweep(A, x, b, SweepDirection::forward);
    CHECK(x[0] == doctest::Approx(0.5));
    CHECK(x[1] == doctest::Approx(0.75));
}

TEST_CASE("gs_sweep keeps the exact solution fixed") {
    SparseMatrix A = spd_2x2();
    std::vector<double> xstar = {1.0, 2.0};
    std::vector<double> b = spmv(A, xstar);
    std::vector<double> x = xstar;
    gs_sweep(A, x, b, SweepDirection::symmetric);
    CHECK(x == xstar);
}

TEST_CASE("gs_sweep throws on zero diagonal") {
    SparseMatrix A = csr_from_triplets(2, 2, std::vector<Triplet>{{0, 1, 1.0}, {1, 0, 1.0}});
    std::vector<double> x = {0.0, 0.0}, b = {1.0, 1.0};
    CHECK_THROWS_AS(gs_sweep(A, x, b, SweepDirection::forward), std::runtime_error);
}

TEST_CASE("Gauss-Seidel error is A-norm nonincreasing on SPD systems") {
    std::mt19937_64 gen(31);
    SparseMatrix A = random_spd(8, gen);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> zero(8, 0.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> e(8);
        for (double& v : e) v = u(gen);
        double before = a_norm(A, e);
        gs_sweep(A, e, zero, SweepDirection::symmetric);
        double after = a_norm(A, e);
        CHECK(after <= before * (1.0 + 1e-12));
    }
}

TEST_CASE("block GS with singleton blocks equals pointwise GS bitwise") {
    std::mt19937_64 gen(32);
    SparseMatrix A = random_spd(7, gen);
    BlockPartition singletons;
    singletons.nblocks = 7;
    singletons.block_of.resize(7);
    for (int i = 0; i < 7; ++i) singletons.block_of[i] = i;

    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> b(7), x1(7), x2(7);
    for (int i = 0; i < 7; ++i) {
        b[i] = u(gen);
        x1[i] = x2[i] = u(gen);
    }
    gs_sweep(A, x1, b, SweepDirection::forward);
    block_gs_sweep(A, singletons, x2, b, SweepDirection::forward);
    CHECK(x1 == x2);  // bitwise
}

TEST_CASE("block GS with one block is a direct solve") {
    std::mt19937_64 gen(33);
    SparseMatrix A = random_spd(6, gen);
    BlockPartition one;
    one.nblocks = 1;
    one.block_of.assign(6, 0);
    std::vector<double> b(6, 1.0), x(6, 0.0);
    block_gs_sweep(A, one, x, b, SweepDirection::forward);
    auto r = spmv(A, x);
    for (int i = 0; i < 6; ++i) CHECK(std::abs(r[i] - b[i]) <= 1e-10);
}

TEST_CASE("two-block GS matches the dense block elimination oracle") {
    std::mt19937_64 gen(34);
    SparseMatrix A = random_spd(4, gen);
    auto D = oracle::to_dense(A);
    BlockPartition two;
    two.nblocks = 2;
    two.block_of = {0, 0, 1, 1};
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> b(4), x(4, 0.0);
    for (double& v : b) v = u(gen);

    std::vector<double> want(4, 0.0);
    {
        // first block solve: A00 y0 = b0
        double a = D[0][0], bb = D[0][1], c = D[1][0], d = D[1][1];
        double det = a * d - bb * c;
        double r0 = b[0], r1 = b[1];
        want[0] = (d * r0 - bb * r1) / det;
        want[1] = (-c * r0 + a * r1) / det;
        // second block: A11 y1 = b1 - A10 y0
        double s0 = b[2] - D[2][0] * want[0] - D[2][1] * want[1];
        double s1 = b[3] - D[3][0] * want[0] - D[3][1] * want[1];
        a = D[2][2];
        bb = D[2][3];
        c = D[3][2];
        d = D[3][3];
        det = a * d - bb * c;
        want[2] = (d * s0 - bb * s1) / det;
        want[3] = (-c * s0 + a * s1) / det;
    }
    block_gs_sweep(A, two, x, b, SweepDirection::forward);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(x[i] - want[i]) <= 1e-12);
}

TEST_CASE("build_blocks on a path graph") {
    SparseMatrix A = path_graph(6);
    BlockPartition p = build_blocks(A, 2);
    CHECK(p.nblocks == 2);
    CHECK(p.block_of == std::vector<int>{0, 0, 0, 1, 1, 1});

    BlockPartition singles = build_blocks(A, 6);
    CHECK(singles.nblocks == 6);
    for (int i = 0; i < 6; ++i) CHECK(singles.block_of[i] == i);
}

TEST_CASE("build_blocks assigns every vertex exactly once") {
    Mesh m = disc_mesh(2);
    AssembledSystem sys = assemble(m, DiffusionCoefficients{});
    BlockPartition p = build_blocks(sys.A, 6);
    std::vector<int> count(p.nblocks, 0);
    for (int i = 0; i < sys.A.nrows; ++i) {
        REQUIRE(p.block_of[i] >= 0);
        REQUIRE(p.block_of[i] < p.nblocks);
        ++count[p.block_of[i]];
    }
    int total = 0;
    for (int c : count) total += c;
    CHECK(total == sys.A.nrows);
}

TEST_CASE("generate_test_vectors determinism and normalization") {
    Mesh m = disc_mesh(2);
    AssembledSystem sys = assemble(m, DiffusionCoefficients{});
    SmootherSpec gs;

    TestVectorSet raw = generate_test_vectors(sys.A, 3, 0, gs, 42);
    for (const auto& v : raw.vectors) CHECK(norm2(v) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(raw.weights == std::vector<double>(3, 1.0));

    TestVectorSet again = generate_test_vectors(sys.A, 3, 0, gs, 42);
    CHECK(raw.vectors == again.vectors);  // bitwise reproducible

    TestVectorSet other = generate_test_vectors(sys.A, 3, 0, gs, 43);
    CHECK(raw.vectors != other.vectors);
}

TEST_CASE("smoothing reduces the Rayleigh quotient of every test vector") {
    Mesh m = disc_mesh(2);
    AssembledSystem sys = assemble(m, DiffusionCoefficients{});
    SmootherSpec gs;
    TestVectorSet raw = generate_test_vectors(sys.A, 4, 0, gs, 7);
    TestVectorSet smoothed = generate_test_vectors(sys.A, 4, 4, gs, 7);
    for (int k = 0; k < 4; ++k) {
        double rq_raw = dot(raw.vectors[k], spmv(sys.A, raw.vectors[k])) /
                        dot(raw.vectors[k], raw.vectors[k]);
        double rq_smooth = dot(smoothed.vectors[k], spmv(sys.A, smoothed.vectors[k])) /
                           dot(smoothed.vectors[k], smoothed.vectors[k]);
        CHECK(rq_smooth < rq_raw);
    }
}
