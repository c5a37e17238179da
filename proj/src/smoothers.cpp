#include "lamg/smoothers.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <stdexcept>

#include "lamg/dense.hpp"

namespace lamg {

namespace {

void gs_pass(const SparseMatrix& A, std::span<double> x, std::span<const double> b, bool backward) {
    const int n = A.nrows;
    for (int step = 0; step < n; ++step) {
        int i = backward ? n - 1 - step : step;
        double acc = 0.0;
        double diag = 0.0;
        bool has_diag = false;
        for (int k = A.row_begin(i); k < A.row_end(i); ++k) {
            int j = A.col_indices[k];
            if (j == i) {
                diag = A.values[k];
                has_diag = true;
            } else {
                acc += A.values[k] * x[j];
            }
        }
        if (!has_diag || diag == 0.0) throw std::runtime_error("gs_sweep: zero diagonal entry");
        x[i] = (b[i] - acc) / diag;
    }
}

}  // namespace

void gs_sweep(const SparseMatrix& A, std::span<double> x, std::span<const double> b,
              SweepDirection direction) {
    if (A.nrows != A.ncols) throw std::invalid_argument("gs_sweep: A must be square");
    if (static_cast<int>(x.size()) != A.nrows || static_cast<int>(b.size()) != A.nrows)
        throw std::invalid_argument("gs_sweep: dimension mismatch");
    switch (direction) {
        case SweepDirection::forward: gs_pass(A, x, b, false); break;
        case SweepDirection::backward: gs_pass(A, x, b, true); break;
        case SweepDirection::symmetric:
            gs_pass(A, x, b, false);
            gs_pass(A, x, b, true);
            break;
    }
}

namespace {

struct BlockLists {
    std::vector<std::vector<int>> members;  // ascending within each block
};

BlockLists block_lists(const BlockPartition& blocks, int n) {
    if (static_cast<int>(blocks.block_of.size()) != n)
        throw std::invalid_argument("block_gs_sweep: partition size mismatch");
    BlockLists lists;
    lists.members.resize(blocks.nblocks);
    for (int i = 0; i < n; ++i) {
        int blk = blocks.block_of[i];
        if (blk < 0 || blk >= blocks.nblocks)
            throw std::invalid_argument("block_gs_sweep: variable with invalid block id");
        lists.members[blk].push_back(i);
    }
    return lists;
}

void block_gs_pass(const SparseMatrix& A, const BlockLists& lists, std::span<double> x,
                   std::span<const double> b, bool backward) {
    const int nblocks = static_cast<int>(lists.members.size());
    std::vector<int> local(A.nrows, -1);
    for (int step = 0; step < nblocks; ++step) {
        int blk = backward ? nblocks - 1 - step : step;
        const auto& vars = lists.members[blk];
        if (vars.empty()) continue;
        const int bs = static_cast<int>(vars.size());
        for (int p = 0; p < bs; ++p) local[vars[p]] = p;

        DenseMatrix K(bs, bs);
        std::vector<double> rhs(bs);
        for (int p = 0; p < bs; ++p) {
            int i = vars[p];
            double acc = 0.0;
            for (int k = A.row_begin(i); k < A.row_end(i); ++k) {
                int j = A.col_indices[k];
                if (local[j] >= 0) {
                    K(p, local[j]) = A.values[k];
                } else {
                    acc += A.values[k] * x[j];
                }
            }
            rhs[p] = b[i] - acc;
        }
        std::vector<double> sol;
        try {
            sol = lu_solve(K, rhs);
        } catch (const std::runtime_error&) {
            throw std::runtime_error("block_gs_sweep: singular diagonal block");
        }
        for (int p = 0; p < bs; ++p) x[vars[p]] = sol[p];
        for (int p = 0; p < bs; ++p) local[vars[p]] = -1;
    }
}

}  // namespace

void block_gs_sweep(const SparseMatrix& A, const BlockPartition& blocks, std::span<double> x,
                    std::span<const double> b, SweepDirection direction) {
    if (A.nrows != A.ncols) throw std::invalid_argument("block_gs_sweep: A must be square");
    if (static_cast<int>(x.size()) != A.nrows || static_cast<int>(b.size()) != A.nrows)
        throw std::invalid_argument("block_gs_sweep: dimension mismatch");
    BlockLists lists = block_lists(blocks, A.nrows);
    switch (direction) {
        case SweepDirection::forward: block_gs_pass(A, lists, x, b, false); break;
        case SweepDirection::backward: block_gs_pass(A, lists, x, b, true); break;
        case SweepDirection::symmetric:
            block_gs_pass(A, lists, x, b, false);
            block_gs_pass(A, lists, x, b, true);
            break;
    }
}

BlockPartition build_blocks(const SparseMatrix& A, int nblocks) {
    if (A.nrows != A.ncols) throw std::invalid_argument("build_blocks: A must be square");
    const int n = A.nrows;
    if (nblocks < 1 || nblocks > n) throw std::invalid_argument("build_blocks: invalid block count");

    SymmetrizedGraph g = SymmetrizedGraph::build(A);
    const int target = (n + nblocks - 1) / nblocks;

    BlockPartition part;
    part.block_of.assign(n, -1);
    int next_seed = 0;
    while (true) {
        while (next_seed < n && part.block_of[next_seed] >= 0) ++next_seed;
        if (next_seed == n) break;
        int blk = part.nblocks++;
        std::queue<int> frontier;
        frontier.push(next_seed);
        part.block_of[next_seed] = blk;
        int size = 1;
        while (!frontier.empty() && size < target) {
            int u = frontier.front();
            frontier.pop();
            for (int k = g.pattern.row_begin(u); k < g.pattern.row_end(u) && size < target; ++k) {
                int v = g.pattern.col_indices[k];
                if (part.block_of[v] >= 0) continue;
                part.block_of[v] = blk;
                frontier.push(v);
                ++size;
            }
        }
    }
    return part;
}

void apply_smoother(const SparseMatrix& A, const SmootherSpec& spec, std::span<double> x,
                    std::span<const double> b) {
    if (spec.kind == SmootherKind::gauss_seidel) {
        gs_sweep(A, x, b, spec.direction);
    } else {
        if (!spec.blocks) throw std::invalid_argument("apply_smoother: block smoother without partition");
        block_gs_sweep(A, *spec.blocks, x, b, spec.direction);
    }
}

struct NormalSampler::Impl {
    std::mt19937_64 gen;
};

NormalSampler::NormalSampler(std::uint64_t seed) : impl_(new Impl{std::mt19937_64(seed)}) {}

NormalSampler::~NormalSampler() { delete impl_; }

double NormalSampler::next() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Uniform doubles in (0,1] and [0,1) from the top 53 bits.
    auto unit = [this]() { return (impl_->gen() >> 11) * (1.0 / 9007199254740992.0); };
    double u1 = 1.0 - unit();  // (0,1], keeps the log finite
    double u2 = unit();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
}

TestVectorSet generate_test_vectors(const SparseMatrix& A, int K, int nu, const SmootherSpec& smoother,
                                    std::uint64_t seed) {
    if (K < 1) throw std::invalid_argument("generate_test_vectors: K must be >= 1");
    if (nu < 0) throw std::invalid_argument("generate_test_vectors: nu must be >= 0");
    const int n = A.nrows;
    TestVectorSet set;
    set.vectors.resize(K);
    set.weights.assign(K, 1.0);

    NormalSampler rng(seed);
    std::vector<double> zero(n, 0.0);
    for (int k = 0; k < K; ++k) {
        auto& v = set.vectors[k];
        v.resize(n);
        for (int i = 0; i < n; ++i) v[i] = rng.next();
        for (int sweep = 0; sweep < nu; ++sweep) apply_smoother(A, smoother, v, zero);
        double nrm = norm2(v);
        if (nrm > 0.0)
            for (double& e : v) e /= nrm;
    }
    return set;
}

}  // namespace lamg
