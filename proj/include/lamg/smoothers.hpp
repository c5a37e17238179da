#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lamg/sparse.hpp"

namespace lamg {

enum class SweepDirection { forward, backward, symmetric };
enum class SmootherKind { gauss_seidel, block_gauss_seidel };

struct BlockPartition {
    std::vector<int> block_of;  // block index per variable
    int nblocks = 0;
};

struct SmootherSpec {
    SmootherKind kind = SmootherKind::gauss_seidel;
    SweepDirection direction = SweepDirection::forward;
    std::optional<BlockPartition> blocks;  // present iff kind == block_gauss_seidel
};

/// Pointwise Gauss-Seidel sweep, updating x in place. symmetric = forward
/// followed by backward. Throws on a missing/zero diagonal.
void gs_sweep(const SparseMatrix& A, std::span<double> x, std::span<const double> b,
              SweepDirection direction);

/// Block Gauss-Seidel sweep: each diagonal block is solved exactly by a
/// dense factorization given the current off-block values.
void block_gs_sweep(const SparseMatrix& A, const BlockPartition& blocks, std::span<double> x,
                    std::span<const double> b, SweepDirection direction = SweepDirection::forward);

/// Greedy BFS aggregation into ceil(n/nblocks)-sized connected blocks,
/// seeded at the unassigned vertex of minimum index. Deterministic.
BlockPartition build_blocks(const SparseMatrix& A, int nblocks);

/// One application of the configured smoother.
void apply_smoother(const SparseMatrix& A, const SmootherSpec& spec, std::span<double> x,
                    std::span<const double> b);

/// K test vectors with per-vector weights; the regression data for the
/// coarsening stage.
struct TestVectorSet {
    std::vector<std::vector<double>> vectors;
    std::vector<double> weights;

    int count() const { return static_cast<int>(vectors.size()); }
    int length() const { return vectors.empty() ? 0 : static_cast<int>(vectors.front().size()); }
};

/// Seeded standard-normal vectors relaxed nu times on A x = 0 and normalized
/// to unit 2-norm. The generator is mt19937_64 with a Box-Muller transform,
/// so output is identical across platforms for a given seed.
TestVectorSet generate_test_vectors(const SparseMatrix& A, int K, int nu, const SmootherSpec& smoother,
                                    std::uint64_t seed);

/// Deterministic standard-normal sampler: mt19937_64 (whose output sequence
/// the standard pins down) mapped to doubles and fed through Box-Muller.
/// Distributions from <random> are implementation-defined, hence avoided.
class NormalSampler {
  public:
    explicit NormalSampler(std::uint64_t seed);
    ~NormalSampler();
    NormalSampler(const NormalSampler&) = delete;
    NormalSampler& operator=(const NormalSampler&) = delete;
    double next();

  private:
    struct Impl;
    Impl* impl_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace lamg
