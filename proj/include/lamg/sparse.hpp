#pragma once

#include <span>
#include <vector>

namespace lamg {

struct Triplet {
    int row;
    int col;
    double value;
};

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row and no explicitly stored zeros survive construction.
struct SparseMatrix {
    int nrows = 0;
    int ncols = 0;
    std::vector<int> row_offsets;  // length nrows+1, nondecreasing
    std::vector<int> col_indices;
    std::vector<double> values;

    int nnz() const { return row_offsets.empty() ? 0 : row_offsets.back(); }

    int row_begin(int i) const { return row_offsets[i]; }
    int row_end(int i) const { return row_offsets[i + 1]; }
};

/// One variable's graph neighborhood: members sorted by (distance, index),
/// the center itself at distance 0.
struct Neighborhood {
    int center = -1;
    std::vector<std::pair<int, int>> members;  // (variable, graph distance)
};

SparseMatrix csr_from_triplets(int nrows, int ncols, std::span<const Triplet> entries);

SparseMatrix sparse_identity(int n);

std::vector<double> spmv(const SparseMatrix& A, std::span<const double> x);

SparseMatrix transpose(const SparseMatrix& A);

SparseMatrix sparse_matmul(const SparseMatrix& A, const SparseMatrix& B);

/// Galerkin triple product P^T A P for symmetric A. The result is
/// symmetrized as (M + M^T)/2; asymmetry beyond 1e-12 * max|M| throws.
SparseMatrix galerkin(const SparseMatrix& A, const SparseMatrix& P);

/// Undirected adjacency of the symmetrized off-diagonal pattern of a square
/// matrix; built once and shared by all neighborhood queries on it.
struct SymmetrizedGraph {
    SparseMatrix pattern;

    static SymmetrizedGraph build(const SparseMatrix& A);
};

/// Breadth-first search on the undirected graph of the symmetrized
/// off-diagonal pattern of A; returns all j with dist(i, j) <= radius.
Neighborhood graph_neighborhood(const SparseMatrix& A, int i, int radius);
Neighborhood graph_neighborhood(const SymmetrizedGraph& g, int i, int radius);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace lamg
