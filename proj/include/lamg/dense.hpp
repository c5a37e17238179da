#pragma once

#include <span>
#include <vector>

namespace lamg {

struct SparseMatrix;

/// Row-major dense matrix for the small problems (local regressions,
/// coarsest grids) the setup works with.
struct DenseMatrix {
    int nrows = 0;
    int ncols = 0;
    std::vector<double> values;  // nrows * ncols, row-major

    DenseMatrix() = default;
    DenseMatrix(int r, int c) : nrows(r), ncols(c), values(static_cast<size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return values[static_cast<size_t>(i) * ncols + j]; }
    double operator()(int i, int j) const { return values[static_cast<size_t>(i) * ncols + j]; }
};

DenseMatrix dense_identity(int n);
DenseMatrix dense_from_sparse(const SparseMatrix& A);

struct LsqResult {
    std::vector<double> x;
    bool rank_deficient = false;
};

/// Minimizer of ||v - W x||_2 by column-pivoted Householder QR.
/// Trailing R diagonal entries below 1e-12 * max diag are treated as zero
/// and the minimum-norm solution of the truncated system is returned.
LsqResult solve_dense_lsq(const DenseMatrix& W, std::span<const double> v);

/// Dense Cholesky factor (lower triangular); throws if the pivot is not
/// strictly positive.
struct CholeskyFactor {
    int n = 0;
    std::vector<double> lower;  // row-major lower triangle, full storage

    std::vector<double> solve(std::span<const double> b) const;
};

CholeskyFactor cholesky(const DenseMatrix& A);
bool try_cholesky(const DenseMatrix& A, CholeskyFactor* out);

/// Solves A x = b by LU with partial pivoting; throws on a singular pivot.
std::vector<double> lu_solve(const DenseMatrix& A, std::span<const double> b);

struct EigResult {
    std::vector<double> eigenvalues;  // ascending
    DenseMatrix eigenvectors;         // columns, B-orthonormal
};

/// k algebraically smallest eigenpairs of A v = lambda B v for symmetric A
/// and SPD B: Cholesky B = L L^T, cyclic Jacobi on L^-1 A L^-T,
/// back-substitution of the eigenvectors.
EigResult dense_sym_generalized_eig(const DenseMatrix& A, const DenseMatrix& B, int k);

/// k smallest eigenpairs of the standard symmetric problem (B = I).
EigResult dense_sym_eig(const DenseMatrix& A, int k);

}  // namespace lamg
