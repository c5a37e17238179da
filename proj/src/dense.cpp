#include "lamg/dense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lamg/sparse.hpp"

namespace lamg {

DenseMatrix dense_identity(int n) {
    DenseMatrix I(n, n);
    for (int i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
}

DenseMatrix dense_from_sparse(const SparseMatrix& A) {
    DenseMatrix D(A.nrows, A.ncols);
    for (int i = 0; i < A.nrows; ++i)
        for (int k = A.row_begin(i); k < A.row_end(i); ++k) D(i, A.col_indices[k]) = A.values[k];
    return D;
}

namespace {

// Householder vector for column x(k:m-1); returns beta and stores v in x
// with v[k] = 1 implied (classic LAPACK layout not needed at these sizes,
// we keep the full reflector).
struct Reflector {
    std::vector<double> v;  // length m, zero above k
    double beta = 0.0;
    int k = 0;
};

void apply_reflector(const Reflector& h, std::vector<double>& col, int m) {
    if (h.beta == 0.0) return;
    double s = 0.0;
    for (int i = h.k; i < m; ++i) s += h.v[i] * col[i];
    s *= h.beta;
    for (int i = h.k; i < m; ++i) col[i] -= s * h.v[i];
}

}  // namespace

LsqResult solve_dense_lsq(const DenseMatrix& W, std::span<const double> v) {
    const int m = W.nrows;
    const int n = W.ncols;
    if (static_cast<int>(v.size()) != m) throw std::invalid_argument("solve_dense_lsq: dimension mismatch");
    LsqResult out;
    out.x.assign(n, 0.0);
    if (n == 0) return out;
    if (m == 0) {
        out.rank_deficient = true;
        return out;
    }

    // Column-pivoted Householder QR on a column-major working copy.
    std::vector<std::vector<double>> a(n, std::vector<double>(m));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i) a[j][i] = W(i, j);
    std::vector<double> rhs(v.begin(), v.end());
    std::vector<int> piv(n);
    std::iota(piv.begin(), piv.end(), 0);
    std::vector<Reflector> refl;

    const int kmax = std::min(m, n);
    int rank = 0;
    double max_diag = 0.0;
    for (int k = 0; k < kmax; ++k) {
        // Pivot on the largest remaining column norm (lowest index on ties).
        int best = k;
        double best_norm = -1.0;
        for (int j = k; j < n; ++j) {
            double s = 0.0;
            for (int i = k; i < m; ++i) s += a[j][i] * a[j][i];
            if (s > best_norm) {
                best_norm = s;
                best = j;
            }
        }
        if (best != k) {
            std::swap(a[k], a[best]);
            std::swap(piv[k], piv[best]);
        }

        double alpha = std::sqrt(best_norm);
        if (alpha == 0.0) break;

        Reflector h;
        h.k = k;
        h.v.assign(m, 0.0);
        double x0 = a[k][k];
        double sign = x0 >= 0.0 ? 1.0 : -1.0;
        double v0 = x0 + sign * alpha;
        h.v[k] = 1.0;
        for (int i = k + 1; i < m; ++i) h.v[i] = a[k][i] / v0;
        double vnorm2 = 1.0;
        for (int i = k + 1; i < m; ++i) vnorm2 += h.v[i] * h.v[i];
        h.beta = 2.0 / vnorm2;

        for (int j = k; j < n; ++j) apply_reflector(h, a[j], m);
        apply_reflector(h, rhs, m);
        refl.push_back(h);

        max_diag = std::max(max_diag, std::abs(a[k][k]));
        ++rank;
    }
    // Numerical rank: trailing diagonal entries below 1e-12 * max diag count
    // as zero.
    int r = 0;
    for (int k = 0; k < rank; ++k)
        if (std::abs(a[k][k]) >= 1e-12 * max_diag) r = k + 1;
    out.rank_deficient = (r < n);

    std::vector<double> y(n, 0.0);
    if (r == n) {
        for (int k = n - 1; k >= 0; --k) {
            double s = rhs[k];
            for (int j = k + 1; j < n; ++j) s -= a[j][k] * y[j];
            y[k] = s / a[k][k];
        }
    } else if (r > 0) {
        // Minimum-norm solution of the truncated system [R11 R12] y = c via
        // an LQ step: QR-factor the transpose T = [R11 R12]^T (n x r).
        std::vector<std::vector<double>> t(r, std::vector<double>(n, 0.0));
        for (int i = 0; i < r; ++i)
            for (int j = i; j < n; ++j) t[i][j] = a[j][i];  // row i of [R11 R12]

        std::vector<Reflector> lrefl;
        for (int k = 0; k < r; ++k) {
            double s = 0.0;
            for (int i = k; i < n; ++i) s += t[k][i] * t[k][i];
            double alpha = std::sqrt(s);
            Reflector h;
            h.k = k;
            h.v.assign(n, 0.0);
            if (alpha != 0.0) {
                double x0 = t[k][k];
                double sign = x0 >= 0.0 ? 1.0 : -1.0;
                double v0 = x0 + sign * alpha;
                h.v[k] = 1.0;
                for (int i = k + 1; i < n; ++i) h.v[i] = t[k][i] / v0;
                double vnorm2 = 1.0;
                for (int i = k + 1; i < n; ++i) vnorm2 += h.v[i] * h.v[i];
                h.beta = 2.0 / vnorm2;
                for (int j = k; j < r; ++j) apply_reflector(h, t[j], n);
            }
            lrefl.push_back(h);
        }
        // Now T = Q2 R2 with R2 upper triangular (r x r) living in t[j][i],
        // i<=j. Solve R2^T z = c by forward substitution.
        std::vector<double> z(r, 0.0);
        for (int i = 0; i < r; ++i) {
            double s = rhs[i];
            for (int j = 0; j < i; ++j) s -= t[i][j] * z[j];
            double d = t[i][i];
            if (d == 0.0) throw std::runtime_error("solve_dense_lsq: internal rank inconsistency");
            z[i] = s / d;
        }
        // y = Q2 [z; 0]
        y.assign(n, 0.0);
        std::copy(z.begin(), z.end(), y.begin());
        for (int k = r - 1; k >= 0; --k) apply_reflector(lrefl[k], y, n);
    }

    for (int j = 0; j < n; ++j) out.x[piv[j]] = y[j];
    return out;
}

std::vector<double> CholeskyFactor::solve(std::span<const double> b) const {
    if (static_cast<int>(b.size()) != n) throw std::invalid_argument("CholeskyFactor::solve: size mismatch");
    std::vector<double> y(b.begin(), b.end());
    for (int i = 0; i < n; ++i) {
        double s = y[i];
        for (int j = 0; j < i; ++j) s -= lower[static_cast<size_t>(i) * n + j] * y[j];
        y[i] = s / lower[static_cast<size_t>(i) * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int j = i + 1; j < n; ++j) s -= lower[static_cast<size_t>(j) * n + i] * y[j];
        y[i] = s / lower[static_cast<size_t>(i) * n + i];
    }
    return y;
}

bool try_cholesky(const DenseMatrix& A, CholeskyFactor* out) {
    if (A.nrows != A.ncols) throw std::invalid_argument("cholesky: matrix must be square");
    const int n = A.nrows;
    std::vector<double> L(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = A(i, j);
            for (int k = 0; k < j; ++k) s -= L[static_cast<size_t>(i) * n + k] * L[static_cast<size_t>(j) * n + k];
            if (i == j) {
                if (s <= 0.0) return false;
                L[static_cast<size_t>(i) * n + j] = std::sqrt(s);
            } else {
                L[static_cast<size_t>(i) * n + j] = s / L[static_cast<size_t>(j) * n + j];
            }
        }
    }
    if (out) {
        out->n = n;
        out->lower = std::move(L);
    }
    return true;
}

CholeskyFactor cholesky(const DenseMatrix& A) {
    CholeskyFactor f;
    if (!try_cholesky(A, &f)) throw std::runtime_error("cholesky: matrix is not positive definite");
    return f;
}

std::vector<double> lu_solve(const DenseMatrix& A, std::span<const double> b) {
    if (A.nrows != A.ncols) throw std::invalid_argument("lu_solve: matrix must be square");
    const int n = A.nrows;
    if (static_cast<int>(b.size()) != n) throw std::invalid_argument("lu_solve: size mismatch");
    DenseMatrix U = A;
    std::vector<double> x(b.begin(), b.end());
    for (int k = 0; k < n; ++k) {
        int p = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(U(i, k)) > std::abs(U(p, k))) p = i;
        if (U(p, k) == 0.0) throw std::runtime_error("lu_solve: singular matrix");
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(U(p, j), U(k, j));
            std::swap(x[p], x[k]);
        }
        for (int i = k + 1; i < n; ++i) {
            double f = U(i, k) / U(k, k);
            U(i, k) = 0.0;
            for (int j = k + 1; j < n; ++j) U(i, j) -= f * U(k, j);
            x[i] -= f * x[k];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = x[i];
        for (int j = i + 1; j < n; ++j) s -= U(i, j) * x[j];
        x[i] = s / U(i, i);
    }
    return x;
}

namespace {

// Cyclic Jacobi iteration for a symmetric matrix; returns eigenvalues in
// ascending order with matching eigenvector columns.
void jacobi_eig(DenseMatrix C, std::vector<double>& evals, DenseMatrix& evecs) {
    const int n = C.nrows;
    evecs = dense_identity(n);

    double norm_ref = 0.0;
    for (double v : C.values) norm_ref += v * v;
    norm_ref = std::sqrt(norm_ref);
    const double tol = 1e-12 * std::max(norm_ref, 1e-300);

    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += 2.0 * C(p, q) * C(p, q);
        if (std::sqrt(off) <= tol) break;

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = C(p, q);
                if (apq == 0.0) continue;
                double app = C(p, p), aqq = C(q, q);
                double tau = (aqq - app) / (2.0 * apq);
                double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;
                for (int k = 0; k < n; ++k) {
                    double ckp = C(k, p), ckq = C(k, q);
                    C(k, p) = c * ckp - s * ckq;
                    C(k, q) = s * ckp + c * ckq;
                }
                for (int k = 0; k < n; ++k) {
                    double cpk = C(p, k), cqk = C(q, k);
                    C(p, k) = c * cpk - s * cqk;
                    C(q, k) = s * cpk + c * cqk;
                }
                for (int k = 0; k < n; ++k) {
                    double vkp = evecs(k, p), vkq = evecs(k, q);
                    evecs(k, p) = c * vkp - s * vkq;
                    evecs(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(n);
    for (int i = 0; i < n; ++i) diag[i] = C(i, i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return diag[a] < diag[b]; });

    evals.resize(n);
    DenseMatrix sorted(n, n);
    for (int j = 0; j < n; ++j) {
        evals[j] = diag[order[j]];
        for (int i = 0; i < n; ++i) sorted(i, j) = evecs(i, order[j]);
    }
    evecs = std::move(sorted);
}

}  // namespace

EigResult dense_sym_eig(const DenseMatrix& A, int k) {
    if (A.nrows != A.ncols) throw std::invalid_argument("dense_sym_eig: matrix must be square");
    if (k < 0 || k > A.nrows) throw std::invalid_argument("dense_sym_eig: invalid k");
    std::vector<double> evals;
    DenseMatrix evecs;
    jacobi_eig(A, evals, evecs);
    EigResult res;
    res.eigenvalues.assign(evals.begin(), evals.begin() + k);
    res.eigenvectors = DenseMatrix(A.nrows, k);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < A.nrows; ++i) res.eigenvectors(i, j) = evecs(i, j);
    return res;
}

EigResult dense_sym_generalized_eig(const DenseMatrix& A, const DenseMatrix& B, int k) {
    if (A.nrows != A.ncols || B.nrows != B.ncols || A.nrows != B.nrows)
        throw std::invalid_argument("dense_sym_generalized_eig: dimension mismatch");
    const int n = A.nrows;
    if (k < 0 || k > n) throw std::invalid_argument("dense_sym_generalized_eig: invalid k");

    CholeskyFactor L = cholesky(B);  // throws if B is not SPD
    auto lower = [&](int i, int j) { return L.lower[static_cast<size_t>(i) * n + j]; };

    // Y = L^-1 A (forward substitution per column).
    DenseMatrix Y(n, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            double s = A(i, j);
            for (int t = 0; t < i; ++t) s -= lower(i, t) * Y(t, j);
            Y(i, j) = s / lower(i, i);
        }
    }
    // C = Y L^-T = (L^-1 Y^T)^T; compute Z = L^-1 Y^T then transpose.
    DenseMatrix C(n, n);
    for (int j = 0; j < n; ++j) {
        std::vector<double> col(n);
        for (int i = 0; i < n; ++i) {
            double s = Y(j, i);  // Y^T(i, j)
            for (int t = 0; t < i; ++t) s -= lower(i, t) * col[t];
            col[i] = s / lower(i, i);
        }
        for (int i = 0; i < n; ++i) C(j, i) = col[i];
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double avg = 0.5 * (C(i, j) + C(j, i));
            C(i, j) = C(j, i) = avg;
        }

    std::vector<double> evals;
    DenseMatrix U;
    jacobi_eig(C, evals, U);

    EigResult res;
    res.eigenvalues.assign(evals.begin(), evals.begin() + k);
    res.eigenvectors = DenseMatrix(n, k);
    // V = L^-T U (back substitution per column).
    for (int j = 0; j < k; ++j) {
        std::vector<double> col(n);
        for (int i = n - 1; i >= 0; --i) {
            double s = U(i, j);
            for (int t = i + 1; t < n; ++t) s -= lower(t, i) * col[t];
            col[i] = s / lower(i, i);
        }
        for (int i = 0; i < n; ++i) res.eigenvectors(i, j) = col[i];
    }
    return res;
}

}  // namespace lamg
