#include "lamg/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <queue>
#include <stdexcept>
#include <string>

namespace lamg {

SparseMatrix csr_from_triplets(int nrows, int ncols, std::span<const Triplet> entries) {
    if (nrows < 0 || ncols < 0) throw std::invalid_argument("csr_from_triplets: negative dimension");
    for (const Triplet& t : entries) {
        if (t.row < 0 || t.row >= nrows || t.col < 0 || t.col >= ncols)
            throw std::invalid_argument("csr_from_triplets: index out of range at (" +
                                        std::to_string(t.row) + "," + std::to_string(t.col) + ")");
    }
    std::vector<Triplet> sorted(entries.begin(), entries.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    SparseMatrix A;
    A.nrows = nrows;
    A.ncols = ncols;
    A.row_offsets.assign(static_cast<size_t>(nrows) + 1, 0);
    A.col_indices.reserve(sorted.size());
    A.values.reserve(sorted.size());

    size_t k = 0;
    for (int i = 0; i < nrows; ++i) {
        while (k < sorted.size() && sorted[k].row == i) {
            int col = sorted[k].col;
            double sum = 0.0;
            while (k < sorted.size() && sorted[k].row == i && sorted[k].col == col) {
                sum += sorted[k].value;
                ++k;
            }
            if (sum != 0.0) {
                A.col_indices.push_back(col);
                A.values.push_back(sum);
            }
        }
        A.row_offsets[i + 1] = static_cast<int>(A.col_indices.size());
    }
    return A;
}

SparseMatrix sparse_identity(int n) {
    SparseMatrix I;
    I.nrows = I.ncols = n;
    I.row_offsets.resize(n + 1);
    I.col_indices.resize(n);
    I.values.assign(n, 1.0);
    for (int i = 0; i <= n; ++i) I.row_offsets[i] = i;
    for (int i = 0; i < n; ++i) I.col_indices[i] = i;
    return I;
}

std::vector<double> spmv(const SparseMatrix& A, std::span<const double> x) {
    if (static_cast<int>(x.size()) != A.ncols) throw std::invalid_argument("spmv: dimension mismatch");
    std::vector<double> y(A.nrows, 0.0);
    for (int i = 0; i < A.nrows; ++i) {
        double acc = 0.0;
        for (int k = A.row_begin(i); k < A.row_end(i); ++k) acc += A.values[k] * x[A.col_indices[k]];
        y[i] = acc;
    }
    return y;
}

SparseMatrix transpose(const SparseMatrix& A) {
    SparseMatrix T;
    T.nrows = A.ncols;
    T.ncols = A.nrows;
    T.row_offsets.assign(static_cast<size_t>(A.ncols) + 1, 0);
    T.col_indices.resize(A.nnz());
    T.values.resize(A.nnz());
    for (int k = 0; k < A.nnz(); ++k) T.row_offsets[A.col_indices[k] + 1]++;
    for (int j = 0; j < A.ncols; ++j) T.row_offsets[j + 1] += T.row_offsets[j];
    std::vector<int> cursor(T.row_offsets.begin(), T.row_offsets.end() - 1);
    for (int i = 0; i < A.nrows; ++i) {
        for (int k = A.row_begin(i); k < A.row_end(i); ++k) {
            int pos = cursor[A.col_indices[k]]++;
            T.col_indices[pos] = i;
            T.values[pos] = A.values[k];
        }
    }
    return T;
}

SparseMatrix sparse_matmul(const SparseMatrix& A, const SparseMatrix& B) {
    if (A.ncols != B.nrows) throw std::invalid_argument("sparse_matmul: dimension mismatch");
    SparseMatrix C;
    C.nrows = A.nrows;
    C.ncols = B.ncols;
    C.row_offsets.assign(static_cast<size_t>(A.nrows) + 1, 0);

    // Gather into a dense scratch row, tracking touched columns.
    std::vector<double> acc(B.ncols, 0.0);
    std::vector<char> seen(B.ncols, 0);
    std::vector<int> touched;
    for (int i = 0; i < A.nrows; ++i) {
        touched.clear();
        for (int ka = A.row_begin(i); ka < A.row_end(i); ++ka) {
            int j = A.col_indices[ka];
            double aij = A.values[ka];
            for (int kb = B.row_begin(j); kb < B.row_end(j); ++kb) {
                int c = B.col_indices[kb];
                if (!seen[c]) {
                    seen[c] = 1;
                    acc[c] = 0.0;
                    touched.push_back(c);
                }
                acc[c] += aij * B.values[kb];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (int c : touched) {
            if (acc[c] != 0.0) {
                C.col_indices.push_back(c);
                C.values.push_back(acc[c]);
            }
            seen[c] = 0;
        }
        C.row_offsets[i + 1] = static_cast<int>(C.col_indices.size());
    }
    return C;
}

SparseMatrix galerkin(const SparseMatrix& A, const SparseMatrix& P) {
    if (A.nrows != A.ncols) throw std::invalid_argument("galerkin: A must be square");
    if (A.ncols != P.nrows) throw std::invalid_argument("galerkin: dimension mismatch");
    SparseMatrix M = sparse_matmul(transpose(P), sparse_matmul(A, P));
    SparseMatrix Mt = transpose(M);

    double max_abs = 0.0;
    for (double v : M.values) max_abs = std::max(max_abs, std::abs(v));

    std::vector<Triplet> halves;
    halves.reserve(2 * M.values.size());
    for (int i = 0; i < M.nrows; ++i)
        for (int k = M.row_begin(i); k < M.row_end(i); ++k)
            halves.push_back({i, M.col_indices[k], M.values[k]});
    for (int i = 0; i < Mt.nrows; ++i)
        for (int k = Mt.row_begin(i); k < Mt.row_end(i); ++k)
            halves.push_back({i, Mt.col_indices[k], -Mt.values[k]});
    SparseMatrix D = csr_from_triplets(M.nrows, M.ncols, halves);  // M - M^T
    double asym = 0.0;
    for (double v : D.values) asym = std::max(asym, std::abs(v));
    if (asym > 1e-12 * std::max(max_abs, 1e-300))
        throw std::runtime_error("galerkin: product is not symmetric (is A symmetric?)");

    for (Triplet& t : halves) t.value *= 0.5;
    for (size_t k = M.values.size(); k < halves.size(); ++k) halves[k].value = -halves[k].value;
    return csr_from_triplets(M.nrows, M.ncols, halves);  // (M + M^T)/2
}

SymmetrizedGraph SymmetrizedGraph::build(const SparseMatrix& A) {
    if (A.nrows != A.ncols) throw std::invalid_argument("SymmetrizedGraph: A must be square");
    std::vector<Triplet> links;
    links.reserve(2 * A.values.size());
    for (int r = 0; r < A.nrows; ++r) {
        for (int k = A.row_begin(r); k < A.row_end(r); ++k) {
            int c = A.col_indices[k];
            if (c == r) continue;
            links.push_back({r, c, 1.0});
            links.push_back({c, r, 1.0});
        }
    }
    SymmetrizedGraph g;
    g.pattern = csr_from_triplets(A.nrows, A.ncols, links);
    return g;
}

Neighborhood graph_neighborhood(const SymmetrizedGraph& g, int i, int radius) {
    const SparseMatrix& pattern = g.pattern;
    if (i < 0 || i >= pattern.nrows) throw std::invalid_argument("graph_neighborhood: center out of range");
    if (radius < 1) throw std::invalid_argument("graph_neighborhood: radius must be >= 1");

    thread_local std::vector<int> dist;
    thread_local std::vector<int> stamp;
    thread_local int epoch = 0;
    if (static_cast<int>(dist.size()) < pattern.nrows) {
        dist.assign(pattern.nrows, 0);
        stamp.assign(pattern.nrows, 0);
        epoch = 0;
    }

    ++epoch;
    std::queue<int> frontier;
    frontier.push(i);
    stamp[i] = epoch;
    dist[i] = 0;

    Neighborhood nb;
    nb.center = i;
    nb.members.push_back({i, 0});
    while (!frontier.empty()) {
        int u = frontier.front();
        frontier.pop();
        if (dist[u] == radius) continue;
        for (int k = pattern.row_begin(u); k < pattern.row_end(u); ++k) {
            int v = pattern.col_indices[k];
            if (stamp[v] == epoch) continue;
            stamp[v] = epoch;
            dist[v] = dist[u] + 1;
            nb.members.push_back({v, dist[v]});
            frontier.push(v);
        }
    }
    std::sort(nb.members.begin(), nb.members.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second < b.second : a.first < b.first;
    });
    return nb;
}

Neighborhood graph_neighborhood(const SparseMatrix& A, int i, int radius) {
    return graph_neighborhood(SymmetrizedGraph::build(A), i, radius);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace lamg
