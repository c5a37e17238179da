#include "lamg/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lamg {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

}  // namespace

SparseMatrix read_matrix_market(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("matrix market: empty stream");
    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket") throw std::runtime_error("matrix market: missing banner");
    if (lower(object) != "matrix" || lower(format) != "coordinate")
        throw std::runtime_error("matrix market: only coordinate matrices are supported");
    if (lower(field) != "real")
        throw std::runtime_error("matrix market: only real matrices are supported");
    std::string sym = lower(symmetry);
    if (sym != "general" && sym != "symmetric")
        throw std::runtime_error("matrix market: only general or symmetric storage is supported");

    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '%') break;
    }
    std::istringstream sizes(line);
    long nrows = 0, ncols = 0, nnz = 0;
    if (!(sizes >> nrows >> ncols >> nnz)) throw std::runtime_error("matrix market: bad size line");

    std::vector<Triplet> trips;
    trips.reserve(sym == "symmetric" ? 2 * nnz : nnz);
    for (long k = 0; k < nnz; ++k) {
        long i = 0, j = 0;
        double v = 0.0;
        if (!(in >> i >> j >> v)) throw std::runtime_error("matrix market: truncated entry list");
        int r = static_cast<int>(i - 1), c = static_cast<int>(j - 1);
        trips.push_back({r, c, v});
        if (sym == "symmetric" && r != c) trips.push_back({c, r, v});
    }
    return csr_from_triplets(static_cast<int>(nrows), static_cast<int>(ncols), trips);
}

SparseMatrix read_matrix_market_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("matrix market: cannot open " + path);
    return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const SparseMatrix& A, bool symmetric) {
    out << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general") << "\n";
    long count = 0;
    for (int i = 0; i < A.nrows; ++i)
        for (int k = A.row_begin(i); k < A.row_end(i); ++k)
            if (!symmetric || A.col_indices[k] <= i) ++count;
    out << A.nrows << " " << A.ncols << " " << count << "\n";
    char buf[64];
    for (int i = 0; i < A.nrows; ++i) {
        for (int k = A.row_begin(i); k < A.row_end(i); ++k) {
            int j = A.col_indices[k];
            if (symmetric && j > i) continue;
            std::snprintf(buf, sizeof(buf), "%.17g", A.values[k]);
            out << (i + 1) << " " << (j + 1) << " " << buf << "\n";
        }
    }
}

void write_matrix_market_file(const std::string& path, const SparseMatrix& A, bool symmetric) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("matrix market: cannot open " + path + " for writing");
    write_matrix_market(out, A, symmetric);
}

}  // namespace lamg
