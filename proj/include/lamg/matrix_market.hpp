#pragma once

#include <iosfwd>
#include <string>

#include "lamg/sparse.hpp"

namespace lamg {

/// Reads a Matrix Market coordinate file
/// (%%MatrixMarket matrix coordinate real general|symmetric, 1-based).
SparseMatrix read_matrix_market(std::istream& in);
SparseMatrix read_matrix_market_file(const std::string& path);

/// Writes coordinate format; with symmetric=true only the lower triangle is
/// emitted and the header declares symmetric storage.
void write_matrix_market(std::ostream& out, const SparseMatrix& A, bool symmetric);
void write_matrix_market_file(const std::string& path, const SparseMatrix& A, bool symmetric);

}  // namespace lamg
