#pragma once

#include <filesystem>
#include <istream>
#include <vector>

#include "lobpcg/dense.hpp"
#include "lobpcg/operators.hpp"

namespace lobpcg::io {

/// Reads `%%MatrixMarket matrix coordinate real {symmetric|general}`.
/// General files must hold numerically symmetric data (1e-12 relative).
SparseSymMatrix parse_matrix_market(const std::filesystem::path& path);
SparseSymMatrix parse_matrix_market(std::istream& in);

/// Writes the lower triangle as a coordinate real symmetric file.
void write_matrix_market(const SparseSymMatrix& m, const std::filesystem::path& path);

/// Dense blocks use `%%MatrixMarket matrix array real general`, column-major.
DenseMatrix parse_matrix_market_array(const std::filesystem::path& path);
void write_matrix_market_array(const DenseMatrix& m, const std::filesystem::path& path);

struct EdgeList {
  std::size_t vertex_count = 0;  // max vertex id + 1
  std::vector<Edge> edges;
};

/// Rows `u,v,weight` with 0-based ids; an optional non-numeric header line,
/// blank lines and CRLF endings are accepted.
EdgeList parse_edge_csv(const std::filesystem::path& path);
EdgeList parse_edge_csv(std::istream& in);

}  // namespace lobpcg::io
