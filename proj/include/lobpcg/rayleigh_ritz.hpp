#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lobpcg/dense.hpp"
#include "lobpcg/operators.hpp"

namespace lobpcg {

/// n x m block of vectors, one per column (X, W, P, R in the solvers).
using BlockVector = DenseMatrix;

/// (x, A x) / (x, B x). Throws ZeroVector when (x, B x) <= 1e-300.
double rayleigh_quotient(std::span<const double> x, const LinearOperator& a,
                         const LinearOperator& b);

/// R = A X - B X diag(theta).
BlockVector residual_block(const LinearOperator& a, const LinearOperator& b, const BlockVector& x,
                           std::span<const double> theta);

/// Same as residual_block when A X and B X are already available.
BlockVector residual_from_images(const BlockVector& ax, const BlockVector& bx,
                                 std::span<const double> theta);

struct OrthoResult {
  BlockVector basis;           // B-orthonormal, spans a subspace of span(V)
  BlockVector b_basis;         // B * basis
  DenseMatrix transform;       // basis = V * transform  (V.cols x basis.cols)
  std::vector<std::size_t> kept;  // input columns retained, ascending
  double gram_min = 0.0;       // extreme eigenvalues of the input Gram V^T B V
  double gram_max = 0.0;
};

/// B-orthonormalizes the columns of V.
///
/// The Gram matrix G = V^T B V is factored by Cholesky when its smallest
/// eigenvalue exceeds tau = m * 1e-12 * lambda_max(G). Otherwise, or if that
/// factorization fails, a maximal set of columns with Schur pivots above tau
/// is picked greedily from left to right and orthonormalized. A second pass
/// runs when the result misses orthonormality by more than 1e-12. Throws
/// ZeroRank when every column is dependent, LossOfOrthogonality when the
/// second pass still misses 1e-8.
OrthoResult b_orthonormalize(const BlockVector& v, const LinearOperator& b);

/// Same, with B V supplied by the caller.
OrthoResult b_orthonormalize(const BlockVector& v, const BlockVector& bv,
                             const LinearOperator& b);

struct RitzSet {
  std::vector<double> values;  // ascending
  BlockVector vectors;         // B-orthonormal Ritz vectors
  DenseMatrix coefficients;    // vectors = S * coefficients
  BlockVector a_vectors;       // A * vectors
  BlockVector b_vectors;       // B * vectors
  std::size_t basis_rank = 0;  // columns of S kept after orthonormalization
};

/// Rayleigh-Ritz on span(S): returns the `want` smallest Ritz pairs. Ritz
/// vectors have B-norm 1 and their first non-negligible entry positive.
/// Throws ZeroRank or InsufficientRank (rank of S below want).
RitzSet rayleigh_ritz(const BlockVector& s, const LinearOperator& a, const LinearOperator& b,
                      std::size_t want);

/// Removes from W its B-projection onto span(Q) for B-orthonormal Q, twice:
/// W <- W - Q (BQ)^T W.
void project_out(BlockVector& w, const BlockVector& q, const BlockVector& bq);

/// max |V^T B V - I|.
double b_orthonormality_error(const BlockVector& v, const LinearOperator& b);

}  // namespace lobpcg
