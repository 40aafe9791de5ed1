#pragma once

#include "lobpcg/dense.hpp"
#include "lobpcg/operators.hpp"

namespace lobpcg {

/// Brute-force dense solution of A x = lambda B x: densifies both operators,
/// reduces with the Cholesky factor of B and diagonalizes. Returns every
/// eigenpair, ascending, with B-orthonormal vectors.
///
/// Throws DenseCapExceeded above kDenseCap, NotPositiveDefinite when B has no
/// Cholesky factor.
SymEigResult dense_oracle(const LinearOperator& a, const LinearOperator& b);

}  // namespace lobpcg
