#include "lobpcg/oracle.hpp"

#include "lobpcg/error.hpp"

namespace lobpcg {

SymEigResult dense_oracle(const LinearOperator& a, const LinearOperator& b) {
  const std::size_t n = a.dim();
  if (b.dim() != n) throw Error(ErrorCode::DimensionMismatch, "oracle operators disagree in size");
  if (n > kDenseCap) {
    throw Error(ErrorCode::DenseCapExceeded,
                "dimension " + std::to_string(n) + " above dense cap " + std::to_string(kDenseCap));
  }
  const DenseMatrix a_dense = symmetrized(densify(a));
  if (b.kind() == OperatorKind::Identity) return sym_eig(a_dense);

  const DenseMatrix l = cholesky(symmetrized(densify(b)));
  // C = L^{-1} A L^{-T}; A symmetric so (L^{-1} A)^T = A L^{-T}.
  const DenseMatrix left = solve_lower(l, a_dense);
  const DenseMatrix c = solve_lower(l, left.transposed());
  SymEigResult eig = sym_eig(symmetrized(c));
  eig.vectors = solve_lower_transposed(l, eig.vectors);
  return eig;
}

}  // namespace lobpcg
