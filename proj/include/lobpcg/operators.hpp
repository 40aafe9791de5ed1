#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "lobpcg/dense.hpp"

namespace lobpcg {

enum class OperatorKind { SparseSym, Diagonal, Identity, Composite };

/// Symmetric linear operator of dimension n acting column-wise on n x m
/// blocks. Implementations are immutable after construction, so apply() may
/// be called concurrently.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual std::size_t dim() const = 0;
  virtual OperatorKind kind() const = 0;
  /// Column k of the result is the operator applied to column k of v.
  virtual DenseMatrix apply(const DenseMatrix& v) const = 0;

  /// Max row 1-norm when the operator has explicit entries.
  virtual std::optional<double> max_row_abs_sum() const { return std::nullopt; }
};

class IdentityOperator final : public LinearOperator {
 public:
  explicit IdentityOperator(std::size_t n) : n_(n) {}
  std::size_t dim() const override { return n_; }
  OperatorKind kind() const override { return OperatorKind::Identity; }
  DenseMatrix apply(const DenseMatrix& v) const override;
  std::optional<double> max_row_abs_sum() const override { return 1.0; }

 private:
  std::size_t n_;
};

class DiagonalOperator final : public LinearOperator {
 public:
  explicit DiagonalOperator(std::vector<double> diag) : diag_(std::move(diag)) {}
  std::size_t dim() const override { return diag_.size(); }
  OperatorKind kind() const override { return OperatorKind::Diagonal; }
  DenseMatrix apply(const DenseMatrix& v) const override;
  std::optional<double> max_row_abs_sum() const override;
  std::span<const double> entries() const { return diag_; }

 private:
  std::vector<double> diag_;
};

/// Matrix-free operator backed by a callable. The callable must be
/// symmetric and thread-safe.
class FunctionOperator final : public LinearOperator {
 public:
  using Fn = std::function<DenseMatrix(const DenseMatrix&)>;
  FunctionOperator(std::size_t n, Fn fn) : n_(n), fn_(std::move(fn)) {}
  std::size_t dim() const override { return n_; }
  OperatorKind kind() const override { return OperatorKind::Composite; }
  DenseMatrix apply(const DenseMatrix& v) const override;

 private:
  std::size_t n_;
  Fn fn_;
};

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse rows storing both triangles of a symmetric matrix.
/// Column indices are strictly increasing within each row.
class SparseSymMatrix final : public LinearOperator {
 public:
  SparseSymMatrix() = default;

  std::size_t dim() const override { return n_; }
  OperatorKind kind() const override { return OperatorKind::SparseSym; }
  DenseMatrix apply(const DenseMatrix& v) const override;
  std::optional<double> max_row_abs_sum() const override;

  std::size_t nnz() const { return values_.size(); }
  std::span<const std::size_t> row_offsets() const { return row_offsets_; }
  std::span<const std::size_t> col_indices() const { return col_indices_; }
  std::span<const double> values() const { return values_; }

  /// Entry (i, j), zero when not stored.
  double at(std::size_t i, std::size_t j) const;
  std::vector<double> diagonal() const;
  DenseMatrix to_dense() const;

  friend SparseSymMatrix csr_from_coo(std::size_t n, std::span<const Triplet> triplets);

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::size_t> col_indices_;
  std::vector<double> values_;
};

/// Builds full-pattern CSR. Duplicates are summed; an off-diagonal entry
/// supplied in only one triangle is mirrored. When both (i,j) and (j,i) are
/// given their sums must agree to 1e-12 relative (AsymmetricValues).
SparseSymMatrix csr_from_coo(std::size_t n, std::span<const Triplet> triplets);

enum class PreconditionerKind { None, Jacobi, ExactInverse };

/// SPD preconditioner T applied to residual blocks.
class Preconditioner final : public LinearOperator {
 public:
  static Preconditioner none(std::size_t n);

  std::size_t dim() const override { return n_; }
  OperatorKind kind() const override;
  DenseMatrix apply(const DenseMatrix& v) const override;
  std::optional<double> max_row_abs_sum() const override;

  PreconditionerKind preconditioner_kind() const { return kind_; }
  /// Jacobi reciprocal diagonal (empty for other kinds).
  std::span<const double> data() const { return inv_diag_; }
  /// Set when some diagonal entry was not positive and the unit fallback was used.
  bool negative_diagonal_warning() const { return negative_diagonal_; }

  friend Preconditioner jacobi_precond(const SparseSymMatrix& a);
  friend Preconditioner exact_inverse_precond(const LinearOperator& a);

 private:
  std::size_t n_ = 0;
  PreconditionerKind kind_ = PreconditionerKind::None;
  std::vector<double> inv_diag_;
  DenseMatrix chol_;
  bool negative_diagonal_ = false;
};

/// T = diag(A)^{-1}, with 1 substituted wherever A_ii <= 1e-300.
Preconditioner jacobi_precond(const SparseSymMatrix& a);

/// T = A^{-1} through a dense Cholesky factor. Test-scale only: throws
/// DenseCapExceeded above kDenseCap and NotPositiveDefinite for non-SPD A.
Preconditioner exact_inverse_precond(const LinearOperator& a);

struct Edge {
  std::size_t u;
  std::size_t v;
  double weight;
};

/// Graph Laplacian L = D - W of an undirected weighted graph.
SparseSymMatrix laplacian_from_edges(std::size_t n, std::span<const Edge> edges);

/// Checked application: throws DimensionMismatch when rows differ from dim.
DenseMatrix op_apply(const LinearOperator& op, const DenseMatrix& v);

/// Cheap norm estimate: max row 1-norm when entries are explicit, otherwise
/// ||A v|| for the unit v reached after 10 power-iteration steps from a fixed
/// start.
double norm_estimate(const LinearOperator& op);

/// Applies op to the n x n identity.
DenseMatrix densify(const LinearOperator& op);

}  // namespace lobpcg
