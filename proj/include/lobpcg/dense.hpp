#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace lobpcg {

/// Largest dimension accepted by the dense kernels used as oracles and
/// exact preconditioners.
inline constexpr std::size_t kDenseCap = 2000;

/// Column-major dense matrix of doubles.
///
/// A matrix with zero columns is a valid "empty block"; the kernels below
/// reject it where a nonempty operand is required.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  /// Row-major nested initializer, e.g. {{1, 2}, {3, 4}}.
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const double> d);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

  std::span<double> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> col(std::size_t j) const { return {data_.data() + j * rows_, rows_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  DenseMatrix transposed() const;
  /// Columns [first, first + count).
  DenseMatrix columns(std::size_t first, std::size_t count) const;
  DenseMatrix select_columns(std::span<const std::size_t> idx) const;
  /// Rows [first, first + count).
  DenseMatrix row_range(std::size_t first, std::size_t count) const;

  double max_abs() const noexcept;
  bool all_finite() const noexcept;

  DenseMatrix& operator+=(const DenseMatrix& other);
  DenseMatrix& operator-=(const DenseMatrix& other);
  DenseMatrix& operator*=(double s) noexcept;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator*(double s, DenseMatrix a);

/// [A | B]; either side may be empty. Row counts must agree.
DenseMatrix hcat(const DenseMatrix& a, const DenseMatrix& b);

struct SymEigResult {
  std::vector<double> values;  // ascending
  DenseMatrix vectors;         // column k pairs with values[k]
};

enum class Trans { No, Yes };

/// op(A) * B, where op(A) is A or A^T.
DenseMatrix matmul(Trans trans_a, const DenseMatrix& a, const DenseMatrix& b);
inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  return matmul(Trans::No, a, b);
}

/// Symmetry test |m_ij - m_ji| <= 1e-12 * max(1, maxabs(M)).
bool is_symmetric(const DenseMatrix& m);

/// (M + M^T) / 2.
DenseMatrix symmetrized(const DenseMatrix& m);

/// All eigenpairs of a symmetric matrix via Householder tridiagonalization
/// followed by implicit-shift QL. Eigenvalues ascending; ties keep the order
/// the QL sweep produced. Deterministic for a fixed input.
/// Throws NonSymmetric or NoConvergence.
SymEigResult sym_eig(const DenseMatrix& m);

/// Lower Cholesky factor. Throws NotPositiveDefinite when a pivot drops to
/// n * 1e-14 * maxabs(M) or below.
DenseMatrix cholesky(const DenseMatrix& m);

/// Solves L X = B for lower-triangular L.
DenseMatrix solve_lower(const DenseMatrix& l, const DenseMatrix& b);
/// Solves L^T X = B for lower-triangular L.
DenseMatrix solve_lower_transposed(const DenseMatrix& l, const DenseMatrix& b);

/// max_ij |A_ij - B_ij|; shapes must agree.
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);

}  // namespace lobpcg
