#include "lobpcg/operators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "lobpcg/error.hpp"

namespace lobpcg {

DenseMatrix IdentityOperator::apply(const DenseMatrix& v) const { return v; }

DenseMatrix DiagonalOperator::apply(const DenseMatrix& v) const {
  DenseMatrix out = v;
  for (std::size_t j = 0; j < v.cols(); ++j) {
    auto c = out.col(j);
    for (std::size_t i = 0; i < diag_.size(); ++i) c[i] *= diag_[i];
  }
  return out;
}

std::optional<double> DiagonalOperator::max_row_abs_sum() const {
  double m = 0.0;
  for (double d : diag_) m = std::max(m, std::abs(d));
  return m;
}

DenseMatrix FunctionOperator::apply(const DenseMatrix& v) const {
  DenseMatrix out = fn_(v);
  if (out.rows() != v.rows() || out.cols() != v.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "matrix-free operator returned the wrong shape");
  }
  return out;
}

DenseMatrix SparseSymMatrix::apply(const DenseMatrix& v) const {
  DenseMatrix out(n_, v.cols());
  for (std::size_t c = 0; c < v.cols(); ++c) {
    auto x = v.col(c);
    auto y = out.col(c);
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
        s += values_[k] * x[col_indices_[k]];
      }
      y[i] = s;
    }
  }
  return out;
}

std::optional<double> SparseSymMatrix::max_row_abs_sum() const {
  double m = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) s += std::abs(values_[k]);
    m = std::max(m, s);
  }
  return m;
}

double SparseSymMatrix::at(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) throw Error(ErrorCode::IndexOutOfRange, "SparseSymMatrix::at");
  const auto first = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i]);
  const auto last = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

std::vector<double> SparseSymMatrix::diagonal() const {
  std::vector<double> d(n_);
  for (std::size_t i = 0; i < n_; ++i) d[i] = at(i, i);
  return d;
}

DenseMatrix SparseSymMatrix::to_dense() const {
  DenseMatrix m(n_, n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      m(i, col_indices_[k]) = values_[k];
  return m;
}

SparseSymMatrix csr_from_coo(std::size_t n, std::span<const Triplet> triplets) {
  std::vector<Triplet> sorted;
  sorted.reserve(triplets.size());
  for (const auto& t : triplets) {
    if (t.row >= n || t.col >= n) {
      throw Error(ErrorCode::IndexOutOfRange, "triplet (" + std::to_string(t.row) + ", " +
                                                  std::to_string(t.col) +
                                                  ") outside dimension " + std::to_string(n));
    }
    sorted.push_back(t);
  }
  auto key_less = [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  };
  std::ranges::stable_sort(sorted, key_less);

  // Sum duplicates.
  std::vector<Triplet> summed;
  for (const auto& t : sorted) {
    if (!summed.empty() && summed.back().row == t.row && summed.back().col == t.col) {
      summed.back().value += t.value;
    } else {
      summed.push_back(t);
    }
  }

  auto find = [&](std::size_t i, std::size_t j) -> const Triplet* {
    const Triplet probe{i, j, 0.0};
    auto it = std::lower_bound(summed.begin(), summed.end(), probe, key_less);
    if (it != summed.end() && it->row == i && it->col == j) return &*it;
    return nullptr;
  };

  std::vector<Triplet> full;
  full.reserve(2 * summed.size());
  for (const auto& t : summed) {
    if (t.row == t.col) {
      full.push_back(t);
      continue;
    }
    if (const Triplet* mirror = find(t.col, t.row)) {
      const double scale = std::max(std::abs(t.value), std::abs(mirror->value));
      if (std::abs(t.value - mirror->value) > 1e-12 * scale) {
        throw Error(ErrorCode::AsymmetricValues,
                    "entries (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                        ") and its transpose differ");
      }
      // Store the average in both positions so the pattern is exactly symmetric.
      full.push_back({t.row, t.col, 0.5 * (t.value + mirror->value)});
    } else {
      full.push_back(t);
      full.push_back({t.col, t.row, t.value});
    }
  }
  std::ranges::sort(full, key_less);

  SparseSymMatrix m;
  m.n_ = n;
  m.row_offsets_.assign(n + 1, 0);
  m.col_indices_.reserve(full.size());
  m.values_.reserve(full.size());
  for (const auto& t : full) {
    ++m.row_offsets_[t.row + 1];
    m.col_indices_.push_back(t.col);
    m.values_.push_back(t.value);
  }
  for (std::size_t i = 0; i < n; ++i) m.row_offsets_[i + 1] += m.row_offsets_[i];
  return m;
}

Preconditioner Preconditioner::none(std::size_t n) {
  Preconditioner p;
  p.n_ = n;
  return p;
}

OperatorKind Preconditioner::kind() const {
  switch (kind_) {
    case PreconditionerKind::None: return OperatorKind::Identity;
    case PreconditionerKind::Jacobi: return OperatorKind::Diagonal;
    case PreconditionerKind::ExactInverse: return OperatorKind::Composite;
  }
  return OperatorKind::Composite;
}

DenseMatrix Preconditioner::apply(const DenseMatrix& v) const {
  switch (kind_) {
    case PreconditionerKind::None:
      return v;
    case PreconditionerKind::Jacobi: {
      DenseMatrix out = v;
      for (std::size_t j = 0; j < v.cols(); ++j) {
        auto c = out.col(j);
        for (std::size_t i = 0; i < n_; ++i) c[i] *= inv_diag_[i];
      }
      return out;
    }
    case PreconditionerKind::ExactInverse:
      return solve_lower_transposed(chol_, solve_lower(chol_, v));
  }
  return v;
}

std::optional<double> Preconditioner::max_row_abs_sum() const {
  switch (kind_) {
    case PreconditionerKind::None: return 1.0;
    case PreconditionerKind::Jacobi: {
      double m = 0.0;
      for (double d : inv_diag_) m = std::max(m, d);
      return m;
    }
    case PreconditionerKind::ExactInverse: return std::nullopt;
  }
  return std::nullopt;
}

Preconditioner jacobi_precond(const SparseSymMatrix& a) {
  Preconditioner p;
  p.n_ = a.dim();
  p.kind_ = PreconditionerKind::Jacobi;
  p.inv_diag_ = a.diagonal();
  for (double& d : p.inv_diag_) {
    if (d > 1e-300) {
      d = 1.0 / d;
    } else {
      d = 1.0;
      p.negative_diagonal_ = true;
    }
  }
  return p;
}

Preconditioner exact_inverse_precond(const LinearOperator& a) {
  if (a.dim() > kDenseCap) {
    throw Error(ErrorCode::DenseCapExceeded, "exact inverse preconditioner above dense cap");
  }
  Preconditioner p;
  p.n_ = a.dim();
  p.kind_ = PreconditionerKind::ExactInverse;
  p.chol_ = cholesky(symmetrized(densify(a)));
  return p;
}

SparseSymMatrix laplacian_from_edges(std::size_t n, std::span<const Edge> edges) {
  std::vector<Triplet> triplets;
  triplets.reserve(4 * edges.size());
  for (const auto& e : edges) {
    if (e.u >= n || e.v >= n) {
      throw Error(ErrorCode::IndexOutOfRange, "edge endpoint outside vertex range");
    }
    if (e.u == e.v) throw Error(ErrorCode::SelfLoop, "self loop at vertex " + std::to_string(e.u));
    if (!(e.weight >= 0.0)) throw Error(ErrorCode::NegativeWeight, "edge weight must be >= 0");
    triplets.push_back({e.u, e.v, -e.weight});
    triplets.push_back({e.v, e.u, -e.weight});
    triplets.push_back({e.u, e.u, e.weight});
    triplets.push_back({e.v, e.v, e.weight});
  }
  return csr_from_coo(n, triplets);
}

DenseMatrix op_apply(const LinearOperator& op, const DenseMatrix& v) {
  if (v.rows() != op.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "operator of dimension " + std::to_string(op.dim()) +
                                                  " applied to " + std::to_string(v.rows()) +
                                                  " rows");
  }
  return op.apply(v);
}

double norm_estimate(const LinearOperator& op) {
  if (auto bound = op.max_row_abs_sum()) return *bound;

  const std::size_t n = op.dim();
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> normal;
  DenseMatrix v(n, 1);
  for (double& x : v.data()) x = normal(rng);
  v *= 1.0 / norm2(v.col(0));
  double estimate = 0.0;
  for (int step = 0; step < 10; ++step) {
    DenseMatrix w = op.apply(v);
    estimate = norm2(w.col(0));
    if (estimate == 0.0) break;
    v = (1.0 / estimate) * std::move(w);
  }
  return estimate;
}

DenseMatrix densify(const LinearOperator& op) {
  return op.apply(DenseMatrix::identity(op.dim()));
}

}  // namespace lobpcg
