#pragma once

// Problem generators shared by the unit and acceptance suites.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "lobpcg/dense.hpp"
#include "lobpcg/operators.hpp"
#include "lobpcg/solver.hpp"

namespace lobpcg::testing {

inline DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  DenseMatrix m(rows, cols);
  for (double& x : m.data()) x = normal(rng);
  return m;
}

inline DenseMatrix random_symmetric(std::size_t n, std::uint64_t seed) {
  return symmetrized(random_matrix(n, n, seed));
}

/// G^T G + n I.
inline DenseMatrix random_spd_dense(std::size_t n, std::uint64_t seed) {
  const DenseMatrix g = random_matrix(n, n, seed);
  DenseMatrix m = symmetrized(matmul(Trans::Yes, g, g));
  for (std::size_t i = 0; i < n; ++i) m(i, i) += static_cast<double>(n);
  return m;
}

inline SparseSymMatrix sparse_from_dense(const DenseMatrix& m) {
  std::vector<Triplet> t;
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = j; i < m.rows(); ++i)
      if (m(i, j) != 0.0) t.push_back({i, j, m(i, j)});
  return csr_from_coo(m.rows(), t);
}

/// Sparse diagonally dominant SPD matrix: about `per_row` random
/// off-diagonal entries per row and a diagonal shift spread over [0.1, 10].
inline SparseSymMatrix random_sparse_spd(std::size_t n, std::uint64_t seed,
                                         std::size_t per_row = 4) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_real_distribution<double> shift(0.1, 10.0);
  std::vector<Triplet> t;
  std::vector<double> row_abs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < per_row / 2 + 1; ++k) {
      const std::size_t j = pick(rng);
      if (j == i) continue;
      const double v = normal(rng);
      t.push_back({i, j, v});
      t.push_back({j, i, v});
      row_abs[i] += std::abs(v);
      row_abs[j] += std::abs(v);
    }
  }
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, row_abs[i] + shift(rng)});
  return csr_from_coo(n, t);
}

inline SparseSymMatrix diagonal_matrix(const std::vector<double>& d) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < d.size(); ++i) t.push_back({i, i, d[i]});
  return csr_from_coo(d.size(), t);
}

/// diag(1, 2, ..., n).
inline SparseSymMatrix diag_1_to_n(std::size_t n) {
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = static_cast<double>(i + 1);
  return diagonal_matrix(d);
}

/// Dirichlet 1D Laplacian tridiag(-1, 2, -1).
inline SparseSymMatrix laplacian_1d(std::size_t n) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    t.push_back({i, i, 2.0});
    if (i + 1 < n) t.push_back({i + 1, i, -1.0});
  }
  return csr_from_coo(n, t);
}

/// Closed-form k-th (1-based) eigenvalue of laplacian_1d(n).
inline double laplacian_1d_eigenvalue(std::size_t n, std::size_t k) {
  const double s = std::sin(static_cast<double>(k) * std::numbers::pi / (2.0 * static_cast<double>(n + 1)));
  return 4.0 * s * s;
}

/// A seeded generalized problem with optional metric and Jacobi
/// preconditioner. problem() borrows the members, so keep the object alive
/// (and in place) while the returned EigenProblem is in use.
struct SeededProblem {
  std::uint64_t seed = 0;
  std::size_t nev = 1;
  SparseSymMatrix a;
  std::optional<SparseSymMatrix> b;
  std::optional<Preconditioner> t;

  std::size_t dim() const { return a.dim(); }
  EigenProblem problem() const {
    EigenProblem p;
    p.a = &a;
    p.b = b ? &*b : nullptr;
    p.t = t ? &*t : nullptr;
    return p;
  }
  const LinearOperator& metric(const IdentityOperator& id) const {
    return b ? static_cast<const LinearOperator&>(*b) : id;
  }
};

/// Sizes in [n_lo, n_hi], nev in [1, nev_hi]; every other problem gets a
/// random SPD metric and every fourth pair of problems a Jacobi preconditioner.
inline std::vector<SeededProblem> seeded_problems(std::size_t count, std::uint64_t base,
                                                  std::size_t n_lo, std::size_t n_hi,
                                                  std::size_t nev_hi) {
  std::vector<SeededProblem> out;
  out.reserve(count);
  std::mt19937_64 rng(base);
  std::uniform_int_distribution<std::size_t> size(n_lo, n_hi);
  std::uniform_int_distribution<std::size_t> nev(1, nev_hi);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t seed = base + 17 * i;
    const std::size_t n = size(rng);
    SeededProblem p{seed, nev(rng), random_sparse_spd(n, seed), std::nullopt, std::nullopt};
    if (i % 2 == 1) p.b = random_sparse_spd(n, seed + 1);
    if ((i / 2) % 2 == 1) p.t = jacobi_precond(p.a);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace lobpcg::testing
