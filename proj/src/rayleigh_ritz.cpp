#include "lobpcg/rayleigh_ritz.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lobpcg/error.hpp"

namespace lobpcg {

namespace {

DenseMatrix as_column(std::span<const double> x) {
  DenseMatrix v(x.size(), 1);
  std::ranges::copy(x, v.col(0).begin());
  return v;
}

DenseMatrix upper_inverse_from_cholesky(const DenseMatrix& l) {
  // L^{-T}, so that V L^{-T} has identity Gram when G = L L^T.
  return solve_lower_transposed(l, DenseMatrix::identity(l.rows()));
}

double gram_identity_error(const BlockVector& v, const BlockVector& bv) {
  DenseMatrix g = matmul(Trans::Yes, v, bv);
  double err = 0.0;
  for (std::size_t j = 0; j < g.cols(); ++j)
    for (std::size_t i = 0; i < g.rows(); ++i)
      err = std::max(err, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return err;
}

// Greedy left-to-right column selection: column j is kept when its Schur
// complement pivot against the columns already kept exceeds tau. Returns the
// kept indices and the Cholesky factor of G restricted to them.
std::pair<std::vector<std::size_t>, DenseMatrix> greedy_independent_columns(const DenseMatrix& g,
                                                                            double tau) {
  const std::size_t m = g.rows();
  std::vector<std::size_t> kept;
  DenseMatrix l(m, m);  // leading kept.size() block is used
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t r = kept.size();
    std::vector<double> row(r);
    double pivot = g(j, j);
    for (std::size_t a = 0; a < r; ++a) {
      double s = g(kept[a], j);
      for (std::size_t c = 0; c < a; ++c) s -= l(a, c) * row[c];
      row[a] = s / l(a, a);
      pivot -= row[a] * row[a];
    }
    if (pivot > tau) {
      for (std::size_t c = 0; c < r; ++c) l(r, c) = row[c];
      l(r, r) = std::sqrt(pivot);
      kept.push_back(j);
    }
  }
  const std::size_t r = kept.size();
  DenseMatrix lk(r, r);
  for (std::size_t j = 0; j < r; ++j)
    for (std::size_t i = j; i < r; ++i) lk(i, j) = l(i, j);
  return {std::move(kept), std::move(lk)};
}

OrthoResult single_pass(const BlockVector& v, const BlockVector& bv) {
  const std::size_t m = v.cols();
  if (m == 0) throw Error(ErrorCode::ZeroRank, "b_orthonormalize on an empty block");

  const DenseMatrix g = symmetrized(matmul(Trans::Yes, v, bv));
  const SymEigResult spectrum = sym_eig(g);

  OrthoResult out;
  out.gram_min = spectrum.values.front();
  out.gram_max = spectrum.values.back();
  if (!(out.gram_max > 0.0)) throw Error(ErrorCode::ZeroRank, "Gram matrix is zero");

  const double tau = static_cast<double>(m) * 1e-12 * out.gram_max;
  if (out.gram_min > tau) {
    try {
      const DenseMatrix t = upper_inverse_from_cholesky(cholesky(g));
      out.basis = matmul(v, t);
      out.b_basis = matmul(bv, t);
      out.transform = t;
      out.kept.resize(m);
      for (std::size_t j = 0; j < m; ++j) out.kept[j] = j;
      return out;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotPositiveDefinite) throw;
    }
  }

  auto [kept, lk] = greedy_independent_columns(g, tau);
  if (kept.empty()) throw Error(ErrorCode::ZeroRank, "all columns numerically dependent");
  const DenseMatrix tk = upper_inverse_from_cholesky(lk);
  out.basis = matmul(v.select_columns(kept), tk);
  out.b_basis = matmul(bv.select_columns(kept), tk);
  out.transform = DenseMatrix(m, kept.size());
  for (std::size_t c = 0; c < kept.size(); ++c)
    for (std::size_t a = 0; a < kept.size(); ++a) out.transform(kept[a], c) = tk(a, c);
  out.kept = std::move(kept);
  return out;
}

}  // namespace

double rayleigh_quotient(std::span<const double> x, const LinearOperator& a,
                         const LinearOperator& b) {
  const DenseMatrix v = as_column(x);
  const double xbx = dot(x, op_apply(b, v).col(0));
  if (!(xbx > 1e-300)) throw Error(ErrorCode::ZeroVector, "(x, Bx) vanishes");
  return dot(x, op_apply(a, v).col(0)) / xbx;
}

BlockVector residual_from_images(const BlockVector& ax, const BlockVector& bx,
                                 std::span<const double> theta) {
  if (theta.size() != ax.cols() || ax.rows() != bx.rows() || ax.cols() != bx.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "residual block shapes disagree");
  }
  BlockVector r = ax;
  for (std::size_t k = 0; k < r.cols(); ++k) {
    auto rk = r.col(k);
    auto bk = bx.col(k);
    for (std::size_t i = 0; i < r.rows(); ++i) rk[i] -= theta[k] * bk[i];
  }
  return r;
}

BlockVector residual_block(const LinearOperator& a, const LinearOperator& b, const BlockVector& x,
                           std::span<const double> theta) {
  if (theta.size() != x.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "theta length differs from block width");
  }
  return residual_from_images(op_apply(a, x), op_apply(b, x), theta);
}

OrthoResult b_orthonormalize(const BlockVector& v, const LinearOperator& b) {
  return b_orthonormalize(v, op_apply(b, v), b);
}

OrthoResult b_orthonormalize(const BlockVector& v, const BlockVector& bv,
                             const LinearOperator& /*b*/) {
  OrthoResult first = single_pass(v, bv);
  if (gram_identity_error(first.basis, first.b_basis) <= 1e-12) return first;

  OrthoResult second = single_pass(first.basis, first.b_basis);
  if (gram_identity_error(second.basis, second.b_basis) > 1e-8) {
    throw Error(ErrorCode::LossOfOrthogonality, "B-orthonormalization failed after two passes");
  }
  std::vector<std::size_t> kept;
  kept.reserve(second.kept.size());
  for (std::size_t k : second.kept) kept.push_back(first.kept[k]);
  second.transform = matmul(first.transform, second.transform);
  second.kept = std::move(kept);
  second.gram_min = first.gram_min;
  second.gram_max = first.gram_max;
  return second;
}

RitzSet rayleigh_ritz(const BlockVector& s, const LinearOperator& a, const LinearOperator& b,
                      std::size_t want) {
  if (want == 0 || want > s.cols()) {
    throw Error(ErrorCode::InvalidConfig, "rayleigh_ritz wants " + std::to_string(want) +
                                              " pairs from " + std::to_string(s.cols()) +
                                              " columns");
  }
  const OrthoResult q = b_orthonormalize(s, op_apply(b, s), b);
  const std::size_t rank = q.basis.cols();
  if (rank < want) {
    throw Error(ErrorCode::InsufficientRank,
                "basis rank " + std::to_string(rank) + " below " + std::to_string(want));
  }
  const BlockVector aq = op_apply(a, q.basis);
  const SymEigResult eig = sym_eig(symmetrized(matmul(Trans::Yes, q.basis, aq)));

  DenseMatrix c = eig.vectors.columns(0, want);
  RitzSet out;
  out.values.assign(eig.values.begin(), eig.values.begin() + static_cast<std::ptrdiff_t>(want));
  out.vectors = matmul(q.basis, c);

  for (std::size_t k = 0; k < want; ++k) {
    auto vk = out.vectors.col(k);
    double peak = 0.0;
    for (double x : vk) peak = std::max(peak, std::abs(x));
    const auto lead = std::ranges::find_if(vk, [&](double x) { return std::abs(x) > 1e-10 * peak; });
    if (lead != vk.end() && *lead < 0.0) {
      for (double& x : vk) x = -x;
      for (double& x : c.col(k)) x = -x;
    }
  }
  out.coefficients = matmul(q.transform, c);
  out.a_vectors = matmul(aq, c);
  out.b_vectors = matmul(q.b_basis, c);
  out.basis_rank = rank;
  return out;
}

void project_out(BlockVector& w, const BlockVector& q, const BlockVector& bq) {
  if (q.cols() == 0 || w.cols() == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    w -= matmul(q, matmul(Trans::Yes, bq, w));
  }
}

double b_orthonormality_error(const BlockVector& v, const LinearOperator& b) {
  return gram_identity_error(v, op_apply(b, v));
}

}  // namespace lobpcg
