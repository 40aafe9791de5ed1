#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "lobpcg/error.hpp"
#include "lobpcg/oracle.hpp"
#include "lobpcg/rayleigh_ritz.hpp"

namespace lobpcg {
namespace {

TEST(DenseOracle, DiagonalStandard) {
  const SymEigResult e = dense_oracle(testing::diagonal_matrix({5, 1}), IdentityOperator(2));
  EXPECT_EQ(e.values, (std::vector<double>{1, 5}));
}

TEST(DenseOracle, DiagonalPencil) {
  const SymEigResult e =
      dense_oracle(testing::diagonal_matrix({2, 2}), testing::diagonal_matrix({1, 2}));
  EXPECT_NEAR(e.values[0], 1.0, 1e-15);
  EXPECT_NEAR(e.values[1], 2.0, 1e-15);
}

TEST(DenseOracle, GeneralizedResidualsAndOrthonormality) {
  const std::size_t n = 40;
  const SparseSymMatrix a = testing::random_sparse_spd(n, 1);
  const SparseSymMatrix b = testing::sparse_from_dense(testing::random_spd_dense(n, 2));
  const SymEigResult e = dense_oracle(a, b);
  const double norm_a = norm_estimate(a);
  const BlockVector r = residual_block(a, b, e.vectors, e.values);
  for (std::size_t k = 0; k < n; ++k) EXPECT_LE(norm2(r.col(k)), 1e-8 * norm_a);
  EXPECT_LE(b_orthonormality_error(e.vectors, b), 1e-9 * n);
  EXPECT_TRUE(std::is_sorted(e.values.begin(), e.values.end()));
}

TEST(DenseOracle, AgreesWithSymEigForIdentityMetric) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const DenseMatrix m = testing::random_symmetric(25, seed);
    const SymEigResult direct = sym_eig(m);
    const SymEigResult e = dense_oracle(testing::sparse_from_dense(m), IdentityOperator(25));
    for (std::size_t k = 0; k < 25; ++k) {
      EXPECT_NEAR(e.values[k], direct.values[k], 1e-11 * (1 + std::abs(direct.values[k])));
    }
  }
}

TEST(DenseOracle, MatrixFreeOperators) {
  const SparseSymMatrix a = testing::random_sparse_spd(20, 3);
  const FunctionOperator f(20, [&](const DenseMatrix& v) { return a.apply(v); });
  const SymEigResult ref = dense_oracle(a, IdentityOperator(20));
  const SymEigResult e = dense_oracle(f, IdentityOperator(20));
  for (std::size_t k = 0; k < 20; ++k) EXPECT_NEAR(e.values[k], ref.values[k], 1e-12 * ref.values.back());
}

TEST(DenseOracle, Errors) {
  try {
    dense_oracle(IdentityOperator(kDenseCap + 1), IdentityOperator(kDenseCap + 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DenseCapExceeded);
  }
  try {
    dense_oracle(IdentityOperator(2), testing::diagonal_matrix({1, -1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPositiveDefinite);
  }
}

}  // namespace
}  // namespace lobpcg
