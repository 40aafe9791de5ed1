#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "lobpcg/error.hpp"
#include "lobpcg/oracle.hpp"
#include "lobpcg/solver.hpp"

namespace lobpcg {
namespace {

using testing::laplacian_1d;
using testing::laplacian_1d_eigenvalue;
using testing::random_matrix;
using testing::random_sparse_spd;
using testing::SeededProblem;

EigenProblem standard(const LinearOperator& a, const LinearOperator* t = nullptr) {
  EigenProblem p;
  p.a = &a;
  p.t = t;
  return p;
}

void expect_history_monotone(const SolveResult& r) {
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    const auto& prev = r.history[i - 1].ritz_values;
    const auto& cur = r.history[i].ritz_values;
    ASSERT_EQ(prev.size(), cur.size());
    for (std::size_t k = 0; k < cur.size(); ++k) {
      EXPECT_LE(cur[k], prev[k] + 1e-10 * (1 + std::abs(prev[k])))
          << "record " << i << " value " << k;
    }
  }
}

TEST(LobpcgSolve, IdentityConvergesImmediately) {
  const IdentityOperator a(10);
  SolverConfig cfg;
  cfg.nev = 3;
  const SolveResult r = lobpcg_solve(standard(a), cfg);
  EXPECT_EQ(r.status, Status::Converged);
  EXPECT_EQ(r.iterations, 1u);
  for (double v : r.values) EXPECT_NEAR(v, 1.0, 1e-14);
}

TEST(LobpcgSolve, DiagonalWithinBudget) {
  const SparseSymMatrix a = testing::diag_1_to_n(10);
  SolverConfig cfg;
  cfg.nev = 3;
  cfg.max_iter = 60;
  const SolveResult r = lobpcg_solve(standard(a), cfg);
  ASSERT_EQ(r.status, Status::Converged);
  EXPECT_LE(r.iterations, 60u);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(r.values[k], static_cast<double>(k + 1), 1e-8);
}

TEST(LobpcgSolve, LaplacianClosedForm) {
  const SparseSymMatrix a = laplacian_1d(50);
  SolverConfig cfg;
  cfg.nev = 2;
  cfg.max_iter = 2000;
  const SolveResult r = lobpcg_solve(standard(a), cfg);
  ASSERT_EQ(r.status, Status::Converged);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_NEAR(r.values[k], laplacian_1d_eigenvalue(50, k + 1), 1e-7);
  }
}

TEST(LobpcgSolve, WarmStartTerminatesImmediately) {
  const SparseSymMatrix a = random_sparse_spd(60, 3);
  SolverConfig cfg;
  cfg.nev = 3;
  const SolveResult first = lobpcg_solve(standard(a), cfg);
  ASSERT_EQ(first.status, Status::Converged);
  const SolveResult again = lobpcg_solve(standard(a), cfg, first.vectors);
  EXPECT_EQ(again.status, Status::Converged);
  EXPECT_LE(again.iterations, 1u);
}

TEST(LobpcgSolve, WiderBlockThanNev) {
  const SparseSymMatrix a = laplacian_1d(60);
  SolverConfig cfg;
  cfg.nev = 2;
  cfg.block_size = 5;
  cfg.max_iter = 2000;
  const SolveResult r = lobpcg_solve(standard(a), cfg);
  ASSERT_EQ(r.status, Status::Converged);
  ASSERT_EQ(r.values.size(), 2u);
  EXPECT_EQ(r.vectors.cols(), 2u);
  EXPECT_NEAR(r.values[1], laplacian_1d_eigenvalue(60, 2), 1e-7);
}

TEST(LobpcgSolve, NoLockingAlsoConverges) {
  const SparseSymMatrix a = random_sparse_spd(50, 4);
  SolverConfig cfg;
  cfg.nev = 3;
  cfg.locking = Locking::None;
  const SolveResult r = lobpcg_solve(standard(a), cfg);
  ASSERT_EQ(r.status, Status::Converged);
  const SymEigResult e = dense_oracle(a, IdentityOperator(50));
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(r.values[k], e.values[k], 1e-6 * (1 + e.values[k]));
}

TEST(LobpcgSolve, ConstraintsAreDeflated) {
  const SparseSymMatrix a = testing::diag_1_to_n(20);
  EigenProblem p = standard(a);
  p.constraints = DenseMatrix(20, 1);
  p.constraints(0, 0) = 1.0;
  SolverConfig cfg;
  cfg.nev = 2;
  const SolveResult r = lobpcg_solve(p, cfg);
  ASSERT_EQ(r.status, Status::Converged);
  EXPECT_NEAR(r.values[0], 2.0, 1e-8);
  EXPECT_NEAR(r.values[1], 3.0, 1e-8);
}

TEST(LobpcgSolve, MaxIterReachedStillOrthonormal) {
  const SparseSymMatrix a = laplacian_1d(200);
  SolverConfig cfg;
  cfg.nev = 3;
  cfg.max_iter = 5;
  cfg.record_history = true;
  const SolveResult r = lobpcg_solve(standard(a), cfg);
  EXPECT_EQ(r.status, Status::MaxIterReached);
  EXPECT_EQ(r.iterations, 5u);
  EXPECT_EQ(r.history.size(), 5u);
  EXPECT_LE(b_orthonormality_error(r.vectors, IdentityOperator(200)), 1e-8);
}

TEST(LobpcgSolve, DeterministicForSeed) {
  const SparseSymMatrix a = random_sparse_spd(40, 5);
  SolverConfig cfg;
  cfg.nev = 2;
  cfg.seed = 99;
  const SolveResult r1 = lobpcg_solve(standard(a), cfg);
  const SolveResult r2 = lobpcg_solve(standard(a), cfg);
  EXPECT_EQ(r1.values, r2.values);
  EXPECT_EQ(r1.iterations, r2.iterations);
  EXPECT_EQ(r1.vectors, r2.vectors);
}

TEST(LobpcgSolve, InvalidConfig) {
  const IdentityOperator a(10);
  const auto code = [&](SolverConfig cfg, std::optional<BlockVector> x0 = std::nullopt) {
    try {
      lobpcg_solve(standard(a), cfg, x0);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;
  };
  SolverConfig cfg;
  cfg.nev = 0;
  EXPECT_EQ(code(cfg), ErrorCode::InvalidConfig);
  cfg.nev = 3;
  cfg.block_size = 2;
  EXPECT_EQ(code(cfg), ErrorCode::InvalidConfig);
  cfg.block_size = 4;
  EXPECT_EQ(code(cfg), ErrorCode::InvalidConfig);  // 3 * 4 > 10
  cfg.block_size = 0;
  cfg.tol = 0.0;
  EXPECT_EQ(code(cfg), ErrorCode::InvalidConfig);
  cfg.tol = 1e-8;
  cfg.max_iter = 0;
  EXPECT_EQ(code(cfg), ErrorCode::InvalidConfig);
  cfg.max_iter = 10;
  EXPECT_EQ(code(cfg, DenseMatrix(10, 2)), ErrorCode::DimensionMismatch);
  DenseMatrix bad(10, 3, 1.0);
  bad(0, 0) = std::nan("");
  EXPECT_EQ(code(cfg, bad), ErrorCode::InvalidConfig);
}

TEST(LobpcgSolve, DimensionMismatchBetweenOperators) {
  const IdentityOperator a(10);
  const IdentityOperator b(12);
  EigenProblem p = standard(a);
  p.b = &b;
  EXPECT_THROW(lobpcg_solve(p, SolverConfig{}), Error);
}

TEST(PsdSolve, IdentityConvergesImmediately) {
  const IdentityOperator a(12);
  SolverConfig cfg;
  cfg.nev = 2;
  const SolveResult r = psd_solve(standard(a), cfg);
  EXPECT_EQ(r.status, Status::Converged);
  EXPECT_EQ(r.iterations, 1u);
}

TEST(PsdSolve, DiagonalConvergesMoreSlowlyThanLobpcg) {
  const SparseSymMatrix a = testing::diag_1_to_n(10);
  SolverConfig cfg;
  cfg.nev = 1;
  cfg.block_size = 1;
  cfg.max_iter = 5000;
  const SolveResult psd = psd_solve(standard(a), cfg);
  const SolveResult lob = lobpcg_solve(standard(a), cfg);
  ASSERT_EQ(psd.status, Status::Converged);
  ASSERT_EQ(lob.status, Status::Converged);
  EXPECT_NEAR(psd.values[0], 1.0, 1e-8);
  EXPECT_GE(psd.iterations, lob.iterations);
}

TEST(SingleStep, LobpcgDominatesPsdFromSameState) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SparseSymMatrix a = random_sparse_spd(60, 500 + seed);
    SolverConfig cfg;
    cfg.nev = 3;
    cfg.tol = 1e-14;
    cfg.seed = seed;
    BlockIteration base(standard(a), cfg, Variant::Lobpcg);
    for (int i = 0; i < 3; ++i) {
      base.check();
      ASSERT_TRUE(base.step());
    }
    ASSERT_GT(base.previous_directions().cols(), 0u);
    BlockIteration lob = base;
    BlockIteration psd = base;
    psd.set_variant(Variant::Psd);
    lob.check();
    psd.check();
    ASSERT_TRUE(lob.step());
    ASSERT_TRUE(psd.step());
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_LE(lob.ritz_values()[k], psd.ritz_values()[k] + 1e-12) << "seed " << seed;
    }
  }
}

TEST(SingleStep, FirstIterationCoincidesWithPsd) {
  const SparseSymMatrix a = random_sparse_spd(40, 7);
  SolverConfig cfg;
  cfg.nev = 2;
  BlockIteration lob(standard(a), cfg, Variant::Lobpcg);
  BlockIteration psd(standard(a), cfg, Variant::Psd);
  lob.check();
  psd.check();
  lob.step();
  psd.step();
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_NEAR(lob.ritz_values()[k], psd.ritz_values()[k], 1e-13 * (1 + psd.ritz_values()[k]));
  }
}

class SeededSuite : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    problems_ = new std::vector<SeededProblem>(testing::seeded_problems(20, 1234, 30, 200, 5));
  }
  static void TearDownTestSuite() {
    delete problems_;
    problems_ = nullptr;
  }
  static std::vector<SeededProblem>* problems_;
};

std::vector<SeededProblem>* SeededSuite::problems_ = nullptr;

TEST_F(SeededSuite, OracleEquivalenceAndContracts) {
  for (const SeededProblem& sp : *problems_) {
    SolverConfig cfg;
    cfg.nev = sp.nev;
    cfg.seed = sp.seed;
    cfg.record_history = true;
    const SolveResult r = lobpcg_solve(sp.problem(), cfg);
    ASSERT_EQ(r.status, Status::Converged) << "seed " << sp.seed;
    ASSERT_LE(r.iterations, 500u);

    const IdentityOperator id(sp.dim());
    const LinearOperator& b = sp.metric(id);
    const SymEigResult e = dense_oracle(sp.a, b);
    for (std::size_t k = 0; k < sp.nev; ++k) {
      EXPECT_LE(std::abs(r.values[k] - e.values[k]), 1e-6 * (1 + std::abs(e.values[k])))
          << "seed " << sp.seed << " k " << k;
    }
    EXPECT_TRUE(std::is_sorted(r.values.begin(), r.values.end()));
    EXPECT_LE(b_orthonormality_error(r.vectors, b), 1e-8);

    // Criterion soundness with residuals recomputed here from scratch.
    const double norm_a = norm_estimate(sp.a);
    const double norm_b = norm_estimate(b);
    const BlockVector fresh = residual_block(sp.a, b, r.vectors, r.values);
    for (std::size_t k = 0; k < sp.nev; ++k) {
      EXPECT_TRUE(meets_criterion(norm2(fresh.col(k)), r.values[k], norm2(r.vectors.col(k)),
                                  cfg.tol, norm_a, norm_b));
    }

    ASSERT_EQ(r.history.size(), r.iterations);
    for (std::size_t i = 0; i < r.history.size(); ++i) {
      const IterationRecord& rec = r.history[i];
      EXPECT_EQ(rec.iter, i + 1);
      EXPECT_TRUE(std::is_sorted(rec.ritz_values.begin(), rec.ritz_values.end()));
      for (double rn : rec.residual_norms) EXPECT_GE(rn, 0.0);
      if (i > 0) EXPECT_GE(rec.locked_count, r.history[i - 1].locked_count);
    }
    expect_history_monotone(r);
  }
}

TEST_F(SeededSuite, WarmStartFromConvergedVectors) {
  for (const SeededProblem& sp : *problems_) {
    SolverConfig cfg;
    cfg.nev = sp.nev;
    cfg.seed = sp.seed;
    const SolveResult r = lobpcg_solve(sp.problem(), cfg);
    ASSERT_EQ(r.status, Status::Converged);
    const SolveResult warm = lobpcg_solve(sp.problem(), cfg, r.vectors);
    EXPECT_EQ(warm.status, Status::Converged) << "seed " << sp.seed;
    EXPECT_LE(warm.iterations, 1u) << "seed " << sp.seed;
  }
}

TEST(OperationCounts, TallyColumns) {
  const IdentityOperator a(10);
  SolverConfig cfg;
  cfg.nev = 3;
  const SolveResult r = lobpcg_solve(standard(a), cfg);
  // Initial Rayleigh-Ritz plus fresh verification plus the final residual.
  EXPECT_GE(r.counts.matvec, 9u);
  EXPECT_EQ(r.counts.precond, 0u);
  EXPECT_EQ(r.counts.rayleigh_ritz, 1u);
}

TEST(OperationCounts, PreconditionerCountedPerColumn) {
  const SparseSymMatrix a = laplacian_1d(40);
  const Preconditioner t = jacobi_precond(a);
  SolverConfig cfg;
  cfg.nev = 1;
  cfg.max_iter = 3;
  const SolveResult r = lobpcg_solve(standard(a, &t), cfg);
  EXPECT_EQ(r.status, Status::MaxIterReached);
  EXPECT_EQ(r.counts.precond, 2u);
  EXPECT_EQ(r.counts.rayleigh_ritz, 3u);
}

TEST(Criterion, Formula) {
  EXPECT_TRUE(meets_criterion(1e-9, 1.0, 1.0, 1e-8, 1.0, 1.0));
  EXPECT_FALSE(meets_criterion(3e-8, 1.0, 1.0, 1e-8, 1.0, 1.0));
  EXPECT_TRUE(meets_criterion(3e-8, -1.0, 1.0, 1e-8, 1.0, 2.0));
}

}  // namespace
}  // namespace lobpcg
