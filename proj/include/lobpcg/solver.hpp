#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "lobpcg/dense.hpp"
#include "lobpcg/operators.hpp"
#include "lobpcg/rayleigh_ritz.hpp"

namespace lobpcg {

enum class Locking { Soft, None };
enum class Status { Converged, MaxIterReached, Breakdown };
enum class Variant { Lobpcg, Psd, Lobpcg2 };

std::string_view to_string(Locking locking);
std::string_view to_string(Status status);
std::string_view to_string(Variant variant);

struct SolverConfig {
  std::size_t nev = 1;
  std::size_t block_size = 0;  // 0 means nev
  double tol = 1e-8;
  std::size_t max_iter = 500;
  std::uint64_t seed = 0;
  Locking locking = Locking::Soft;
  double restart_cond_limit = 1e12;
  bool record_history = false;

  std::size_t effective_block_size() const { return block_size == 0 ? nev : block_size; }
};

struct IterationRecord {
  std::size_t iter = 0;
  std::vector<double> ritz_values;
  std::vector<double> residual_norms;
  std::size_t locked_count = 0;
  std::size_t basis_cols = 0;
  // False for LOBPCG II iterations whose values come from per-sub-solver
  // projections rather than a Rayleigh-Ritz over the whole block.
  bool shared_rr = true;
};

struct OperationCounts {
  std::size_t matvec = 0;          // columns passed through A
  std::size_t precond = 0;         // columns passed through T
  std::size_t rayleigh_ritz = 0;
  std::size_t orthonormalize = 0;  // b_orthonormalize calls, including those inside Rayleigh-Ritz
};

struct SolveResult {
  std::vector<double> values;          // nev smallest, ascending
  BlockVector vectors;                 // B-orthonormal
  Status status = Status::MaxIterReached;
  std::size_t iterations = 0;          // residual evaluations performed
  std::vector<double> residual_norms;  // recomputed from fresh A and B applications
  std::vector<IterationRecord> history;
  OperationCounts counts;
};

/// Operators are borrowed and must outlive any solve using them. A null B
/// is the identity metric, a null T is no preconditioning.
struct EigenProblem {
  const LinearOperator* a = nullptr;
  const LinearOperator* b = nullptr;
  const LinearOperator* t = nullptr;
  /// Known eigenvectors excluded from the search (zero columns for none).
  BlockVector constraints;
};

/// Residual test ||r|| <= tol * (||A||_est + |theta| ||B||_est) * ||x||.
bool meets_criterion(double residual_norm, double theta, double x_norm, double tol, double norm_a,
                     double norm_b);

/// One blocked preconditioned eigensolver run, stepped explicitly.
///
/// check() evaluates residuals at the current iterate, step() performs one
/// Rayleigh-Ritz update over [X | W | P] (or [X | W] for Variant::Psd).
/// The object is copyable, so a state can be forked and advanced with two
/// variants.
class BlockIteration {
 public:
  BlockIteration(const EigenProblem& problem, const SolverConfig& cfg, Variant variant,
                 const std::optional<BlockVector>& x0 = std::nullopt);

  void set_variant(Variant variant);
  Variant variant() const { return variant_; }

  /// Evaluates residuals and convergence flags, appends a history record and
  /// returns true when the nev leading pairs meet the criterion.
  bool check();
  /// Recomputes A X and B X from scratch and re-tests the nev leading pairs.
  bool verify_fresh();
  /// Returns false on breakdown (no search direction left while pairs remain
  /// unconverged). Must follow check().
  bool step();

  SolveResult finish(Status status);

  const std::vector<double>& ritz_values() const { return theta_; }
  const BlockVector& block() const { return x_; }
  const BlockVector& previous_directions() const { return p_; }
  std::size_t iterations() const { return iterations_; }
  const OperationCounts& counts() const { return counts_; }

 private:
  void residuals_and_flags(bool update_locks);
  const LinearOperator& metric() const;

  const LinearOperator* a_;
  const LinearOperator* b_;
  const LinearOperator* t_;
  std::shared_ptr<const IdentityOperator> identity_;
  SolverConfig cfg_;
  Variant variant_;
  std::size_t block_size_;

  BlockVector y_, by_;
  BlockVector x_, ax_, bx_, p_, r_;
  std::vector<double> theta_;
  std::vector<double> res_norms_;
  std::vector<bool> converged_;
  std::vector<bool> locked_;
  double norm_a_ = 1.0;
  double norm_b_ = 1.0;
  std::size_t iterations_ = 0;
  std::size_t basis_cols_ = 0;
  std::vector<IterationRecord> history_;
  OperationCounts counts_;
};

/// Blocked LOBPCG with soft locking.
SolveResult lobpcg_solve(const EigenProblem& problem, const SolverConfig& cfg,
                         const std::optional<BlockVector>& x0 = std::nullopt);

/// Preconditioned steepest descent: the same iteration without P.
SolveResult psd_solve(const EigenProblem& problem, const SolverConfig& cfg,
                      const std::optional<BlockVector>& x0 = std::nullopt);

}  // namespace lobpcg
