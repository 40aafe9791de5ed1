#include "lobpcg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lobpcg/error.hpp"
#include "solver_detail.hpp"

namespace lobpcg {

std::string_view to_string(Locking locking) {
  return locking == Locking::Soft ? "soft" : "none";
}

std::string_view to_string(Status status) {
  switch (status) {
    case Status::Converged: return "Converged";
    case Status::MaxIterReached: return "MaxIterReached";
    case Status::Breakdown: return "Breakdown";
  }
  return "Unknown";
}

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::Lobpcg: return "lobpcg";
    case Variant::Psd: return "psd";
    case Variant::Lobpcg2: return "lobpcg2";
  }
  return "unknown";
}

bool meets_criterion(double residual_norm, double theta, double x_norm, double tol, double norm_a,
                     double norm_b) {
  return residual_norm <= tol * (norm_a + std::abs(theta) * norm_b) * x_norm;
}

BlockIteration::BlockIteration(const EigenProblem& problem, const SolverConfig& cfg,
                               Variant variant, const std::optional<BlockVector>& x0)
    : a_(problem.a), b_(problem.b), t_(problem.t), cfg_(cfg), variant_(variant) {
  if (a_ == nullptr) throw Error(ErrorCode::InvalidConfig, "problem has no operator A");
  if (variant == Variant::Lobpcg2) {
    throw Error(ErrorCode::InvalidConfig, "BlockIteration runs lobpcg or psd only");
  }
  const std::size_t n = a_->dim();
  if (b_ == nullptr) {
    identity_ = std::make_shared<IdentityOperator>(n);
    b_ = identity_.get();
  }
  if (b_->dim() != n || (t_ != nullptr && t_->dim() != n)) {
    throw Error(ErrorCode::DimensionMismatch, "A, B and T dimensions disagree");
  }
  block_size_ = cfg.effective_block_size();
  if (cfg.nev == 0 || block_size_ < cfg.nev || 3 * block_size_ > n) {
    throw Error(ErrorCode::InvalidConfig,
                "need 1 <= nev <= block_size and 3 * block_size <= n (nev=" +
                    std::to_string(cfg.nev) + ", block_size=" + std::to_string(block_size_) +
                    ", n=" + std::to_string(n) + ")");
  }
  if (!(cfg.tol > 0.0) || cfg.max_iter == 0 || !(cfg.restart_cond_limit > 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "tol and restart_cond_limit must be positive, max_iter >= 1");
  }

  if (problem.constraints.cols() > 0) {
    if (problem.constraints.rows() != n) {
      throw Error(ErrorCode::DimensionMismatch, "constraint block has the wrong row count");
    }
    OrthoResult y = b_orthonormalize(problem.constraints, metric());
    ++counts_.orthonormalize;
    y_ = std::move(y.basis);
    by_ = std::move(y.b_basis);
  }

  BlockVector start;
  if (x0) {
    if (x0->rows() != n || x0->cols() != block_size_) {
      throw Error(ErrorCode::DimensionMismatch, "initial block must be n x block_size");
    }
    if (!x0->all_finite()) throw Error(ErrorCode::InvalidConfig, "initial block is not finite");
    start = *x0;
  } else {
    start = detail::random_block(n, block_size_, cfg.seed);
  }
  project_out(start, y_, by_);

  detail::CountingOperator a_count(*a_, counts_.matvec);
  norm_a_ = norm_estimate(a_count);
  norm_b_ = norm_estimate(metric());

  RitzSet rr = rayleigh_ritz(start, a_count, metric(), block_size_);
  ++counts_.rayleigh_ritz;
  ++counts_.orthonormalize;
  x_ = std::move(rr.vectors);
  ax_ = std::move(rr.a_vectors);
  bx_ = std::move(rr.b_vectors);
  theta_ = std::move(rr.values);
  basis_cols_ = start.cols();
  converged_.assign(block_size_, false);
  locked_.assign(block_size_, false);
}

const LinearOperator& BlockIteration::metric() const { return *b_; }

void BlockIteration::set_variant(Variant variant) {
  if (variant == Variant::Lobpcg2) {
    throw Error(ErrorCode::InvalidConfig, "BlockIteration runs lobpcg or psd only");
  }
  variant_ = variant;
}

void BlockIteration::residuals_and_flags(bool update_locks) {
  r_ = residual_from_images(ax_, bx_, theta_);
  res_norms_.resize(block_size_);
  for (std::size_t k = 0; k < block_size_; ++k) {
    res_norms_[k] = norm2(r_.col(k));
    converged_[k] = meets_criterion(res_norms_[k], theta_[k], norm2(x_.col(k)), cfg_.tol, norm_a_,
                                    norm_b_);
    if (update_locks && cfg_.locking == Locking::Soft && converged_[k]) locked_[k] = true;
  }
}

bool BlockIteration::check() {
  residuals_and_flags(true);
  ++iterations_;
  if (cfg_.record_history) {
    IterationRecord rec;
    rec.iter = iterations_;
    rec.ritz_values = theta_;
    rec.residual_norms = res_norms_;
    rec.locked_count = static_cast<std::size_t>(std::ranges::count(locked_, true));
    rec.basis_cols = basis_cols_;
    history_.push_back(std::move(rec));
  }
  return std::all_of(converged_.begin(), converged_.begin() + static_cast<std::ptrdiff_t>(cfg_.nev),
                     [](bool c) { return c; });
}

bool BlockIteration::verify_fresh() {
  detail::CountingOperator a_count(*a_, counts_.matvec);
  ax_ = op_apply(a_count, x_);
  bx_ = op_apply(metric(), x_);
  residuals_and_flags(false);
  return std::all_of(converged_.begin(), converged_.begin() + static_cast<std::ptrdiff_t>(cfg_.nev),
                     [](bool c) { return c; });
}

bool BlockIteration::step() {
  const LinearOperator& b = metric();
  detail::CountingOperator a_count(*a_, counts_.matvec);

  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < block_size_; ++k) {
    if (cfg_.locking == Locking::None || !locked_[k] || !converged_[k]) active.push_back(k);
  }
  if (active.empty()) return true;

  BlockVector w = r_.select_columns(active);
  if (t_ != nullptr) {
    detail::CountingOperator t_count(*t_, counts_.precond);
    w = op_apply(t_count, w);
  }
  project_out(w, y_, by_);
  project_out(w, x_, bx_);

  OrthoResult ow;
  try {
    ow = b_orthonormalize(w, b);
    ++counts_.orthonormalize;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ZeroRank) throw;
    return false;
  }

  BlockVector p;
  BlockVector bp;
  if (variant_ == Variant::Lobpcg && p_.cols() > 0) {
    BlockVector candidate = p_;
    project_out(candidate, y_, by_);
    project_out(candidate, x_, bx_);
    project_out(candidate, ow.basis, ow.b_basis);
    try {
      OrthoResult op = b_orthonormalize(candidate, b);
      ++counts_.orthonormalize;
      // p_ enters B-orthonormal, so 1 / gram_min estimates the condition of [X W P].
      const bool rank_loss = op.kept.size() < candidate.cols();
      const bool ill_conditioned = op.gram_min * cfg_.restart_cond_limit < 1.0;
      if (!rank_loss && !ill_conditioned) {
        p = std::move(op.basis);
        bp = std::move(op.b_basis);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ZeroRank) throw;
    }
  }

  const BlockVector directions = hcat(ow.basis, p);
  const BlockVector s = hcat(x_, directions);
  RitzSet rr = rayleigh_ritz(s, a_count, b, block_size_);
  ++counts_.rayleigh_ritz;
  ++counts_.orthonormalize;

  if (variant_ == Variant::Lobpcg) {
    // Implicit 3-term recurrence: keep only the W and P part of the update.
    const DenseMatrix c_dirs =
        rr.coefficients.row_range(block_size_, directions.cols()).select_columns(active);
    BlockVector next_p = matmul(directions, c_dirs);
    try {
      p_ = b_orthonormalize(next_p, b).basis;
      ++counts_.orthonormalize;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ZeroRank) throw;
      p_ = BlockVector();
    }
  } else {
    p_ = BlockVector();
  }

  x_ = std::move(rr.vectors);
  ax_ = std::move(rr.a_vectors);
  bx_ = std::move(rr.b_vectors);
  theta_ = std::move(rr.values);
  basis_cols_ = s.cols();
  return true;
}

SolveResult BlockIteration::finish(Status status) {
  SolveResult out;
  out.status = status;
  out.iterations = iterations_;
  out.values.assign(theta_.begin(), theta_.begin() + static_cast<std::ptrdiff_t>(cfg_.nev));
  out.vectors = x_.columns(0, cfg_.nev);

  detail::CountingOperator a_count(*a_, counts_.matvec);
  const BlockVector r = residual_block(a_count, metric(), out.vectors, out.values);
  out.residual_norms.resize(cfg_.nev);
  for (std::size_t k = 0; k < cfg_.nev; ++k) out.residual_norms[k] = norm2(r.col(k));
  out.history = history_;
  out.counts = counts_;
  return out;
}

namespace {

SolveResult run(BlockIteration& it, std::size_t max_iter) {
  for (;;) {
    if (it.check() && it.verify_fresh()) return it.finish(Status::Converged);
    if (it.iterations() >= max_iter) return it.finish(Status::MaxIterReached);
    if (!it.step()) return it.finish(Status::Breakdown);
  }
}

}  // namespace

SolveResult lobpcg_solve(const EigenProblem& problem, const SolverConfig& cfg,
                         const std::optional<BlockVector>& x0) {
  BlockIteration it(problem, cfg, Variant::Lobpcg, x0);
  return run(it, cfg.max_iter);
}

SolveResult psd_solve(const EigenProblem& problem, const SolverConfig& cfg,
                      const std::optional<BlockVector>& x0) {
  BlockIteration it(problem, cfg, Variant::Psd, x0);
  return run(it, cfg.max_iter);
}

}  // namespace lobpcg
