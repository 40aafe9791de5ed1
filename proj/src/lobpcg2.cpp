#include "lobpcg/lobpcg2.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "lobpcg/error.hpp"
#include "solver_detail.hpp"

namespace lobpcg {

namespace {

struct SubSolver {
  BlockVector x, ax, bx, p, r;
  std::vector<double> theta;
};

class Lobpcg2Run {
 public:
  Lobpcg2Run(const EigenProblem& problem, const Lobpcg2Config& cfg);
  SolveResult solve();

 private:
  bool evaluate(bool record);
  bool verify_fresh();
  bool step();
  void shared_rayleigh_ritz();
  BlockVector aggregate(BlockVector SubSolver::*field) const;
  SolveResult finish(Status status);
  bool leading_converged() const;
  std::size_t global(std::size_t sub, std::size_t col) const { return sub * width_ + col; }

  const LinearOperator* a_;
  const LinearOperator* b_;
  const LinearOperator* t_;
  std::shared_ptr<const IdentityOperator> identity_;
  Lobpcg2Config cfg_;
  std::size_t n_ = 0;
  std::size_t width_ = 1;
  std::size_t total_ = 1;

  BlockVector y_, by_;
  std::vector<SubSolver> subs_;
  std::vector<double> res_norms_;
  std::vector<bool> converged_;
  std::vector<bool> locked_;
  double norm_a_ = 1.0;
  double norm_b_ = 1.0;
  std::size_t iterations_ = 0;
  std::size_t steps_since_rr_ = 0;
  std::size_t local_basis_cols_ = 0;
  bool at_shared_ = false;
  std::vector<IterationRecord> history_;
  OperationCounts counts_;
};

Lobpcg2Run::Lobpcg2Run(const EigenProblem& problem, const Lobpcg2Config& cfg)
    : a_(problem.a), b_(problem.b), t_(problem.t), cfg_(cfg) {
  if (a_ == nullptr) throw Error(ErrorCode::InvalidConfig, "problem has no operator A");
  n_ = a_->dim();
  if (b_ == nullptr) {
    identity_ = std::make_shared<IdentityOperator>(n_);
    b_ = identity_.get();
  }
  if (b_->dim() != n_ || (t_ != nullptr && t_->dim() != n_)) {
    throw Error(ErrorCode::DimensionMismatch, "A, B and T dimensions disagree");
  }
  if (cfg.nev == 0 || cfg.sub_block == 0 || cfg.rr_period == 0) {
    throw Error(ErrorCode::InvalidConfig, "nev, sub_block and rr_period must be >= 1");
  }
  width_ = cfg.sub_block;
  total_ = cfg.padded_nev();
  if (total_ + 2 * width_ > n_) {
    throw Error(ErrorCode::InvalidConfig,
                "need padded nev + 2 * sub_block <= n (padded nev=" + std::to_string(total_) +
                    ", sub_block=" + std::to_string(width_) + ", n=" + std::to_string(n_) + ")");
  }
  if (!(cfg.tol > 0.0) || cfg.max_iter == 0 || !(cfg.restart_cond_limit > 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "tol and restart_cond_limit must be positive, max_iter >= 1");
  }

  if (problem.constraints.cols() > 0) {
    if (problem.constraints.rows() != n_) {
      throw Error(ErrorCode::DimensionMismatch, "constraint block has the wrong row count");
    }
    OrthoResult y = b_orthonormalize(problem.constraints, *b_);
    ++counts_.orthonormalize;
    y_ = std::move(y.basis);
    by_ = std::move(y.b_basis);
  }

  detail::CountingOperator a_count(*a_, counts_.matvec);
  norm_a_ = norm_estimate(a_count);
  norm_b_ = norm_estimate(*b_);

  subs_.resize(total_ / width_);
  BlockVector start = detail::random_block(n_, total_, cfg.seed);
  project_out(start, y_, by_);
  for (std::size_t j = 0; j < subs_.size(); ++j) subs_[j].x = start.columns(j * width_, width_);
  shared_rayleigh_ritz();

  res_norms_.assign(total_, 0.0);
  converged_.assign(total_, false);
  locked_.assign(total_, false);
}

BlockVector Lobpcg2Run::aggregate(BlockVector SubSolver::*field) const {
  BlockVector out(n_, total_);
  for (std::size_t j = 0; j < subs_.size(); ++j) {
    const BlockVector& part = subs_[j].*field;
    std::ranges::copy(part.data(), out.data().begin() + static_cast<std::ptrdiff_t>(j * width_ * n_));
  }
  return out;
}

void Lobpcg2Run::shared_rayleigh_ritz() {
  detail::CountingOperator a_count(*a_, counts_.matvec);
  BlockVector span = aggregate(&SubSolver::x);
  RitzSet rr;
  try {
    rr = rayleigh_ritz(span, a_count, *b_, total_);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientRank) throw;
    // Sub-solvers collapsed onto a common subspace: refill the span.
    BlockVector extra = detail::random_block(n_, total_, cfg_.seed + 1 + iterations_);
    project_out(extra, y_, by_);
    rr = rayleigh_ritz(hcat(span, extra), a_count, *b_, total_);
    ++counts_.orthonormalize;
  }
  ++counts_.rayleigh_ritz;
  ++counts_.orthonormalize;

  for (std::size_t j = 0; j < subs_.size(); ++j) {
    SubSolver& s = subs_[j];
    s.x = rr.vectors.columns(j * width_, width_);
    s.ax = rr.a_vectors.columns(j * width_, width_);
    s.bx = rr.b_vectors.columns(j * width_, width_);
    s.theta.assign(rr.values.begin() + static_cast<std::ptrdiff_t>(j * width_),
                   rr.values.begin() + static_cast<std::ptrdiff_t>((j + 1) * width_));
    if (cfg_.reset_directions_on_rr) s.p = BlockVector();
  }
  at_shared_ = true;
  steps_since_rr_ = 0;
}

bool Lobpcg2Run::leading_converged() const {
  // The nev smallest current values, ties broken by column index.
  std::vector<std::size_t> order(total_);
  std::iota(order.begin(), order.end(), 0);
  auto value = [&](std::size_t g) { return subs_[g / width_].theta[g % width_]; };
  std::ranges::stable_sort(order, [&](std::size_t l, std::size_t r) { return value(l) < value(r); });
  for (std::size_t k = 0; k < cfg_.nev; ++k) {
    if (!converged_[order[k]]) return false;
  }
  return true;
}

bool Lobpcg2Run::evaluate(bool record) {
  for (std::size_t j = 0; j < subs_.size(); ++j) {
    SubSolver& s = subs_[j];
    s.r = residual_from_images(s.ax, s.bx, s.theta);
    for (std::size_t c = 0; c < width_; ++c) {
      const std::size_t g = global(j, c);
      res_norms_[g] = norm2(s.r.col(c));
      converged_[g] = meets_criterion(res_norms_[g], s.theta[c], norm2(s.x.col(c)), cfg_.tol,
                                      norm_a_, norm_b_);
      if (cfg_.locking == Locking::Soft && converged_[g]) locked_[g] = true;
    }
  }
  if (record) {
    ++iterations_;
    if (cfg_.record_history) {
      std::vector<std::size_t> order(total_);
      std::iota(order.begin(), order.end(), 0);
      auto value = [&](std::size_t g) { return subs_[g / width_].theta[g % width_]; };
      std::ranges::stable_sort(order,
                               [&](std::size_t l, std::size_t r) { return value(l) < value(r); });
      IterationRecord rec;
      rec.iter = iterations_;
      for (std::size_t g : order) {
        rec.ritz_values.push_back(value(g));
        rec.residual_norms.push_back(res_norms_[g]);
      }
      rec.locked_count = static_cast<std::size_t>(std::ranges::count(locked_, true));
      rec.basis_cols = at_shared_ ? total_ : local_basis_cols_;
      rec.shared_rr = at_shared_;
      history_.push_back(std::move(rec));
    }
  }
  return leading_converged();
}

bool Lobpcg2Run::verify_fresh() {
  detail::CountingOperator a_count(*a_, counts_.matvec);
  for (SubSolver& s : subs_) {
    s.ax = op_apply(a_count, s.x);
    s.bx = op_apply(*b_, s.x);
  }
  return evaluate(false);
}

bool Lobpcg2Run::step() {
  detail::CountingOperator a_count(*a_, counts_.matvec);
  detail::CountingOperator t_count(t_ != nullptr ? *t_ : *b_, counts_.precond);

  // Snapshot of the aggregate block; every sub-solver projects against it.
  const OrthoResult all = b_orthonormalize(aggregate(&SubSolver::x), aggregate(&SubSolver::bx), *b_);
  ++counts_.orthonormalize;

  bool any_active = false;
  bool any_progress = false;
  local_basis_cols_ = 0;
  for (std::size_t j = 0; j < subs_.size(); ++j) {
    SubSolver& s = subs_[j];
    std::vector<std::size_t> active;
    for (std::size_t c = 0; c < width_; ++c) {
      const std::size_t g = global(j, c);
      if (cfg_.locking == Locking::None || !locked_[g] || !converged_[g]) active.push_back(c);
    }
    if (active.empty()) continue;  // idle
    any_active = true;

    BlockVector w = s.r.select_columns(active);
    project_out(w, all.basis, all.b_basis);
    if (t_ != nullptr) w = op_apply(t_count, w);
    project_out(w, y_, by_);
    project_out(w, all.basis, all.b_basis);

    OrthoResult ow;
    try {
      ow = b_orthonormalize(w, *b_);
      ++counts_.orthonormalize;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ZeroRank) throw;
      continue;
    }

    BlockVector p;
    if (s.p.cols() > 0) {
      BlockVector candidate = s.p;
      project_out(candidate, y_, by_);
      project_out(candidate, all.basis, all.b_basis);
      project_out(candidate, ow.basis, ow.b_basis);
      try {
        OrthoResult op = b_orthonormalize(candidate, *b_);
        ++counts_.orthonormalize;
        const bool rank_loss = op.kept.size() < candidate.cols();
        const bool ill_conditioned = op.gram_min * cfg_.restart_cond_limit < 1.0;
        if (!rank_loss && !ill_conditioned) p = std::move(op.basis);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroRank) throw;
      }
    }

    const BlockVector directions = hcat(ow.basis, p);
    const BlockVector basis = hcat(s.x, directions);
    RitzSet rr = rayleigh_ritz(basis, a_count, *b_, width_);
    ++counts_.rayleigh_ritz;
    ++counts_.orthonormalize;
    local_basis_cols_ += basis.cols();

    const DenseMatrix c_dirs =
        rr.coefficients.row_range(width_, directions.cols()).select_columns(active);
    try {
      s.p = b_orthonormalize(matmul(directions, c_dirs), *b_).basis;
      ++counts_.orthonormalize;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ZeroRank) throw;
      s.p = BlockVector();
    }
    s.x = std::move(rr.vectors);
    s.ax = std::move(rr.a_vectors);
    s.bx = std::move(rr.b_vectors);
    s.theta = std::move(rr.values);
    any_progress = true;
  }
  at_shared_ = false;
  if (any_active && !any_progress) return false;

  if (++steps_since_rr_ >= cfg_.rr_period) shared_rayleigh_ritz();
  return true;
}

SolveResult Lobpcg2Run::finish(Status status) {
  if (!at_shared_) shared_rayleigh_ritz();
  if (status != Status::Converged && evaluate(false) && verify_fresh()) status = Status::Converged;

  SolveResult out;
  out.status = status;
  out.iterations = iterations_;
  const BlockVector x_all = aggregate(&SubSolver::x);
  out.vectors = x_all.columns(0, cfg_.nev);
  for (std::size_t g = 0; g < cfg_.nev; ++g) out.values.push_back(subs_[g / width_].theta[g % width_]);

  detail::CountingOperator a_count(*a_, counts_.matvec);
  const BlockVector r = residual_block(a_count, *b_, out.vectors, out.values);
  for (std::size_t k = 0; k < cfg_.nev; ++k) out.residual_norms.push_back(norm2(r.col(k)));
  out.history = history_;
  out.counts = counts_;
  return out;
}

SolveResult Lobpcg2Run::solve() {
  for (;;) {
    if (evaluate(true)) {
      bool ready = true;
      if (!at_shared_) {
        shared_rayleigh_ritz();
        ready = evaluate(false);
      }
      if (ready && verify_fresh()) return finish(Status::Converged);
    }
    if (iterations_ >= cfg_.max_iter) return finish(Status::MaxIterReached);
    if (!step()) return finish(Status::Breakdown);
  }
}

}  // namespace

SolveResult lobpcg2_solve(const EigenProblem& problem, const Lobpcg2Config& cfg) {
  Lobpcg2Run run(problem, cfg);
  return run.solve();
}

}  // namespace lobpcg
