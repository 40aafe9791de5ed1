#pragma once

#include <cstddef>
#include <cstdint>

#include "lobpcg/solver.hpp"

namespace lobpcg {

/// LOBPCG II: nev / sub_block independent width-sub_block recurrences coupled
/// by a Rayleigh-Ritz over all of them every rr_period iterations.
struct Lobpcg2Config {
  std::size_t nev = 1;
  std::size_t sub_block = 1;
  std::size_t rr_period = 1;
  double tol = 1e-8;
  std::size_t max_iter = 500;
  std::uint64_t seed = 0;
  Locking locking = Locking::Soft;
  double restart_cond_limit = 1e12;
  bool record_history = false;
  /// Discard every sub-solver's P after each shared Rayleigh-Ritz.
  bool reset_directions_on_rr = false;

  /// nev rounded up to a multiple of sub_block.
  std::size_t padded_nev() const { return (nev + sub_block - 1) / sub_block * sub_block; }
};

/// Sub-solver steps only read the aggregate block captured at the start of
/// the iteration, so the result does not depend on their execution order.
/// The returned vectors always come from a final shared Rayleigh-Ritz.
SolveResult lobpcg2_solve(const EigenProblem& problem, const Lobpcg2Config& cfg);

}  // namespace lobpcg
