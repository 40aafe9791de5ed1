#pragma once

// Helpers shared by the block and LOBPCG II solvers.

#include <cstddef>
#include <cstdint>
#include <random>

#include "lobpcg/dense.hpp"
#include "lobpcg/operators.hpp"

namespace lobpcg::detail {

/// Forwards to an operator while tallying the columns it processes.
class CountingOperator final : public LinearOperator {
 public:
  CountingOperator(const LinearOperator& inner, std::size_t& counter)
      : inner_(inner), counter_(counter) {}
  std::size_t dim() const override { return inner_.dim(); }
  OperatorKind kind() const override { return inner_.kind(); }
  DenseMatrix apply(const DenseMatrix& v) const override {
    counter_ += v.cols();
    return op_apply(inner_, v);
  }
  std::optional<double> max_row_abs_sum() const override { return inner_.max_row_abs_sum(); }

 private:
  const LinearOperator& inner_;
  std::size_t& counter_;
};

/// Standard-normal n x m block, deterministic in the seed.
inline DenseMatrix random_block(std::size_t n, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  DenseMatrix v(n, m);
  for (double& x : v.data()) x = normal(rng);
  return v;
}

}  // namespace lobpcg::detail
