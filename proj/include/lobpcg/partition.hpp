#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lobpcg/operators.hpp"
#include "lobpcg/solver.hpp"

namespace lobpcg {

struct PartitionResult {
  std::vector<int> labels;  // per vertex, 0 or 1; vertex 0 is always labelled 0
  double fiedler_value = 0.0;
  double cut_weight = 0.0;
  std::vector<double> fiedler_vector;
  SolveResult solve;
};

struct PartitionConfig {
  double tol = 1e-10;
  std::size_t max_iter = 2000;
  std::uint64_t seed = 0;
};

/// Spectral bisection by the Fiedler vector of the graph Laplacian.
///
/// The constant vector is deflated as a known null vector and the smallest
/// remaining pair is computed with LOBPCG. Vertices are split at the median of
/// the Fiedler vector: ranked by (value, vertex id), the upper half gets label
/// 1, then labels are flipped if needed so vertex 0 is in class 0.
/// Throws DisconnectedGraph when the Fiedler value is <= 1e-10 * ||L||_est.
PartitionResult fiedler_bisection(std::size_t n, std::span<const Edge> edges,
                                  const PartitionConfig& cfg = {});

}  // namespace lobpcg
