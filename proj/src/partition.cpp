#include "lobpcg/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lobpcg/error.hpp"

namespace lobpcg {

PartitionResult fiedler_bisection(std::size_t n, std::span<const Edge> edges,
                                  const PartitionConfig& cfg) {
  if (n < 3) throw Error(ErrorCode::InvalidConfig, "partitioning needs at least 3 vertices");
  const SparseSymMatrix laplacian = laplacian_from_edges(n, edges);

  EigenProblem problem;
  problem.a = &laplacian;
  problem.constraints = BlockVector(n, 1, 1.0 / std::sqrt(static_cast<double>(n)));

  SolverConfig sc;
  sc.nev = 1;
  sc.block_size = n >= 12 ? 2 : 1;
  sc.tol = cfg.tol;
  sc.max_iter = cfg.max_iter;
  sc.seed = cfg.seed;

  PartitionResult out;
  out.solve = lobpcg_solve(problem, sc);
  out.fiedler_value = out.solve.values.front();
  const auto fiedler = out.solve.vectors.col(0);
  out.fiedler_vector.assign(fiedler.begin(), fiedler.end());

  if (out.fiedler_value <= 1e-10 * norm_estimate(laplacian)) {
    throw Error(ErrorCode::DisconnectedGraph,
                "second Laplacian eigenvalue " + std::to_string(out.fiedler_value) +
                    " is numerically zero");
  }

  std::vector<std::size_t> rank(n);
  std::iota(rank.begin(), rank.end(), 0);
  std::ranges::stable_sort(rank, [&](std::size_t a, std::size_t b) { return fiedler[a] < fiedler[b]; });
  out.labels.assign(n, 0);
  for (std::size_t k = (n + 1) / 2; k < n; ++k) out.labels[rank[k]] = 1;
  if (out.labels[0] == 1) {
    for (int& l : out.labels) l = 1 - l;
  }

  for (const Edge& e : edges) {
    if (out.labels[e.u] != out.labels[e.v]) out.cut_weight += e.weight;
  }
  return out;
}

}  // namespace lobpcg
