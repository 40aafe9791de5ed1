#include <gtest/gtest.h>

#include <algorithm>

#include "lobpcg/error.hpp"
#include "lobpcg/oracle.hpp"
#include "lobpcg/partition.hpp"

namespace lobpcg {
namespace {

std::vector<Edge> two_cliques() {
  std::vector<Edge> e;
  for (std::size_t base : {0u, 4u})
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i + 1; j < 4; ++j) e.push_back({base + i, base + j, 1.0});
  e.push_back({3, 4, 1.0});
  return e;
}

TEST(Partition, TwoCliquesSeparateExactly) {
  const std::vector<Edge> e = two_cliques();
  const PartitionResult r = fiedler_bisection(8, e);
  EXPECT_EQ(r.labels, (std::vector<int>{0, 0, 0, 0, 1, 1, 1, 1}));
  EXPECT_DOUBLE_EQ(r.cut_weight, 1.0);

  const SymEigResult oracle = dense_oracle(laplacian_from_edges(8, e), IdentityOperator(8));
  EXPECT_NEAR(r.fiedler_value, oracle.values[1], 1e-9);
  // The oracle's Fiedler vector induces the same split.
  for (std::size_t v = 1; v < 8; ++v) {
    const bool same_side = (oracle.vectors(v, 1) > 0) == (oracle.vectors(0, 1) > 0);
    EXPECT_EQ(same_side, r.labels[v] == 0);
  }
}

TEST(Partition, PathSplitsInTheMiddle) {
  const std::vector<Edge> e = {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}};
  const PartitionResult r = fiedler_bisection(4, e);
  EXPECT_EQ(r.labels, (std::vector<int>{0, 0, 1, 1}));
  EXPECT_DOUBLE_EQ(r.cut_weight, 1.0);
  const SymEigResult oracle = dense_oracle(laplacian_from_edges(4, e), IdentityOperator(4));
  EXPECT_NEAR(r.fiedler_value, oracle.values[1], 1e-10);
}

TEST(Partition, DisconnectedTrianglesAreReported) {
  const std::vector<Edge> e = {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}, {3, 4, 1}, {4, 5, 1}, {3, 5, 1}};
  try {
    fiedler_bisection(6, e);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::DisconnectedGraph);
  }
}

TEST(Partition, LabelsInvariantUnderWeightScaling) {
  std::vector<Edge> e = two_cliques();
  e.push_back({0, 5, 0.25});
  e.push_back({2, 6, 0.5});
  const PartitionResult base = fiedler_bisection(8, e);
  for (double c : {1e-3, 0.5, 7.0, 1e4}) {
    std::vector<Edge> scaled = e;
    for (Edge& x : scaled) x.weight *= c;
    const PartitionResult r = fiedler_bisection(8, scaled);
    EXPECT_EQ(r.labels, base.labels) << "scale " << c;
    EXPECT_NEAR(r.cut_weight, c * base.cut_weight, 1e-12 * c * base.cut_weight);
  }
}

TEST(Partition, LargerGridHasBalancedNonemptyClasses) {
  // 6 x 5 grid graph.
  std::vector<Edge> e;
  const auto id = [](std::size_t r, std::size_t c) { return r * 5 + c; };
  for (std::size_t r = 0; r < 6; ++r)
    for (std::size_t c = 0; c < 5; ++c) {
      if (c + 1 < 5) e.push_back({id(r, c), id(r, c + 1), 1});
      if (r + 1 < 6) e.push_back({id(r, c), id(r + 1, c), 1});
    }
  const PartitionResult r = fiedler_bisection(30, e);
  EXPECT_EQ(std::count(r.labels.begin(), r.labels.end(), 1), 15);
  EXPECT_EQ(r.labels[0], 0);
  EXPECT_DOUBLE_EQ(r.cut_weight, 5.0);  // cut across the long side
  EXPECT_GE(r.cut_weight, 0.0);
}

TEST(Partition, TooFewVertices) {
  const std::vector<Edge> e = {{0, 1, 1}};
  EXPECT_THROW(fiedler_bisection(2, e), Error);
}

}  // namespace
}  // namespace lobpcg
