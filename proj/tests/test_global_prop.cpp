#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "apro/errors.hpp"
#include "apro/global_prop.hpp"
#include "apro/grid_graph.hpp"
#include "apro/oracle.hpp"
#include "support/generators.hpp"
#include "support/reference_mst.hpp"

namespace apro {
namespace {

using testing::max_abs_diff;

SpanningTree worked_tree() {
  return guide_spanning_tree(GuideTensor(2, 2, 1, {0.0, 0.5, 0.0, 1.0}));
}

TEST(GlobalPropagate, UniformGuideGivesMean) {
  const SpanningTree t = guide_spanning_tree(GuideTensor(2, 2, 1));
  for (const double zeta : {1e-3, 0.07, 5.0}) {
    const DenseField y = global_propagate(t, DenseField(1, 2, 2, {1, 0, 0, 0}), zeta);
    for (const double v : y.values()) EXPECT_DOUBLE_EQ(v, 0.25);
  }
}

TEST(GlobalPropagate, WorkedExampleMatchesOracle) {
  const DenseField phi(1, 2, 2, {1, 0, 0, 0});
  const DenseField y = global_propagate(worked_tree(), phi, 0.5);
  const double e = std::exp(-1.0);
  EXPECT_NEAR(y.values()[0], 1.0 / (2.0 + 2.0 * e), 1e-15);
  EXPECT_NEAR(y.values()[1], e / (1.0 + 3.0 * e), 1e-15);
  EXPECT_NEAR(y.values()[2], 1.0 / (2.0 + 2.0 * e), 1e-15);
  EXPECT_NEAR(y.values()[3], e / (1.0 + 3.0 * e), 1e-15);
  EXPECT_LE(max_abs_diff(y, oracle::gp_bruteforce(worked_tree(), phi, 0.5)), 1e-15);
}

TEST(GlobalPropagate, TinyZetaIsIdentity) {
  // Distinct positive weights on all four edges.
  const GuideTensor guide(2, 2, 1, {0.0, 0.3, 0.7, 0.1});
  const SpanningTree t = guide_spanning_tree(guide);
  for (const auto& e : t.edges) ASSERT_GT(e.w, 0.0);
  const DenseField phi(1, 2, 2, {0.9, -0.2, 0.4, 0.0});
  EXPECT_LT(max_abs_diff(global_propagate(t, phi, 1e-4), phi), 1e-6);
}

TEST(GlobalPropagate, SinglePixelReturnsInput) {
  const SpanningTree t = guide_spanning_tree(GuideTensor(1, 1, 3));
  const DenseField phi(2, 1, 1, {0.3, -4.0});
  EXPECT_EQ(global_propagate(t, phi, 0.07), phi);
}

TEST(GlobalPropagate, RandomAgreementWithOracle) {
  std::mt19937_64 rng(101);
  for (int rep = 0; rep < 40; ++rep) {
    std::uniform_int_distribution<std::size_t> side(1, 12);
    const std::size_t h = side(rng), w = side(rng);
    const GuideTensor guide = testing::random_guide(rng, h, w, rep % 2 ? 3 : 1, rep % 3 == 0);
    const SpanningTree t = guide_spanning_tree(guide);
    const DenseField phi = testing::random_field(rng, 1 + rep % 4, h, w);
    const double zeta = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    EXPECT_LE(max_abs_diff(global_propagate(t, phi, zeta), oracle::gp_bruteforce(t, phi, zeta)),
              1e-9)
        << h << "x" << w;
  }
}

TEST(GlobalPropagate, ConstantRangeAndLinearity) {
  std::mt19937_64 rng(103);
  for (int rep = 0; rep < 20; ++rep) {
    const GuideTensor guide = testing::random_guide(rng, 9, 11, 3, rep % 2 == 0);
    const SpanningTree t = guide_spanning_tree(guide);
    const DenseField c = global_propagate(t, testing::constant_field(3, 9, 11, 2.5), 0.07);
    for (const double v : c.values()) EXPECT_NEAR(v, 2.5, 1e-12);

    const DenseField a = testing::random_field(rng, 2, 9, 11);
    const DenseField b = testing::random_field(rng, 2, 9, 11);
    const DenseField ya = global_propagate(t, a, 0.3);
    for (std::size_t k = 0; k < 2; ++k) {
      const auto [lo, hi] = std::minmax_element(a.plane(k).begin(), a.plane(k).end());
      for (const double v : ya.plane(k)) {
        EXPECT_GE(v, *lo - 1e-12);
        EXPECT_LE(v, *hi + 1e-12);
      }
    }
    const DenseField lhs = global_propagate(t, testing::linear_combination(0.5, a, 4.0, b), 0.3);
    const DenseField rhs = testing::linear_combination(0.5, ya, 4.0, global_propagate(t, b, 0.3));
    EXPECT_LE(max_abs_diff(lhs, rhs), 1e-9);
  }
}

TEST(GlobalPropagate, HugeZetaGivesMean) {
  std::mt19937_64 rng(107);
  const SpanningTree t = guide_spanning_tree(testing::random_guide(rng, 8, 8, 3, false));
  const DenseField phi = testing::random_field(rng, 1, 8, 8);
  double mean = 0.0;
  for (const double v : phi.values()) mean += v;
  mean /= 64.0;
  const DenseField y = global_propagate(t, phi, 1e6);
  for (const double v : y.values()) EXPECT_LT(std::abs(v - mean), 1e-3);
}

TEST(GlobalPropagate, IndependentOfMstTieBreak) {
  std::mt19937_64 rng(109);
  for (int rep = 0; rep < 10; ++rep) {
    const PlanarGraph g = build_planar_graph(testing::random_guide(rng, 7, 6, 1, true));
    const SpanningTree a = minimum_spanning_tree(g);
    const SpanningTree b = testing::reverse_tie_mst(g);
    ASSERT_NE(a.edges, b.edges);
    const DenseField phi = testing::random_field(rng, 2, 7, 6);
    EXPECT_LE(max_abs_diff(global_propagate(a, phi, 0.4), global_propagate(b, phi, 0.4)), 1e-9);
  }
}

TEST(GlobalPropagate, IndependentOfEqualWeightOrder) {
  std::mt19937_64 rng(113);
  for (int rep = 0; rep < 10; ++rep) {
    SpanningTree t = guide_spanning_tree(testing::random_guide(rng, 6, 8, 1, true));
    const DenseField phi = testing::random_field(rng, 1, 6, 8);
    const DenseField reference = oracle::gp_bruteforce(t, phi, 0.5);
    // Shuffle within each run of equal weights; order stays ascending.
    auto begin = t.edges.begin();
    while (begin != t.edges.end()) {
      auto end = std::find_if(begin, t.edges.end(), [&](const auto& e) { return e.w != begin->w; });
      std::shuffle(begin, end, rng);
      begin = end;
    }
    EXPECT_LE(max_abs_diff(global_propagate(t, phi, 0.5), reference), 1e-9);
  }
}

TEST(GlobalPropagate, UnsortedTreeIsSortedInternally) {
  std::mt19937_64 rng(127);
  SpanningTree t = guide_spanning_tree(testing::random_guide(rng, 5, 5, 3, false));
  const DenseField phi = testing::random_field(rng, 1, 5, 5);
  const DenseField expected = global_propagate(t, phi, 0.3);
  std::reverse(t.edges.begin(), t.edges.end());
  EXPECT_LE(max_abs_diff(global_propagate(t, phi, 0.3), expected), 1e-12);
}

TEST(GlobalPropagate, RejectsBadInput) {
  const SpanningTree t = worked_tree();
  const DenseField phi(1, 2, 2, {1, 0, 0, 0});
  EXPECT_THROW(global_propagate(t, phi, 0.0), ValidationError);
  EXPECT_THROW(global_propagate(t, phi, -1.0), ValidationError);
  EXPECT_THROW(global_propagate(t, DenseField(1, 1, 4), 0.5), ValidationError);
  SpanningTree cyclic = t;
  cyclic.edges[2] = {2, 0, 0.3};
  EXPECT_THROW(global_propagate(cyclic, phi, 0.5), ValidationError);
  SpanningTree short_tree = t;
  short_tree.edges.pop_back();
  EXPECT_THROW(global_propagate(short_tree, phi, 0.5), ValidationError);
}

TEST(LazyForest, AggregateInvariantHoldsDuringMerges) {
  // Path 0-1-2-3-4 with ascending weights; check every node's aggregate after each union
  // against a direct sum over the nodes already in its union.
  const std::vector<double> w = {0.1, 0.2, 0.3, 0.4};
  const double zeta = 0.5;
  const std::vector<double> phi = {1.0, 2.0, -1.0, 0.5, 3.0};
  std::vector<double> init;
  for (const double p : phi) {
    init.push_back(1.0);
    init.push_back(p);
  }
  LazyForest forest(5, 2, init);
  SpanningTree path;
  path.height = 1;
  path.width = 5;
  for (NodeId i = 0; i < 4; ++i) {
    const NodeId a = forest.find(i);
    const NodeId b = forest.find(i + 1);
    forest.unite(a, b, std::exp(-w[i] / (zeta * zeta)));
    path.edges.push_back({i, i + 1, w[i]});
    for (NodeId v = 0; v < 5; ++v) {
      double ones = 0.0, sum = 0.0;
      for (NodeId j = 0; j < 5; ++j) {
        const bool joined = std::max(v, j) <= i + 1 || v == j;
        if (!joined) continue;
        double cost = 0.0;
        for (NodeId s = std::min(v, j); s < std::max(v, j); ++s) cost = std::max(cost, w[s]);
        ones += std::exp(-cost / (zeta * zeta));
        sum += std::exp(-cost / (zeta * zeta)) * phi[j];
      }
      std::vector<double> agg(2);
      forest.aggregate(v, {init.data() + 2 * v, 2}, agg);
      EXPECT_NEAR(agg[0], ones, 1e-12) << "after edge " << i << " node " << v;
      EXPECT_NEAR(agg[1], sum, 1e-12) << "after edge " << i << " node " << v;
    }
  }
  const NodeId root = forest.find(0);
  EXPECT_EQ(forest.union_size(root), 5u);
  for (NodeId v = 0; v < 5; ++v) {
    EXPECT_EQ(forest.find(v), root);
    EXPECT_TRUE(forest.parent(v) == root);
  }
}

TEST(LazyForest, UnionBySizeKeepsLargerRoot) {
  LazyForest forest(4, 1, std::vector<double>(4, 1.0));
  EXPECT_EQ(forest.unite(0, 1, 1.0), 0u);  // tie keeps first argument
  EXPECT_EQ(forest.unite(2, 0, 1.0), 0u);  // 2 is smaller
  EXPECT_EQ(forest.union_size(0), 3u);
  EXPECT_DOUBLE_EQ(forest.sums(0)[0], 3.0);
}

TEST(GlobalAffinityMap, QueryIsOneAndUniformIsAllOnes) {
  std::mt19937_64 rng(131);
  const SpanningTree t = guide_spanning_tree(testing::random_guide(rng, 6, 7, 3, false));
  for (NodeId q : {0u, 17u, 41u}) {
    EXPECT_EQ(global_affinity_map(t, q, 0.07).values()[q], 1.0);
  }
  const DenseField uniform = global_affinity_map(guide_spanning_tree(GuideTensor(3, 4, 1)), 5, 0.07);
  for (const double v : uniform.values()) EXPECT_EQ(v, 1.0);
}

TEST(GlobalAffinityMap, TwoRegions) {
  std::vector<double> v(4 * 6);
  for (std::size_t y = 0; y < 4; ++y)
    for (std::size_t x = 3; x < 6; ++x) v[y * 6 + x] = 1.0;
  const SpanningTree t = guide_spanning_tree(GuideTensor(4, 6, 1, v));
  const double zeta = 0.8;
  const DenseField map = global_affinity_map(t, 7, zeta);  // (x=1, y=1), left region
  for (std::size_t y = 0; y < 4; ++y) {
    for (std::size_t x = 0; x < 6; ++x) {
      const double expected = x < 3 ? 1.0 : std::exp(-1.0 / (zeta * zeta));
      EXPECT_EQ(map.at(0, y, x), expected);
      EXPECT_NEAR(map.at(0, y, x),
                  std::exp(-oracle::minimax_path_cost(t, 7, static_cast<NodeId>(y * 6 + x)) /
                           (zeta * zeta)),
                  1e-15);
    }
  }
  EXPECT_THROW(global_affinity_map(t, 24, zeta), ValidationError);
}

}  // namespace
}  // namespace apro
