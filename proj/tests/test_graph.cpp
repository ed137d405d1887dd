#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "evosim/graph.hpp"

using namespace evosim;

namespace {

HalfEdgeGraph triangle() { return HalfEdgeGraph(3, {{0, 1}, {1, 2}, {2, 0}}); }

}  // namespace

TEST(HalfEdgeGraph, BasicAccessors) {
  const auto g = triangle();
  EXPECT_EQ(g.n(), 3u);
  EXPECT_EQ(g.num_edges(), 3u);
  EXPECT_EQ(g.num_half_edges(), 6u);
  EXPECT_EQ(g.num_unpaired(), 0u);
  EXPECT_EQ(g.endpoints(1), std::make_pair(1u, 2u));
  EXPECT_EQ(g.partner(4), 5u);
  EXPECT_EQ(g.partner(5), 4u);
  EXPECT_EQ(HalfEdgeGraph::edge_of(5), 2u);
  for (std::uint32_t v = 0; v < 3; ++v) EXPECT_EQ(g.degree(v), 2u);
  EXPECT_TRUE(g.is_simple());
  EXPECT_NO_THROW(g.check_invariants());
}

TEST(HalfEdgeGraph, RejectsBadInput) {
  EXPECT_THROW(HalfEdgeGraph(0, {}), std::invalid_argument);
  EXPECT_THROW(HalfEdgeGraph(2, {{0, 2}}), std::invalid_argument);
  EXPECT_THROW(HalfEdgeGraph(2, {}, {5}), std::invalid_argument);
}

TEST(HalfEdgeGraph, SimplicityDetectsLoopsAndMultiEdges) {
  EXPECT_FALSE(HalfEdgeGraph(2, {{0, 0}}).is_simple());
  EXPECT_FALSE(HalfEdgeGraph(2, {{0, 1}, {1, 0}}).is_simple());
  EXPECT_TRUE(HalfEdgeGraph(4, {{0, 1}, {2, 3}}).is_simple());
}

TEST(HalfEdgeGraph, RewireKeepsIdentityAndBumpsVersion) {
  auto g = triangle();
  const EdgeHandle h = g.handle(0);
  const EdgeHandle fresh = g.rewire(h, 1, 2);
  EXPECT_EQ(g.endpoints(0), std::make_pair(0u, 2u));
  EXPECT_EQ(g.owner(1), 2u);
  EXPECT_EQ(g.degree(1), 1u);
  EXPECT_EQ(g.degree(2), 3u);
  EXPECT_FALSE(g.is_current(h));
  EXPECT_TRUE(g.is_current(fresh));
  EXPECT_THROW(g.rewire(h, 0, 1), GraphError);
  EXPECT_THROW(g.rewire(fresh, 2, 1), GraphError);
  EXPECT_THROW(g.rewire(fresh, 0, 7), GraphError);
  EXPECT_THROW(g.handle(9), GraphError);
  EXPECT_NO_THROW(g.check_invariants());
}

TEST(HalfEdgeGraph, RandomMovesPreserveInvariants) {
  auto g = gen_config_model(200, DegreeDistribution::poisson(4), 3);
  Rng rng(4);
  std::vector<std::size_t> before(g.n());
  for (std::uint32_t v = 0; v < g.n(); ++v) before[v] = g.degree(v);
  for (int i = 0; i < 5000; ++i) {
    const auto h = static_cast<std::uint32_t>(rng.index(g.num_half_edges()));
    const auto to = static_cast<std::uint32_t>(rng.index(g.n()));
    const auto from = g.owner(h);
    g.move_half_edge(h, to);
    if (from != to) {
      --before[from];
      ++before[to];
    }
  }
  g.check_invariants();
  for (std::uint32_t v = 0; v < g.n(); ++v) ASSERT_EQ(g.degree(v), before[v]);
}

TEST(HalfEdgeGraph, ActivationCounter) {
  auto g = triangle();
  EXPECT_EQ(g.activation(2), 0u);
  EXPECT_EQ(g.advance_activation(2), 1u);
  EXPECT_EQ(g.advance_activation(2), 2u);
  EXPECT_EQ(g.activation(1), 0u);
}

TEST(HalfEdgeGraph, TextRoundTrip) {
  const HalfEdgeGraph g(5, {{0, 1}, {3, 3}, {4, 2}}, {1, 4});
  std::stringstream ss;
  g.write(ss);
  const auto back = HalfEdgeGraph::read(ss);
  EXPECT_EQ(back.n(), 5u);
  ASSERT_EQ(back.num_edges(), 3u);
  EXPECT_EQ(back.num_unpaired(), 2u);
  for (std::uint32_t h = 0; h < g.num_half_edges(); ++h) EXPECT_EQ(back.owner(h), g.owner(h));
  EXPECT_EQ(back.partner(6), HalfEdgeGraph::kNone);
  back.check_invariants();
}

TEST(HalfEdgeGraph, ReadErrors) {
  std::istringstream no_header("0 1\n");
  EXPECT_THROW(HalfEdgeGraph::read(no_header), std::invalid_argument);
  std::istringstream out_of_range("n=2\n0 2\n");
  EXPECT_THROW(HalfEdgeGraph::read(out_of_range), std::invalid_argument);
  std::istringstream empty("# nothing\n");
  EXPECT_THROW(HalfEdgeGraph::read(empty), std::invalid_argument);
  std::istringstream comments("# c\nn=2\r\n\n0 1\n");
  EXPECT_EQ(HalfEdgeGraph::read(comments).num_edges(), 1u);
}

TEST(ConfigurationModel, DegreesFollowSampledSequence) {
  Rng rng(11);
  const auto dist = DegreeDistribution::poisson(3);
  const auto degrees = sample_degrees(501, dist, rng);
  std::uint64_t sum = 0;
  for (auto d : degrees) sum += d;
  EXPECT_EQ(sum % 2, 0u);
  const auto g = pair_uniformly(degrees, rng);
  for (std::uint32_t v = 0; v < g.n(); ++v) ASSERT_EQ(g.degree(v), degrees[v]);
  g.check_invariants();
}

TEST(ConfigurationModel, OddRegularSumIsRejected) {
  Rng rng(1);
  EXPECT_THROW(sample_degrees(5, DegreeDistribution::regular(3), rng), std::invalid_argument);
  EXPECT_NO_THROW(sample_degrees(6, DegreeDistribution::regular(3), rng));
  EXPECT_THROW(pair_uniformly({1, 2}, rng), std::invalid_argument);
}

TEST(ConfigurationModel, MatchingIsUniform) {
  // Four degree-1 vertices have three perfect matchings.
  Rng rng(5);
  std::map<std::uint32_t, int> counts;
  const int trials = 30000;
  for (int t = 0; t < trials; ++t) {
    const auto g = pair_uniformly({1, 1, 1, 1}, rng);
    std::uint32_t mate = 0;
    for (std::uint32_t e = 0; e < 2; ++e) {
      auto [a, b] = g.endpoints(e);
      if (a == 0) mate = b;
      if (b == 0) mate = a;
    }
    ++counts[mate];
  }
  double chi2 = 0;
  for (std::uint32_t m = 1; m <= 3; ++m) {
    const double expected = trials / 3.0;
    chi2 += std::pow(counts[m] - expected, 2) / expected;
  }
  EXPECT_LT(chi2, 13.8);  // chi-square(2) at p = 0.001
}

TEST(ConfigurationModel, SelfLoopCountMatchesExpectation) {
  // Expected self-loops tend to E[D(D-1)] / (2 E[D]) = mu / 2 for Poisson(mu).
  const int graphs = 200;
  double loops = 0;
  for (int i = 0; i < graphs; ++i) {
    const auto g = gen_config_model(2000, DegreeDistribution::poisson(4), 100 + i);
    for (std::uint32_t e = 0; e < g.num_edges(); ++e) loops += g.endpoints(e).first == g.endpoints(e).second;
  }
  EXPECT_NEAR(loops / graphs, 2.0, 0.35);
}

TEST(ConfigurationModel, SeedDeterminism) {
  const auto a = gen_config_model(300, DegreeDistribution::geometric(0.4), 9);
  const auto b = gen_config_model(300, DegreeDistribution::geometric(0.4), 9);
  ASSERT_EQ(a.num_edges(), b.num_edges());
  for (std::uint32_t h = 0; h < a.num_half_edges(); ++h) ASSERT_EQ(a.owner(h), b.owner(h));
}

TEST(ErdosRenyi, SimpleWithBinomialEdgeCount) {
  const std::size_t n = 2000;
  const double mu = 3.0;
  double total = 0;
  const int graphs = 40;
  for (int i = 0; i < graphs; ++i) {
    const auto g = gen_er(n, mu, 500 + i);
    ASSERT_TRUE(g.is_simple());
    total += static_cast<double>(g.num_edges());
  }
  const double p = mu / n;
  const double pairs = n * (n - 1) / 2.0;
  const double se = std::sqrt(pairs * p * (1 - p) / graphs);
  EXPECT_NEAR(total / graphs, pairs * p, 4 * se);
}

TEST(ErdosRenyi, PairsAreUniform) {
  // On 5 vertices every one of the 10 pairs should appear with probability p.
  const std::size_t n = 5;
  const int graphs = 20000;
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> counts;
  for (int i = 0; i < graphs; ++i) {
    const auto g = gen_er(n, 2.0, 1000 + i);
    for (std::uint32_t e = 0; e < g.num_edges(); ++e) {
      auto [a, b] = g.endpoints(e);
      ++counts[{std::min(a, b), std::max(a, b)}];
    }
  }
  ASSERT_EQ(counts.size(), 10u);
  double chi2 = 0;
  for (const auto& [pair, c] : counts) {
    const double expected = graphs * 0.4;
    chi2 += std::pow(c - expected, 2) / (expected * 0.6);
  }
  EXPECT_LT(chi2, 27.9);  // chi-square(9) at p = 0.001
}

TEST(ErdosRenyi, EdgeCases) {
  EXPECT_EQ(gen_er(1, 0.5, 1).num_edges(), 0u);
  EXPECT_EQ(gen_er(10, 0.0, 1).num_edges(), 0u);
  EXPECT_EQ(gen_er(4, 4.0, 1).num_edges(), 6u);
  EXPECT_THROW(gen_er(4, 5.0, 1), std::invalid_argument);
  EXPECT_THROW(gen_er(0, 1.0, 1), std::invalid_argument);
}
