#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "evosim/coupled_suite.hpp"
#include "evosim/oracles.hpp"
#include "evosim/verify.hpp"

using namespace evosim;

TEST(Percolation, ExplorationMatchesUnionFind) {
  const auto g = gen_config_model(3000, DegreeDistribution::poisson(2.5), 1);
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto keep = bernoulli_retain(g, 0.5, s);
    const auto seed = static_cast<std::uint32_t>(s * 97 % g.n());
    EXPECT_EQ(percolate_component(g, keep, seed), percolate_component_union_find(g, keep, seed));
  }
}

TEST(Percolation, ExtremeRetention) {
  const auto g = HalfEdgeGraph(4, {{0, 1}, {1, 2}});
  EXPECT_EQ(percolate_component(g, 1.0, 0, 1), (std::vector<std::uint32_t>{0, 1, 2}));
  EXPECT_EQ(percolate_component(g, 0.0, 1, 1), (std::vector<std::uint32_t>{1}));
  EXPECT_THROW(percolate_component(g, std::vector<bool>{true}, 0), std::invalid_argument);
  EXPECT_THROW(percolate_component(g, 0.5, 9, 1), std::invalid_argument);
  EXPECT_THROW(bernoulli_retain(g, 1.5, 1), std::invalid_argument);
}

TEST(ExactEnumeration, TriangleHandFormula) {
  const HalfEdgeGraph tri(3, {{0, 1}, {1, 2}, {2, 0}});
  for (double p : {0.2, 0.5, 0.9}) {
    const auto dist = exact_delsi_distribution(tri, p, 0);
    const double q = 1 - p;
    EXPECT_NEAR(dist.at(1), q * q, 1e-14);
    EXPECT_NEAR(dist.at(2), 2 * p * q * q, 1e-14);
    EXPECT_NEAR(dist.at(3), 1 - q * q - 2 * p * q * q, 1e-14);
  }
}

TEST(ExactEnumeration, SumsToOneAndHandlesLoops) {
  const HalfEdgeGraph g(4, {{0, 0}, {0, 1}, {0, 1}, {2, 3}});
  const auto dist = exact_delsi_distribution(g, 0.3, 0);
  double total = 0;
  for (const auto& [size, pr] : dist) total += pr;
  EXPECT_NEAR(total, 1.0, 1e-14);
  EXPECT_NEAR(dist.at(2), 1 - 0.7 * 0.7, 1e-14);
  EXPECT_EQ(dist.count(3), 0u);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> many(25, {0, 1});
  EXPECT_THROW(exact_delsi_distribution(HalfEdgeGraph(2, many), 0.5, 0), std::invalid_argument);
}

TEST(ExactEnumeration, MarkovDelSiMatches) {
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto g = random_small_graph(derive_seed(11, s));
    for (const auto& b : compare_delsi_with_enumeration(g, 1.0, 0.7, 0, 20000, derive_seed(12, s)))
      EXPECT_TRUE(b.within(4.0)) << "size " << b.size << " exact " << b.exact << " got " << b.empirical;
  }
}

TEST(ExactEnumeration, RandomSmallGraphShape) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto g = random_small_graph(s, 10);
    EXPECT_GE(g.n(), 3u);
    EXPECT_LE(g.n(), 7u);
    EXPECT_GE(g.num_edges(), 1u);
    EXPECT_LE(g.num_edges(), 10u);
  }
}

TEST(BundlePercolation, DelSiIsTheRetainedCluster) {
  const auto g = gen_config_model(2000, DegreeDistribution::poisson(4), 2);
  for (std::uint64_t s = 0; s < 30; ++s) {
    EpidemicConfig cfg;
    cfg.variant = Variant::DelSI;
    cfg.lambda = 1.0;
    cfg.rho = 1.5;
    const CouplingBundle b(s, cfg.lambda, cfg.rho, g.n());
    const auto tr = run_static(g, cfg, b);
    EXPECT_EQ(tr.infected, percolate_component(g, retained_from_bundle(g, b), tr.seed_vertex));
  }
}

TEST(ExplorationWalk, IncrementMeans) {
  // Poisson(mu): D* - 1 is Poisson(mu) again, so the first percolated increment has mean tau mu - 1.
  const auto d = DegreeDistribution::poisson(3);
  const int walks = 20000;
  double first = 0, step = 0;
  int stepped = 0;
  for (int i = 0; i < walks; ++i) {
    const auto path = exploration_walk(d, WalkMode::Percolated, 0.5, 3, derive_seed(3, i));
    first += static_cast<double>(path[0]);
    if (path[0] > 0) {
      step += static_cast<double>(path[1] - path[0]);
      ++stepped;
    }
    for (std::size_t k = 1; k < path.size(); ++k)
      if (path[k - 1] == 0) ASSERT_EQ(path[k], 0);
  }
  EXPECT_NEAR(first / walks, 1.5, 4 * std::sqrt(1.5 / walks));
  EXPECT_NEAR(step / stepped, 0.5, 4 * std::sqrt(1.5 / stepped));
  const auto graph_walk = exploration_walk(d, WalkMode::Graph, 0.1, 5, 1);
  EXPECT_EQ(graph_walk.size(), 6u);
  EXPECT_THROW(exploration_walk(d, WalkMode::Graph, 0.5, 0, 1), std::invalid_argument);
}

TEST(BranchingMonteCarlo, AgreesWithFixedPoint) {
  for (const auto& pt : default_survival_points()) {
    const auto d = DegreeDistribution::parse(pt.dist);
    const auto mc = bp_survival_mc(d, pt.lambda, pt.rho, 8000, 99, 200, 1000);
    const double q = bp_survival(d, pt.lambda, pt.rho);
    EXPECT_NEAR(mc.estimate, q, 4 * std::max(mc.std_error, 1.0 / 8000)) << pt.dist << " " << pt.lambda;
  }
  EXPECT_THROW(bp_survival_mc(DegreeDistribution::poisson(2), 0.0, 0.0, 10, 1), std::invalid_argument);
}

TEST(CoupledSuite, OrderedInclusionsOnSmallGraphs) {
  std::size_t del_evo = 0, evo_avo = 0, del_ab = 0;
  const std::size_t runs = 200;
  for (std::size_t i = 0; i < runs; ++i) {
    Rng r(derive_seed(4, i));
    EpidemicConfig cfg;
    cfg.lambda = 0.1 + 2.9 * r.uniform();
    cfg.rho = 5.0 * r.uniform();
    const auto g = gen_config_model(150, DegreeDistribution::poisson(4), derive_seed(5, i));
    const auto rep = check_inclusions(run_coupled_suite(g, cfg, CouplingBundle(derive_seed(6, i), cfg.lambda, cfg.rho, 150)));
    del_evo += rep.del_in_evo;
    evo_avo += rep.evo_in_avo;
    del_ab += rep.del_in_ab;
  }
  EXPECT_EQ(del_evo, runs);
  EXPECT_EQ(evo_avo, runs);
  EXPECT_EQ(del_ab, runs);
}

TEST(CoupledSuite, RejectsSirConfigurations) {
  EpidemicConfig cfg;
  cfg.variant = Variant::EvoSIR;
  cfg.gamma = 1.0;
  const HalfEdgeGraph g(2, {{0, 1}});
  EXPECT_THROW(run_coupled_suite(g, cfg, CouplingBundle(1, 1.0, 0.0, 2)), ConfigError);
}

TEST(Subset, Basics) {
  EXPECT_TRUE(is_subset({}, {1, 2}));
  EXPECT_TRUE(is_subset({1, 3}, {1, 2, 3}));
  EXPECT_FALSE(is_subset({1, 4}, {1, 2, 3}));
}
