#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "fixtures.hpp"
#include "loxolab/errors.hpp"
#include "loxolab/spectral_markov.hpp"

using namespace loxolab;
using loxolab::testing::fixture;

namespace {

CombingGraph built(const std::string& name) {
  const PresentationGraph p = fixture(name);
  const bool rec = p.num_vertices() >= 2 && is_anticonnected(p.lambda());
  return build_combing(p, {rec ? Construction::Recurrent : Construction::HermillerMeier, std::nullopt}).combing.graph;
}

const std::vector<std::string> kFixtures = {"p4", "c5_raag", "c5_racg", "f2", "z2_z2_z2", "f2xf3", "s3_free_z"};

CombingGraph chain_of_loops(int first, int second) {
  CombingGraph g;
  g.add_vertex("v0");
  g.add_vertex("A");
  g.add_vertex("B");
  const char* t[] = {"a", "b", "c"};
  g.add_edge(0, 1, "x");
  for (int i = 0; i < first; ++i) g.add_edge(1, 1, t[i]);
  g.add_edge(1, 2, "y");
  for (int i = 0; i < second; ++i) g.add_edge(2, 2, t[i]);
  return g;
}

}  // namespace

TEST(SpectralMarkov, PerronVectorSolvesEigenEquation) {
  for (const auto& name : kFixtures) {
    const CombingGraph g = built(name);
    const PerronData pd = perron(g);
    EXPECT_LT(pd.residual, 1e-9) << name;
    const GrowthClassification gc = classify_growth(g);
    for (VertexId v = 0; v < static_cast<VertexId>(g.num_vertices()); ++v) {
      if (gc.is_large(v)) {
        EXPECT_GT(pd.rho[v], 0.0) << name;
      } else {
        EXPECT_EQ(pd.rho[v], 0.0) << name;
      }
    }
  }
}

TEST(SpectralMarkov, RowsSumToOne) {
  for (const auto& name : kFixtures) {
    const CombingGraph g = built(name);
    const MarkovChain chain = build_markov(g, perron(g));
    EXPECT_LE(chain.row_sum_max_dev, 1e-9) << name;
  }
}

TEST(SpectralMarkov, FreeGroupChainIsNonBacktracking) {
  const CombingGraph g = built("f2");
  const MarkovChain chain = build_markov(g, perron(g));
  for (EdgeId e = 0; e < static_cast<EdgeId>(g.num_edges()); ++e) {
    const double expect = g.edge(e).from == g.initial() ? 0.25 : 1.0 / 3.0;
    EXPECT_NEAR(chain.mu[e], expect, 1e-12);
  }
}

TEST(SpectralMarkov, PathProbabilitiesSumToOne) {
  const CombingGraph g = built("p4");
  const MarkovChain chain = build_markov(g, perron(g));
  for (int n = 1; n <= 5; ++n) {
    double total = 0.0;
    for_each_path(g, g.initial(), n, [&](std::span<const EdgeId> e, VertexId) { total += path_probability(g, chain, e); });
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(SpectralMarkov, SampledPathsFollowTheChain) {
  const CombingGraph g = built("c5_racg");
  const MarkovChain chain = build_markov(g, perron(g));
  const int n = 3, draws = 200000;
  std::map<std::vector<EdgeId>, int> hist;
  Rng rng(77);
  for (int i = 0; i < draws; ++i) ++hist[sample_markov_path(g, chain, n, rng).edges];
  for (const auto& p : enumerate_paths(g, n)) {
    const double prob = path_probability(g, chain, p.edges);
    const double sd = std::sqrt(prob * (1 - prob) / draws);
    EXPECT_NEAR(static_cast<double>(hist[p.edges]) / draws, prob, 5 * sd + 1e-12);
  }
  EXPECT_EQ(sample_markov_path(g, chain, 20, 5), sample_markov_path(g, chain, 20, 5));
}

TEST(SpectralMarkov, FirstReturnMatchesPrimitiveLoops) {
  for (const std::string name : {"f2", "p4", "c5_racg"}) {
    const CombingGraph g = built(name);
    const MarkovChain chain = build_markov(g, perron(g));
    const GrowthClassification gc = classify_growth(g);
    VertexId v = 0;
    while (!gc.is_maximal(v)) ++v;
    const FirstReturnStats st = first_return_stats(g, chain, v, 2000, 3, 12);
    for (int n = 1; n <= 6; ++n) {
      double mass = 0.0;
      for (const auto& loop : loop_paths(g, v, n, true)) mass += path_probability(g, chain, loop.edges);
      EXPECT_NEAR(st.exact[n], mass, 1e-12) << name << " n=" << n;
    }
    EXPECT_LE(st.exact_mass, 1.0 + 1e-12);
  }
}

TEST(SpectralMarkov, FreeGroupReturnTail) {
  const CombingGraph g = built("f2");
  const MarkovChain chain = build_markov(g, perron(g));
  const VertexId a = g.edge(g.out_edges(g.initial())[0]).to;
  const FirstReturnStats st = first_return_stats(g, chain, a, 20000, 9);
  EXPECT_NEAR(st.exact[1], 1.0 / 3.0, 1e-12);
  const double sd = std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / 20000);
  EXPECT_NEAR(st.empirical(1), 1.0 / 3.0, 4 * sd);
  EXPECT_LT(st.tail.slope, 0.0);
  EXPECT_THROW(first_return_stats(g, chain, g.initial(), 10, 1), ValidationError);
}

TEST(SpectralMarkov, GrowthConstants) {
  {
    const CombingGraph g = built("f2");
    const GrowthConstant c = growth_constant(g, perron(g), 30, 40);
    ASSERT_TRUE(c.integer_lambda);
    EXPECT_EQ(*c.integer_lambda, 3);
    ASSERT_TRUE(c.exact_C);
    EXPECT_EQ(*c.exact_C, Rational(4, 3));
  }
  {
    const CombingGraph g = built("z2_z2_z2");
    const GrowthConstant c = growth_constant(g, perron(g), 30, 40);
    ASSERT_TRUE(c.exact_C);
    EXPECT_EQ(*c.exact_C, Rational(3, 2));
  }
  {
    const CombingGraph g = built("p4");
    const GrowthConstant c = growth_constant(g, perron(g), 30, 40);
    EXPECT_EQ(c.integer_lambda, std::optional<std::int64_t>(5));
    EXPECT_NEAR(c.C, 1.8, 1e-9);
    EXPECT_LT(std::abs(c.ratio.back() - c.ratio.front()) / c.ratio.front(), 1e-3);
  }
  {
    const CombingGraph g = built("c5_racg");
    const GrowthConstant c = growth_constant(g, perron(g), 30, 40);
    EXPECT_FALSE(c.integer_lambda);
    EXPECT_NEAR(c.lambda, (3 + std::sqrt(5.0)) / 2, 1e-9);
  }
}

TEST(SpectralMarkov, PeriodicGrowthSplitsIntoResidues) {
  CombingGraph g;
  g.add_vertex("v0");
  g.add_vertex("A");
  g.add_vertex("B");
  g.add_edge(0, 1, "x");
  g.add_edge(1, 2, "a");
  g.add_edge(1, 2, "b");
  g.add_edge(2, 1, "c");
  const PerronData pd = perron(g);
  EXPECT_NEAR(pd.lambda, std::sqrt(2.0), 1e-12);
  const GrowthConstant c = growth_constant(g, pd, 20, 30);
  EXPECT_EQ(c.period, 2);
  ASSERT_EQ(c.subsequence_C.size(), 2u);
  EXPECT_GT(std::abs(c.subsequence_C[0] - c.subsequence_C[1]), 1e-3);
}

TEST(SpectralMarkov, RejectsStructuresOutsideScope) {
  EXPECT_THROW(perron(chain_of_loops(2, 2)), ValidationError);  // two maximal components in series
  EXPECT_NO_THROW(perron(chain_of_loops(2, 1)));
  EXPECT_THROW(perron(chain_of_loops(1, 1)), ValidationError);  // polynomial growth
}

TEST(SpectralMarkov, SmallVerticesAreAbsorbing) {
  const CombingGraph g = chain_of_loops(3, 2);
  const PerronData pd = perron(g);
  const MarkovChain chain = build_markov(g, pd);
  EXPECT_TRUE(chain.absorbing[2]);
  EXPECT_EQ(pd.rho[2], 0.0);
  for (int i = 0; i < 50; ++i) {
    const GraphPath p = sample_markov_path(g, chain, 10, static_cast<std::uint64_t>(i));
    EXPECT_EQ(p.end(g), 1);
  }
  EXPECT_EQ(recurrent_components(g, chain).size(), 1u);
}

TEST(SpectralMarkov, TailFitRecoversGeometricRate) {
  std::vector<double> p(40);
  for (int n = 0; n < 40; ++n) p[n] = 0.5 * std::pow(0.25, n);
  const TailFit f = fit_log_tail(p, 5, 30);
  EXPECT_NEAR(f.slope, std::log(0.25), 1e-9);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

TEST(SpectralMarkov, PredicateBatteryAndComparison) {
  const CombingGraph g = built("f2");
  const auto battery = predicate_battery(g);
  EXPECT_EQ(battery.size(), 20u);
  std::set<std::string> names;
  for (const auto& b : battery) names.insert(b.name);
  EXPECT_EQ(names.size(), 20u);
  const MarkovChain chain = build_markov(g, perron(g));
  const MeasureComparison mc = compare_counting_markov(g, chain, battery, 6);
  EXPECT_TRUE(std::isfinite(mc.fitted_c));
  EXPECT_GE(mc.fitted_c, 1.0);
  // For the free group both measures are uniform on spheres.
  for (std::size_t k = 0; k < battery.size(); ++k) {
    for (int n = 0; n <= 6; ++n) EXPECT_NEAR(mc.counting[k][n], mc.markov[k][n], 1e-12);
  }
}

TEST(SpectralMarkov, ReportHasTheDocumentedFields) {
  const nlohmann::json j = spectral_report(built("f2"), 30, 40, 2000, 1);
  for (const char* key : {"lambda", "rho", "C_window", "C", "row_sum_max_dev", "return_tail"}) EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j.at("C_exact"), "4/3");
}
