#include <gtest/gtest.h>

#include <cstdlib>

#include "fixtures.hpp"
#include "loxolab/errors.hpp"
#include "loxolab/experiments.hpp"

using namespace loxolab;
using loxolab::testing::data_path;
using nlohmann::json;

namespace {

ExperimentConfig config(json j) {
  return ExperimentConfig::from_json(j, std::string(LOXOLAB_DATA_DIR));
}

Rational exact(const Report& r, const std::string& stat, int n) {
  const ReportRow* row = r.find(stat, n);
  EXPECT_NE(row, nullptr) << stat << " n=" << n;
  EXPECT_EQ(row->mode, "exact");
  const auto slash = row->value.find('/');
  if (slash == std::string::npos) return Rational(BigInt(row->value));
  return Rational(BigInt(row->value.substr(0, slash)), BigInt(row->value.substr(slash + 1)));
}

}  // namespace

TEST(Experiments, ConfigValidation) {
  EXPECT_THROW(config({{"n", {1}}}), ConfigError);
  EXPECT_THROW(config({{"presentation", "f2.json"}, {"bogus", 1}}), ConfigError);
  EXPECT_THROW(config({{"presentation", "f2.json"}, {"n", json::array()}}), ConfigError);
  EXPECT_THROW(config({{"presentation", "missing.json"}}), ConfigError);
  EXPECT_THROW(config({{"presentation", "f2.json"}, {"region", "disc"}}), ConfigError);
  EXPECT_THROW(config({{"presentation", "f2.json"}, {"n", "seven"}}), ConfigError);
  const ExperimentConfig c = config({{"presentation", "f2.json"}, {"n", {{"min", 2}, {"max", 10}, {"step", 4}}}});
  EXPECT_EQ(c.n_values, (std::vector<int>{2, 6, 10}));
  ExperimentConfig d = c;
  EXPECT_EQ(c.hash(), d.hash());
  d.seed = 2;
  EXPECT_NE(c.hash(), d.hash());
  EXPECT_EQ(ExperimentConfig::from_json(c.to_json()).to_json(), c.to_json());
  EXPECT_THROW(run_experiment("no-such-experiment", c), ConfigError);
}

TEST(Experiments, ActionIsRequiredForNonFreeGroups) {
  EXPECT_THROW(exp_displacement(config({{"presentation", "p4.json"}, {"n", {4}}})), ConfigError);
  EXPECT_NO_THROW(exp_subgroup_density(config({{"presentation", "p4.json"}, {"subgroup", {"a"}}, {"n", {4}}})));
}

TEST(Experiments, ReportsAreDeterministicAcrossRunsAndThreadCounts) {
  const ExperimentConfig c = config({{"presentation", "p4.json"},
                                     {"action", "p4_quotient_ad.action.json"},
                                     {"n", {6, 14}},
                                     {"samples", 20000},
                                     {"drift_paths", 2000},
                                     {"seed", 42}});
  const std::string first = exp_translation_genericity(c).to_csv();
  EXPECT_EQ(first, exp_translation_genericity(c).to_csv());
  setenv("LOXOLAB_THREADS", "1", 1);
  const std::string single = exp_translation_genericity(c).to_csv();
  unsetenv("LOXOLAB_THREADS");
  EXPECT_EQ(first, single);
  ExperimentConfig other = c;
  other.seed = 43;
  EXPECT_NE(first, exp_translation_genericity(other).to_csv());
}

TEST(Experiments, CsvSchema) {
  const Report r = exp_subgroup_density(config({{"presentation", "f2.json"}, {"subgroup", {"a"}}, {"n", {3}}}));
  const std::string csv = r.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "experiment,n,statistic,value,ci_low,ci_high,mode,seed,config_hash");
  EXPECT_NE(csv.find("subgroup-density,3,density_ball,7/53,7/53,7/53,exact,0,"), std::string::npos);
}

TEST(Experiments, SampledFractionsCoverExactValues) {
  const ExperimentContext ctx = ExperimentContext::create(config({{"presentation", "p4.json"}, {"action", "p4_quotient_ad.action.json"}}));
  const PathEvents lox = [&](std::span<const EdgeId> e, VertexId, std::vector<char>& h) {
    h[0] = translation_length_exact_tree(ctx.action->space(), ctx.image(e)) > 0;
  };
  for (bool ball : {false, true}) {
    const auto ex = measure_fractions(ctx.combing, 6, 1, lox, ball, kDefaultPathCap, 0, 1, 0);
    ASSERT_TRUE(ex[0].exact);
    const auto mc = measure_fractions(ctx.combing, 6, 1, lox, ball, 10, 40000, 1, 0);
    ASSERT_FALSE(mc[0].exact);
    EXPECT_LE(mc[0].ci_low, to_double(ex[0].value));
    EXPECT_GE(mc[0].ci_high, to_double(ex[0].value));
  }
}

TEST(Experiments, ProductLoxodromicFractionOnSpheres) {
  const ExperimentConfig c = config({{"presentation", "f2xf3.json"},
                                     {"action", "f2xf3_factor.action.json"},
                                     {"n", {1, 2, 3, 4, 5, 6}},
                                     {"L_hat", 1.0}});
  const Report r = exp_translation_genericity(c);
  EXPECT_EQ(exact(r, "frac_loxodromic", 2), Rational(36, 66));
  // Oracle: enumerate the sphere and cyclically reduce every image.
  const ExperimentContext ctx = ExperimentContext::create(c);
  for (int n = 1; n <= 6; ++n) {
    std::uint64_t lox = 0, total = 0;
    for_each_path(ctx.combing, ctx.combing.initial(), n, [&](std::span<const EdgeId> e, VertexId) {
      ++total;
      lox += translation_length_exact_tree(ctx.action->space(), ctx.image(e)) > 0 ? 1 : 0;
    });
    EXPECT_EQ(exact(r, "frac_loxodromic", n), Rational(BigInt(lox), BigInt(total))) << n;
  }
}

TEST(Experiments, FreeGroupOnItsTree) {
  const ExperimentConfig c = config({{"presentation", "f2.json"}, {"n", {4, 8}}, {"drift_paths", 500}, {"drift_n", 50}});
  const Report d = exp_displacement(c);
  EXPECT_EQ(d.number("L_hat"), 1.0);
  EXPECT_EQ(exact(d, "frac_displacement_ge_threshold", 4), 1);
  EXPECT_EQ(exact(d, "frac_displacement_ge_threshold", 8), 1);
  const Report drift = exp_drift(c);
  EXPECT_EQ(drift.number("L_hat"), 1.0);
  const Report g = exp_gromov_products(c);
  EXPECT_EQ(exact(g, "frac_i_g_equals_half_length", 8), 1);
  const Report t = exp_translation_genericity(c);
  EXPECT_EQ(exact(t, "frac_loxodromic", 8), 1);  // every nontrivial element of a free group is loxodromic
}

TEST(Experiments, ProductDisplacementNegativeControl) {
  const Report r = exp_displacement(config({{"presentation", "f2xf3.json"},
                                            {"action", "f2xf3_factor.action.json"},
                                            {"n", {3, 5, 7}},
                                            {"L_hat", 1.0},
                                            {"epsilon", 0.1}}));
  EXPECT_GT(exact(r, "frac_displacement_ge_threshold", 3), exact(r, "frac_displacement_ge_threshold", 5));
  EXPECT_GT(exact(r, "frac_displacement_ge_threshold", 5), exact(r, "frac_displacement_ge_threshold", 7));
}

TEST(Experiments, TrivialActionIsNeverLoxodromic) {
  const Report r = exp_markov_genericity(config({{"presentation", "f2.json"},
                                                 {"action", "f2_trivial.action.json"},
                                                 {"n", {10, 30}},
                                                 {"samples", 2000},
                                                 {"drift_paths", 200},
                                                 {"L_hat", 0.0}}));
  EXPECT_EQ(r.number("P_loxodromic", 10), 0.0);
  EXPECT_EQ(r.number("P_loxodromic", 30), 0.0);
}

TEST(Experiments, SubgroupDensities) {
  const Report f2 = exp_subgroup_density(config({{"presentation", "f2.json"}, {"subgroup", {"a"}}, {"n", {1, 2, 3, 4}}}));
  for (int n = 1; n <= 4; ++n) {
    const BigInt ball = 2 * boost::multiprecision::pow(BigInt(3), n) - 1;
    EXPECT_EQ(exact(f2, "density_ball", n), Rational(BigInt(2 * n + 1), ball));
  }
  EXPECT_THROW(exp_subgroup_density(config({{"presentation", "f2.json"}, {"subgroup", {"z"}}})), ConfigError);
}

TEST(Experiments, ShadowProfilesDecay) {
  const Report r = exp_shadow_decay(config({{"presentation", "f2.json"}, {"n", {7}}, {"samples", 2000}}));
  EXPECT_EQ(r.find("monotone_in_r", 7)->value, "1");
  EXPECT_EQ(exact(r, "P_shadow_r0", 7), 1);
  for (int k = 1; k < 6; ++k) {
    EXPECT_LE(2 * exact(r, "P_shadow_r" + std::to_string(k + 1), 7), exact(r, "P_shadow_r" + std::to_string(k), 7));
  }
}

TEST(Experiments, Quasitightness) {
  const Report id = exp_quasitightness(config({{"presentation", "f2.json"}, {"word", ""}, {"c", 0}, {"n", {3, 6}}}));
  EXPECT_EQ(exact(id, "P_avoiding", 3), 0);
  EXPECT_EQ(exact(id, "P_avoiding", 6), 0);
  const Report ab = exp_quasitightness(config({{"presentation", "f2.json"}, {"word", "a b"}, {"c", 0}, {"n", {3, 6, 9}}}));
  EXPECT_GT(exact(ab, "P_avoiding", 3), exact(ab, "P_avoiding", 6));
  EXPECT_GT(exact(ab, "P_avoiding", 6), exact(ab, "P_avoiding", 9));
  // Oracle: a path avoids "a b" when no two consecutive letters spell it.
  const ExperimentContext ctx = ExperimentContext::create(config({{"presentation", "f2.json"}}));
  std::uint64_t avoid = 0, total = 0;
  for_each_path(ctx.combing, ctx.combing.initial(), 6, [&](std::span<const EdgeId> e, VertexId) {
    const std::string w = " " + spell(ctx.combing, e) + " ";
    ++total;
    avoid += w.find(" a b ") == std::string::npos ? 1 : 0;
  });
  EXPECT_EQ(exact(ab, "P_avoiding", 6), Rational(BigInt(avoid), BigInt(total)));
}

TEST(Experiments, ExactGrowthReport) {
  const Report r = exp_exact_growth(config({{"presentation", "z2_z2_z2.json"}, {"window", {10, 14}}, {"verify_nmax", 6}}));
  EXPECT_EQ(r.find("C_exact")->value, "3/2");
  EXPECT_EQ(r.find("verify_passed")->value, "1");
  EXPECT_EQ(exact(r, "Sn", 10), 3 * 512);
}
