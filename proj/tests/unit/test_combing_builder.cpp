#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"
#include "loxolab/combing_builder.hpp"
#include "loxolab/errors.hpp"

using namespace loxolab;
using loxolab::testing::data_path;
using loxolab::testing::fixture;

namespace {

// Copy of g without edge `skip`, optionally with one extra edge.
CombingGraph rebuild(const CombingGraph& g, EdgeId skip, std::optional<Edge> extra = std::nullopt) {
  CombingGraph out;
  for (VertexId v = 0; v < static_cast<VertexId>(g.num_vertices()); ++v) out.add_vertex(g.vertex_name(v));
  out.set_initial(g.initial());
  out.alphabet() = g.alphabet();
  for (EdgeId e = 0; e < static_cast<EdgeId>(g.num_edges()); ++e) {
    if (e != skip) out.add_edge(g.edge(e).from, g.edge(e).to, g.edge(e).label);
  }
  if (extra) out.add_edge(extra->from, extra->to, extra->label);
  return out;
}

}  // namespace

TEST(CombingBuilder, EveryFixtureVerifiesToRadiusSix) {
  for (const std::string name : {"p4", "c5_raag", "c5_racg", "f2", "z2_z2_z2", "f2xf3", "s3_free_z"}) {
    const PresentationGraph p = fixture(name);
    const Construction c = is_anticonnected(p.lambda()) && p.num_vertices() >= 2 ? Construction::Recurrent
                                                                                  : Construction::HermillerMeier;
    const CombingBuild b = build_combing(p, {c, std::nullopt});
    const CombingCertificate cert = verify_combing(b.combing.graph, b.presentation, 6);
    EXPECT_TRUE(cert.passed) << name << ": " << cert.failure << " " << cert.witness;
    EXPECT_EQ(cert.sphere_sizes, cert.oracle_sizes) << name;
  }
}

TEST(CombingBuilder, HermillerMeierGraphAlsoVerifies) {
  for (const std::string name : {"p4", "c5_racg", "f2"}) {
    const PresentationGraph p = fixture(name);
    const CombingBuild b = build_combing(p, {Construction::HermillerMeier, std::nullopt});
    EXPECT_EQ(b.construction, "HM-v1");
    EXPECT_TRUE(verify_combing(b.combing.graph, b.presentation, 6).passed) << name;
  }
}

TEST(CombingBuilder, OrderOverrideIsHonoured) {
  const PresentationGraph p = fixture("p4");
  const CombingBuild b = build_combing(p, {Construction::Recurrent, std::vector<std::string>{"d", "b", "a", "c"}});
  EXPECT_EQ(b.presentation.lambda().name(b.order[0]), "d");
  EXPECT_EQ(b.presentation.lambda().name(b.order[1]), "b");
  EXPECT_TRUE(verify_combing(b.combing.graph, b.presentation, 6).passed);
}

TEST(CombingBuilder, ChooseOrderPromotesFirstNonAdjacentPair) {
  const PresentationGraph p = fixture("p4");
  const std::vector<int> order = choose_order(p.lambda());
  std::vector<std::string> names;
  for (int v : order) names.push_back(p.lambda().name(v));
  EXPECT_EQ(names, (std::vector<std::string>{"a", "c", "b", "d"}));
  const PresentationGraph k3 = make_raag({"x", "y", "z"}, {{"x", "y"}, {"y", "z"}, {"x", "z"}});
  EXPECT_THROW(choose_order(k3.lambda()), ValidationError);
}

TEST(CombingBuilder, Anticonnectedness) {
  EXPECT_TRUE(is_anticonnected(fixture("p4").lambda()));
  EXPECT_TRUE(is_anticonnected(fixture("c5_raag").lambda()));
  EXPECT_FALSE(is_anticonnected(fixture("f2xf3").lambda()));
  EXPECT_THROW(build_racg_recurrent(fixture("f2xf3").lambda(), {0, 1, 2, 3, 4}), ValidationError);
}

TEST(CombingBuilder, AdmissibleTreeWordsAreDistinctGeodesics) {
  const PresentationGraph p = fixture("c5_racg");
  const std::vector<int> order = choose_order(p.lambda());
  std::vector<int> rank(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<int>(i);
  for (int I = 0; I < p.num_vertices(); ++I) {
    for (int J = 0; J < p.num_vertices(); ++J) {
      if (I == J || p.adjacent(I, J) || rank[I] <= rank[J]) continue;
      const AdmissibleTree t = build_admissible_tree(p.lambda(), order, I, J);
      EXPECT_EQ(t.label[0], I);
      EXPECT_EQ(t.label[1], J);
      GPElementSet seen;
      for (const auto& w : t.words()) {
        std::vector<int> gens;
        for (int v : w) gens.push_back(p.generators_of(v)[0]);
        const GPElement g = evaluate_word(p, gens);
        EXPECT_EQ(word_length(p, g), static_cast<std::int64_t>(w.size()));
        EXPECT_TRUE(seen.insert(g).second);
      }
    }
  }
}

TEST(CombingBuilder, FreeGroupLanguage) {
  const CombingBuild b = build_combing(fixture("f2"));
  EXPECT_EQ(language_words(b.combing.graph, 0), (std::vector<std::string>{"<empty>"}));
  const auto one = language_words(b.combing.graph, 1);
  EXPECT_EQ(std::set<std::string>(one.begin(), one.end()), (std::set<std::string>{"a", "a^-1", "b", "b^-1"}));
  const auto two = language_words(b.combing.graph, 2);
  EXPECT_EQ(two.size(), 12u);
  EXPECT_EQ(std::count(two.begin(), two.end(), "a a^-1"), 0);
}

TEST(CombingBuilder, FlagsAndSidecar) {
  const CombingBuild b = build_combing(fixture("p4"));
  EXPECT_EQ(b.construction, "HM-recurrent-v1");
  EXPECT_NE(std::find(b.flags.begin(), b.flags.end(), "thick"), b.flags.end());
  EXPECT_NE(std::find(b.flags.begin(), b.flags.end(), "aperiodic"), b.flags.end());
  const nlohmann::json meta = sidecar_json(b);
  EXPECT_EQ(presentation_from_json(meta.at("presentation")).to_json(), b.presentation.to_json());
  EXPECT_EQ(meta.at("period"), 1);

  const CombingBuild prod = build_combing(fixture("f2xf3"), {Construction::HermillerMeier, std::nullopt});
  EXPECT_EQ(std::find(prod.flags.begin(), prod.flags.end(), "irreducible"), prod.flags.end());
}

TEST(CombingBuilder, HandWrittenShortLexCombingVerifies) {
  const CombingGraph g = load_combing_graph(data_path("f2_handwritten.combing.json"));
  const CombingCertificate cert = verify_combing(g, fixture("f2"), 8);
  EXPECT_TRUE(cert.passed) << cert.failure;
}

TEST(CombingBuilder, CorruptedAutomataAreRejected) {
  const PresentationGraph p = fixture("p4");
  const CombingBuild b = build_combing(p);
  const CombingGraph& g = b.combing.graph;

  // Dropping an edge (keeping every vertex reachable) loses sphere elements.
  bool dropped = false;
  for (EdgeId e = 0; e < static_cast<EdgeId>(g.num_edges()) && !dropped; ++e) {
    const CombingGraph h = rebuild(g, e);
    if (!validate(h).valid()) continue;
    const CombingCertificate cert = verify_combing(h, b.presentation, 5);
    EXPECT_FALSE(cert.passed);
    EXPECT_EQ(cert.failure, "image mismatch");
    dropped = true;
  }
  EXPECT_TRUE(dropped);

  // An edge back to the initial vertex makes some paths non-geodesic or non-injective.
  const VertexId x = g.edge(g.out_edges(g.initial())[0]).to;
  std::set<LabelId> used;
  for (EdgeId e : g.out_edges(x)) used.insert(g.edge(e).label);
  LabelId spare = 0;
  while (used.contains(spare)) ++spare;
  ASSERT_LT(spare, static_cast<LabelId>(g.alphabet().size()));
  const CombingGraph h = rebuild(g, -1, Edge{x, g.initial(), spare});
  const CombingCertificate cert = verify_combing(h, b.presentation, 5);
  EXPECT_FALSE(cert.passed);
  EXPECT_TRUE(cert.failure == "not geodesic" || cert.failure == "non-injective") << cert.failure;
  EXPECT_FALSE(cert.witness.empty());

  // Labels outside the presentation are reported.
  CombingGraph bad = rebuild(g, -1);
  bad.add_edge(x, x, "zz");
  EXPECT_EQ(verify_combing(bad, b.presentation, 3).failure, "unknown label");
}

TEST(CombingBuilder, VertexGroupAutomataAreBijective) {
  const PresentationGraph p = fixture("s3_free_z");
  const CombingGraph s3 = vertex_group_automaton(p, 0);
  std::uint64_t total = 0;
  for (int n = 0; n <= 4; ++n) total += enumerate_paths(s3, n).size();
  EXPECT_EQ(total, 6u);
  const CombingGraph z = vertex_group_automaton(p, 1);
  EXPECT_EQ(enumerate_paths(z, 5).size(), 2u);
}
