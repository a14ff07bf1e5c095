#pragma once

// Geodesic combings of graph products: the Hermiller-Meier automaton for the
// right-angled Coxeter group C(Lambda), its recurrent modification, and the
// expansion that substitutes a combing of each vertex group.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "loxolab/graph_core.hpp"
#include "loxolab/group_kernel.hpp"

namespace loxolab {

bool is_anticonnected(const SimplicialGraph& lambda);

/// Promotes the first non-adjacent pair (in input order) to the front; all
/// other vertices keep their relative order. Throws ValidationError when
/// Lambda is complete.
std::vector<int> choose_order(const SimplicialGraph& lambda, const std::vector<int>& input_order);
std::vector<int> choose_order(const SimplicialGraph& lambda);

/// A CombingGraph whose vertices carry a Lambda-vertex type (-1 for the initial
/// vertex and for anything untyped) and, after expansion, a vertex-group state.
struct TypedAutomaton {
  CombingGraph graph;
  std::vector<int> type;
  std::vector<int> state;  // vertex-group automaton state, -1 when not expanded
};

struct AdmissibleTree {
  int root_label = 0;  // I
  int first_label = 0; // J
  /// Node labels and parents; node 0 is the root, node 1 its unique child.
  std::vector<int> label;
  std::vector<int> parent;
  std::vector<std::vector<int>> children;

  std::vector<int> word(int node) const;  // labels from the root
  std::vector<std::vector<int>> words() const;
};

/// `rank[v]` = position of v in the order. Requires rank[I] > rank[J] and I, J non-adjacent.
AdmissibleTree build_admissible_tree(const SimplicialGraph& lambda, const std::vector<int>& order, int I, int J);

/// The full Hermiller-Meier graph (header graph plus admissible trees).
/// Labels are the letters (vertex names) of Lambda.
TypedAutomaton build_hm_graph(const SimplicialGraph& lambda, const std::vector<int>& order);

/// The recurrent graph: admissible trees only, with v0 joined into the tree of
/// the first two letters. Throws ValidationError unless Lambda is anticonnected.
TypedAutomaton build_racg_recurrent(const SimplicialGraph& lambda, const std::vector<int>& order);

/// Geodesic bijective combing of one vertex group over its presentation tokens:
/// Z gives v0 with a positive and a negative ray state; finite groups give the
/// ShortLex BFS tree over the declared generators.
CombingGraph vertex_group_automaton(const PresentationGraph& p, int vertex);

/// Replaces every typed vertex of `letters` by a copy of its vertex-group
/// automaton minus the initial vertex.
TypedAutomaton expand_with_vertex_groups(const TypedAutomaton& letters, const PresentationGraph& p);

enum class Construction { Recurrent, HermillerMeier };

struct CombingBuild {
  PresentationGraph presentation;  // carries the chosen order
  std::vector<int> order;
  TypedAutomaton letters;          // letter automaton before expansion
  TypedAutomaton combing;          // the combing of G(Lambda)
  int period = 0;                  // of the combing minus its initial vertex
  std::vector<std::string> flags;
  double lambda_hint = 0.0;
  std::string construction;
};

struct BuildOptions {
  Construction construction = Construction::Recurrent;
  /// Vertex names; when absent the presentation order is used as input order.
  std::optional<std::vector<std::string>> order;
};

CombingBuild build_combing(const PresentationGraph& p, const BuildOptions& options = {});

/// Sidecar metadata: order, lambda_hint, flags, construction, presentation.
nlohmann::json sidecar_json(const CombingBuild& build);

/// Words of length exactly n recognised from the initial vertex, as token strings.
std::vector<std::string> language_words(const CombingGraph& graph, int n, std::uint64_t cap = kDefaultPathCap);

// ---------------------------------------------------------------------------
// Verification against the group oracle

struct CombingCertificate {
  bool passed = true;
  int n_max = 0;
  std::vector<std::uint64_t> sphere_sizes;  // automaton
  std::vector<std::uint64_t> oracle_sizes;
  /// First violation: kind ("non-injective", "not geodesic", "image mismatch",
  /// "unknown label") and the offending path spelled as tokens.
  std::string failure;
  std::string witness;
  int failure_length = -1;

  nlohmann::json to_json() const;
};

/// Checks for each n <= n_max that ev is injective on S_n, that ev(S_n) is the
/// oracle sphere of radius n, and that every path of length <= n_max from v0
/// (and of length <= min(n_max, 5) from any other vertex) evaluates to an
/// element of the same word length.
CombingCertificate verify_combing(const CombingGraph& graph, const PresentationGraph& p, int n_max,
                                  std::uint64_t cap = kDefaultPathCap);

/// Maps combing labels to presentation generator indices (-1 for unknown tokens).
std::vector<int> label_to_generator(const CombingGraph& graph, const PresentationGraph& p);

}  // namespace loxolab
