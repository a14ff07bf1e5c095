#pragma once

// Finite directed graph structures (G, Gamma): an initial vertex, edges labelled
// by generator tokens, and the path combinatorics built on top of them
// (exact sphere counts, enumeration, uniform sampling, growth classification).

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "loxolab/numeric.hpp"
#include "loxolab/rng.hpp"

namespace loxolab {

using VertexId = std::int32_t;
using EdgeId = std::int32_t;
using LabelId = std::int32_t;

inline constexpr std::uint64_t kDefaultPathCap = 10'000'000;
inline constexpr int kMaxHorizon = 1 << 20;

/// Generator tokens with an involution token <-> inverse token.
class Alphabet {
 public:
  LabelId add(std::string token);
  /// Declares a and b mutually inverse (a == b for involutions).
  void set_inverse(LabelId a, LabelId b);

  LabelId find(std::string_view token) const;  // -1 when absent
  LabelId inverse(LabelId id) const { return inverse_[id]; }
  const std::string& token(LabelId id) const { return tokens_[id]; }
  std::size_t size() const { return tokens_.size(); }

  /// Pairs every "x" with "x^-1" when both exist; remaining tokens become involutions.
  void infer_inverses_from_suffix();

  friend bool operator==(const Alphabet&, const Alphabet&) = default;

 private:
  std::vector<std::string> tokens_;
  std::vector<LabelId> inverse_;
  std::unordered_map<std::string, LabelId> index_;
};

struct Edge {
  VertexId from = 0;
  VertexId to = 0;
  LabelId label = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

class CombingGraph {
 public:
  VertexId add_vertex(std::string name);
  EdgeId add_edge(VertexId from, VertexId to, LabelId label);
  /// Adds the token to the alphabet if needed.
  EdgeId add_edge(VertexId from, VertexId to, std::string_view token);

  void set_initial(VertexId v) { initial_ = v; }
  VertexId initial() const { return initial_; }

  std::size_t num_vertices() const { return names_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  const Edge& edge(EdgeId e) const { return edges_[e]; }
  const std::vector<Edge>& edges() const { return edges_; }
  /// Out-edges in insertion order; this is the "lexicographic edge order" of paths.
  const std::vector<EdgeId>& out_edges(VertexId v) const { return out_[v]; }
  const std::string& vertex_name(VertexId v) const { return names_[v]; }
  std::optional<VertexId> find_vertex(std::string_view name) const;

  /// Target of the out-edge of `v` labelled `label`, if any.
  std::optional<VertexId> follow(VertexId v, LabelId label) const;

  Alphabet& alphabet() { return alphabet_; }
  const Alphabet& alphabet() const { return alphabet_; }

  friend bool operator==(const CombingGraph& a, const CombingGraph& b) {
    return a.names_ == b.names_ && a.edges_ == b.edges_ && a.initial_ == b.initial_ &&
           a.alphabet_ == b.alphabet_;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, VertexId> name_index_;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeId>> out_;
  VertexId initial_ = 0;
  Alphabet alphabet_;
};

/// Path given by its start vertex and edge sequence; length = edges.size().
struct GraphPath {
  VertexId start = 0;
  std::vector<EdgeId> edges;

  std::size_t length() const { return edges.size(); }
  VertexId end(const CombingGraph& g) const {
    return edges.empty() ? start : g.edge(edges.back()).to;
  }
  friend bool operator==(const GraphPath&, const GraphPath&) = default;
};

std::vector<LabelId> labels_of(const CombingGraph& g, std::span<const EdgeId> edges);
std::string spell(const CombingGraph& g, std::span<const EdgeId> edges);

// ---------------------------------------------------------------------------
// Validation

struct ValidationReport {
  std::vector<VertexId> unreachable;
  /// (vertex, label) pairs occurring on more than one out-edge.
  std::vector<std::pair<VertexId, LabelId>> duplicate_labels;
  /// Informational: edges whose target is the initial vertex.
  std::vector<EdgeId> edges_into_initial;
  bool initial_in_range = true;

  bool valid() const { return initial_in_range && unreachable.empty() && duplicate_labels.empty(); }
  std::string summary(const CombingGraph& g) const;
};

ValidationReport validate(const CombingGraph& graph);
/// Throws ValidationError with the report summary when the graph is invalid.
void require_valid(const CombingGraph& graph);

// ---------------------------------------------------------------------------
// Counting

/// N[v][n] = number of length-n paths starting at v, for n in [0, horizon].
class PathCountTable {
 public:
  PathCountTable() = default;
  PathCountTable(std::size_t vertices, int horizon, VertexId initial);

  int horizon() const { return horizon_; }
  VertexId initial() const { return initial_; }
  const BigInt& at(VertexId v, int n) const { return counts_[static_cast<std::size_t>(n) * stride_ + v]; }
  BigInt& at(VertexId v, int n) { return counts_[static_cast<std::size_t>(n) * stride_ + v]; }
  const BigInt& sphere(int n) const { return at(initial_, n); }
  /// #B_n = sum_{k <= n} #S_k.
  BigInt ball(int n) const;

 private:
  std::size_t stride_ = 0;
  int horizon_ = -1;
  VertexId initial_ = 0;
  std::vector<BigInt> counts_;
};

/// Exact path counts up to `horizon` (< 2^20). Requires a valid graph.
PathCountTable count_spheres(const CombingGraph& graph, int horizon);

/// Counts length-n paths from the initial vertex whose label sequence is accepted
/// by a finite monitor: state' = step(state, label); a path counts when
/// accept(final state). States are in [0, num_states). Used for exact DP over
/// label-recognizable predicates.
struct LabelMonitor {
  int num_states = 1;
  int initial_state = 0;
  std::function<int(int state, LabelId label)> step;
  std::function<bool(int state)> accept;
};
std::vector<BigInt> count_with_monitor(const CombingGraph& graph, const LabelMonitor& monitor,
                                       int horizon);

// ---------------------------------------------------------------------------
// Enumeration and sampling

using PathVisitor = std::function<void(std::span<const EdgeId> edges, VertexId end)>;

/// Visits every length-n path from `start` in lexicographic edge order.
/// Throws CapExceededError when the number of such paths exceeds `cap`.
void for_each_path(const CombingGraph& graph, VertexId start, int n, const PathVisitor& visit,
                   std::uint64_t cap = kDefaultPathCap);

std::vector<GraphPath> enumerate_paths(const CombingGraph& graph, int n,
                                       std::uint64_t cap = kDefaultPathCap);

/// Exactly uniform sampler over S_n: draws the rank of the path and unranks it
/// through the count table.
class UniformPathSampler {
 public:
  UniformPathSampler(const CombingGraph& graph, int horizon);

  GraphPath sample(int n, Rng& rng) const;
  /// The path of index `rank` in lexicographic edge order among S_n.
  GraphPath unrank(int n, BigInt rank) const;
  const PathCountTable& table() const { return table_; }

 private:
  const CombingGraph* graph_;
  PathCountTable table_;
};

GraphPath sample_uniform_path(const CombingGraph& graph, int n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Growth classification

enum class GrowthClass { Small, Large, Maximal };

struct GrowthClassification {
  std::vector<int> scc_of;                      // per vertex
  int num_scc = 0;
  std::vector<std::vector<VertexId>> members;   // per scc
  std::vector<std::vector<int>> condensation;   // scc -> successor sccs (deduplicated)
  std::vector<int> topo_order;                  // sccs, sources first
  std::vector<bool> nontrivial;                 // contains a cycle
  std::vector<double> radius;                   // spectral radius of the scc submatrix
  std::vector<bool> maximal;                    // radius within 1e-9 (relative) of lambda
  std::vector<GrowthClass> vertex_class;
  double lambda = 0.0;
  /// lambda > 1; otherwise the graph is not an almost semisimple candidate.
  bool almost_semisimple_candidate = false;

  bool is_large(VertexId v) const { return vertex_class[v] != GrowthClass::Small; }
  bool is_maximal(VertexId v) const { return vertex_class[v] == GrowthClass::Maximal; }
};

GrowthClassification classify_growth(const CombingGraph& graph);

/// Spectral radius of a nonnegative irreducible integer matrix (dense, row-major
/// counts) by averaged power iteration with Collatz-Wielandt bounds.
struct RadiusEstimate {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  int iterations = 0;
};
RadiusEstimate irreducible_spectral_radius(const std::vector<std::vector<double>>& matrix,
                                           double rel_tol = 1e-13, int max_iter = 100000);

/// Period of the subgraph induced on `vertices` (assumed strongly connected):
/// gcd of all cycle lengths, 0 if it has no cycle.
int period_of_component(const CombingGraph& graph, std::span<const VertexId> vertices);

// ---------------------------------------------------------------------------
// Measures and loops

using PathPredicate = std::function<bool(std::span<const EdgeId> edges, VertexId end)>;

struct MeasureResult {
  bool exact = true;
  Rational value = 0;          // exact mode
  double estimate = 0.0;       // both modes (exact mode: value as double)
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t samples = 0;   // sampling mode
  std::uint64_t seed = 0;
};

struct MeasureOptions {
  std::uint64_t exact_cap = kDefaultPathCap;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 1;
};

/// P^n(A) for the counting measure on S_n: exact by enumeration when #S_n fits
/// the cap, otherwise a Monte Carlo estimate with a 99% Wilson interval.
MeasureResult counting_measure(const CombingGraph& graph, int n, const PathPredicate& predicate,
                               const MeasureOptions& options = {});

struct WilsonInterval {
  double low;
  double high;
};
WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 2.5758293035489004);

/// All length-n paths from v back to v; `primitive` drops loops that revisit v early.
std::vector<GraphPath> loop_paths(const CombingGraph& graph, VertexId v, int n, bool primitive = false,
                                  std::uint64_t cap = kDefaultPathCap);
/// Exact number of length-n loops at v (all, or primitive) for n in [0, horizon].
std::vector<BigInt> count_loops(const CombingGraph& graph, VertexId v, int horizon, bool primitive = false);

struct ComponentCertificate {
  bool single_nontrivial = false;
  int nontrivial_count = 0;
  std::optional<int> witness_scc;
  /// Set when single_nontrivial: such a structure is thick.
  bool thick = false;
};
ComponentCertificate single_nontrivial_component_certificate(const CombingGraph& graph);

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const CombingGraph& graph);
CombingGraph combing_graph_from_json(const nlohmann::json& j);
CombingGraph load_combing_graph(const std::string& path);
void save_combing_graph(const CombingGraph& graph, const std::string& path);

}  // namespace loxolab
