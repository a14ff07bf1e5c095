#pragma once

// Exact arithmetic in graph products G(Lambda) of Z and finite vertex groups.
// Elements are kept in a canonical syllable normal form, which makes this
// module the combing-independent oracle for equality and word length.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "loxolab/graph_core.hpp"

namespace loxolab {

/// Simple undirected graph on named vertices (no loops, no multi-edges).
class SimplicialGraph {
 public:
  SimplicialGraph() = default;
  explicit SimplicialGraph(std::vector<std::string> names);

  void add_edge(int u, int v);
  int size() const { return static_cast<int>(names_.size()); }
  bool adjacent(int u, int v) const { return adj_[u][v] != 0; }
  const std::string& name(int v) const { return names_[v]; }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<int> index_of(std::string_view name) const;
  std::size_t num_edges() const;

  SimplicialGraph induced(std::span<const int> vertices) const;
  SimplicialGraph complement() const;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<char>> adj_;
};

class VertexGroup {
 public:
  enum class Kind { Integers, Finite };

  static VertexGroup integers();
  /// Validates associativity, identity, inverses, inverse-closure of the
  /// generator subset and that the generators generate the group.
  static VertexGroup finite(std::vector<std::vector<int>> table, int identity, std::vector<int> generators);
  static VertexGroup cyclic(int order);

  Kind kind() const { return kind_; }
  bool is_integers() const { return kind_ == Kind::Integers; }
  /// Elements are exponents for Z and table indices for finite groups.
  std::int64_t identity() const { return kind_ == Kind::Integers ? 0 : identity_; }
  std::int64_t multiply(std::int64_t a, std::int64_t b) const;
  std::int64_t invert(std::int64_t a) const;
  /// Geodesic length with respect to the declared generators.
  std::int64_t length(std::int64_t a) const;
  bool is_identity(std::int64_t a) const { return a == identity(); }
  bool contains(std::int64_t a) const;

  /// Generator elements (Z: +1, -1).
  std::vector<std::int64_t> generator_elements() const;
  int order() const { return static_cast<int>(table_.size()); }
  const std::vector<std::vector<int>>& table() const { return table_; }
  const std::vector<int>& declared_generators() const { return generators_; }

  /// Is the finite group Z/2 generated by its involution (so its Cayley graph is a tree)?
  bool is_involution_group() const;

 private:
  Kind kind_ = Kind::Integers;
  std::vector<std::vector<int>> table_;
  int identity_ = 0;
  std::vector<int> generators_;
  std::vector<int> inverse_;
  std::vector<std::int64_t> length_;
};

struct Generator {
  int vertex = 0;
  std::int64_t element = 0;
  std::string token;
};

class PresentationGraph {
 public:
  /// `order` lists vertex ids; empty means the order of `lambda`.
  PresentationGraph(SimplicialGraph lambda, std::vector<VertexGroup> groups, std::vector<int> order = {});

  const SimplicialGraph& lambda() const { return lambda_; }
  int num_vertices() const { return lambda_.size(); }
  const VertexGroup& group(int v) const { return groups_[v]; }
  const std::vector<VertexGroup>& groups() const { return groups_; }
  /// Vertex ids in the fixed order used to break ties in the normal form.
  const std::vector<int>& order() const { return order_; }
  int rank(int v) const { return rank_[v]; }
  bool adjacent(int u, int v) const { return lambda_.adjacent(u, v); }

  /// The standard generating set S = union of the vertex generating sets.
  const std::vector<Generator>& generators() const { return generators_; }
  const std::vector<int>& generators_of(int vertex) const { return by_vertex_[vertex]; }
  int generator_index(std::string_view token) const;  // -1 when absent
  int inverse_generator(int gen) const { return inverse_gen_[gen]; }
  Alphabet alphabet() const;

  nlohmann::json to_json() const;

 private:
  SimplicialGraph lambda_;
  std::vector<VertexGroup> groups_;
  std::vector<int> order_;
  std::vector<int> rank_;
  std::vector<Generator> generators_;
  std::vector<std::vector<int>> by_vertex_;
  std::vector<int> inverse_gen_;
  std::unordered_map<std::string, int> token_index_;
};

PresentationGraph presentation_from_json(const nlohmann::json& j);
PresentationGraph load_presentation(const std::string& path);

/// Right-angled Artin / Coxeter groups on a named graph.
PresentationGraph make_raag(const std::vector<std::string>& names,
                            const std::vector<std::pair<std::string, std::string>>& edges);
PresentationGraph make_racg(const std::vector<std::string>& names,
                            const std::vector<std::pair<std::string, std::string>>& edges);

struct Syllable {
  int vertex = 0;
  std::int64_t value = 0;
  friend bool operator==(const Syllable&, const Syllable&) = default;
};

/// Graph-product element in canonical form: reduced (no two syllables on the
/// same vertex can be shuffled together) and lexicographically least, by
/// vertex rank, among all shuffle-equivalent reduced spellings.
class GPElement {
 public:
  GPElement() = default;

  const std::vector<Syllable>& syllables() const { return syllables_; }
  bool is_identity() const { return syllables_.empty(); }
  std::size_t num_syllables() const { return syllables_.size(); }

  friend bool operator==(const GPElement&, const GPElement&) = default;

 private:
  friend GPElement normal_form(const PresentationGraph&, std::span<const Syllable>);
  std::vector<Syllable> syllables_;
};

struct GPElementHash {
  std::size_t operator()(const GPElement& g) const noexcept;
};
using GPElementSet = std::unordered_set<GPElement, GPElementHash>;

/// Canonical form of an arbitrary syllable word (identity syllables allowed).
GPElement normal_form(const PresentationGraph& p, std::span<const Syllable> word);
GPElement multiply(const PresentationGraph& p, const GPElement& a, const GPElement& b);
GPElement invert(const PresentationGraph& p, const GPElement& a);
std::int64_t word_length(const PresentationGraph& p, const GPElement& a);
GPElement generator_element(const PresentationGraph& p, int gen);
/// Product of generators (the evaluation map on a generator word).
GPElement evaluate_word(const PresentationGraph& p, std::span<const int> generators);
/// Right multiplication by one generator.
GPElement times_generator(const PresentationGraph& p, const GPElement& a, int gen);
std::string to_string(const PresentationGraph& p, const GPElement& a);

struct SphereOracle {
  std::vector<std::vector<GPElement>> spheres;  // spheres[n], canonical forms
  std::vector<std::uint64_t> sizes() const;
};

/// Breadth-first search of the Cayley graph of G(Lambda) with respect to S.
SphereOracle bfs_sphere_oracle(const PresentationGraph& p, int n_max, std::uint64_t cap = kDefaultPathCap);

/// All elements of the ball of radius c (c <= 4).
std::vector<GPElement> ball_elements(const PresentationGraph& p, int c, std::uint64_t cap = kDefaultPathCap);

/// Homomorphism G(Lambda) -> G(Lambda') killing every vertex group outside `kept`.
class VertexKillingHom {
 public:
  VertexKillingHom(const PresentationGraph& source, std::vector<int> kept);

  const PresentationGraph& source() const { return *source_; }
  const PresentationGraph& target() const { return target_; }
  /// Target vertex of a source vertex, or -1 when killed.
  int image_vertex(int v) const { return vertex_map_[v]; }
  /// Target generator of a source generator, or -1 when it maps to the identity.
  int image_generator(int gen) const { return gen_map_[gen]; }
  const std::vector<int>& kept() const { return kept_; }

  GPElement apply(const GPElement& g) const;

 private:
  const PresentationGraph* source_;
  std::vector<int> kept_;
  PresentationGraph target_;
  std::vector<int> vertex_map_;
  std::vector<int> gen_map_;
};

/// Kills all vertex groups except a non-adjacent pair; the image is their free product.
VertexKillingHom quotient_to_free(const PresentationGraph& p, int u, int v);

}  // namespace loxolab
