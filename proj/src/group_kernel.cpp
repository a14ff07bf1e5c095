#include "loxolab/group_kernel.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "loxolab/errors.hpp"
#include "loxolab/rng.hpp"

namespace loxolab {

// ---------------------------------------------------------------------------
// SimplicialGraph

SimplicialGraph::SimplicialGraph(std::vector<std::string> names)
    : names_(std::move(names)), adj_(names_.size(), std::vector<char>(names_.size(), 0)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (names_[i] == names_[j]) throw ValidationError("duplicate vertex name '" + names_[i] + "'");
    }
  }
}

void SimplicialGraph::add_edge(int u, int v) {
  if (u == v) throw ValidationError("graph must not contain loops");
  if (u < 0 || v < 0 || u >= size() || v >= size()) throw std::out_of_range("SimplicialGraph::add_edge");
  if (adj_[u][v]) throw ValidationError("duplicate edge " + names_[u] + "-" + names_[v]);
  adj_[u][v] = adj_[v][u] = 1;
}

std::optional<int> SimplicialGraph::index_of(std::string_view name) const {
  for (int i = 0; i < size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t SimplicialGraph::num_edges() const {
  std::size_t e = 0;
  for (int i = 0; i < size(); ++i) {
    for (int j = i + 1; j < size(); ++j) e += adj_[i][j] ? 1 : 0;
  }
  return e;
}

SimplicialGraph SimplicialGraph::induced(std::span<const int> vertices) const {
  std::vector<std::string> names;
  for (int v : vertices) names.push_back(names_[v]);
  SimplicialGraph g(std::move(names));
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < vertices.size(); ++j) {
      if (adjacent(vertices[i], vertices[j])) g.add_edge(static_cast<int>(i), static_cast<int>(j));
    }
  }
  return g;
}

SimplicialGraph SimplicialGraph::complement() const {
  SimplicialGraph g(names_);
  for (int i = 0; i < size(); ++i) {
    for (int j = i + 1; j < size(); ++j) {
      if (!adjacent(i, j)) g.add_edge(i, j);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// VertexGroup

VertexGroup VertexGroup::integers() { return VertexGroup{}; }

VertexGroup VertexGroup::finite(std::vector<std::vector<int>> table, int identity, std::vector<int> generators) {
  const int n = static_cast<int>(table.size());
  if (n == 0) throw ValidationError("finite group: empty table");
  for (const auto& row : table) {
    if (static_cast<int>(row.size()) != n) throw ValidationError("finite group: table is not square");
    for (int x : row) {
      if (x < 0 || x >= n) throw ValidationError("finite group: table entry out of range");
    }
  }
  if (identity < 0 || identity >= n) throw ValidationError("finite group: identity out of range");
  for (int a = 0; a < n; ++a) {
    if (table[identity][a] != a || table[a][identity] != a) throw ValidationError("finite group: bad identity");
  }
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        if (table[table[a][b]][c] != table[a][table[b][c]]) throw ValidationError("finite group: not associative");
      }
    }
  }
  VertexGroup g;
  g.kind_ = Kind::Finite;
  g.identity_ = identity;
  g.inverse_.assign(n, -1);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (table[a][b] == identity && table[b][a] == identity) g.inverse_[a] = b;
    }
    if (g.inverse_[a] < 0) throw ValidationError("finite group: element without inverse");
  }
  std::vector<bool> is_gen(n, false);
  for (int s : generators) {
    if (s < 0 || s >= n) throw ValidationError("finite group: generator out of range");
    if (s == identity) throw ValidationError("finite group: identity cannot be a generator");
    if (is_gen[s]) throw ValidationError("finite group: repeated generator");
    is_gen[s] = true;
  }
  for (int s : generators) {
    if (!is_gen[g.inverse_[s]]) throw ValidationError("finite group: generators not closed under inverse");
  }
  g.table_ = std::move(table);
  g.generators_ = std::move(generators);
  g.length_.assign(n, -1);
  g.length_[identity] = 0;
  std::deque<int> queue{identity};
  while (!queue.empty()) {
    const int a = queue.front();
    queue.pop_front();
    for (int s : g.generators_) {
      const int b = g.table_[a][s];
      if (g.length_[b] < 0) {
        g.length_[b] = g.length_[a] + 1;
        queue.push_back(b);
      }
    }
  }
  for (int a = 0; a < n; ++a) {
    if (g.length_[a] < 0) throw ValidationError("finite group: generators do not generate the group");
  }
  return g;
}

VertexGroup VertexGroup::cyclic(int order) {
  if (order < 2) throw ValidationError("cyclic group: order must be at least 2");
  std::vector<std::vector<int>> table(order, std::vector<int>(order));
  for (int a = 0; a < order; ++a) {
    for (int b = 0; b < order; ++b) table[a][b] = (a + b) % order;
  }
  std::vector<int> gens{1};
  if (order > 2) gens.push_back(order - 1);
  return finite(std::move(table), 0, std::move(gens));
}

bool VertexGroup::contains(std::int64_t a) const {
  return kind_ == Kind::Integers || (a >= 0 && a < static_cast<std::int64_t>(table_.size()));
}

std::int64_t VertexGroup::multiply(std::int64_t a, std::int64_t b) const {
  if (kind_ == Kind::Integers) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r) || r == std::numeric_limits<std::int64_t>::min()) {
      throw std::overflow_error("Z vertex group: exponent overflow");
    }
    return r;
  }
  if (!contains(a) || !contains(b)) throw std::out_of_range("finite vertex group: element outside table");
  return table_[a][b];
}

std::int64_t VertexGroup::invert(std::int64_t a) const {
  if (kind_ == Kind::Integers) return -a;
  if (!contains(a)) throw std::out_of_range("finite vertex group: element outside table");
  return inverse_[a];
}

std::int64_t VertexGroup::length(std::int64_t a) const {
  if (kind_ == Kind::Integers) return a < 0 ? -a : a;
  if (!contains(a)) throw std::out_of_range("finite vertex group: element outside table");
  return length_[a];
}

std::vector<std::int64_t> VertexGroup::generator_elements() const {
  if (kind_ == Kind::Integers) return {1, -1};
  return {generators_.begin(), generators_.end()};
}

bool VertexGroup::is_involution_group() const {
  return kind_ == Kind::Finite && table_.size() == 2 && generators_.size() == 1;
}

// ---------------------------------------------------------------------------
// PresentationGraph

PresentationGraph::PresentationGraph(SimplicialGraph lambda, std::vector<VertexGroup> groups, std::vector<int> order)
    : lambda_(std::move(lambda)), groups_(std::move(groups)), order_(std::move(order)) {
  const int n = lambda_.size();
  if (static_cast<int>(groups_.size()) != n) throw ValidationError("presentation: one vertex group per vertex");
  if (order_.empty()) {
    for (int v = 0; v < n; ++v) order_.push_back(v);
  }
  if (static_cast<int>(order_.size()) != n) throw ValidationError("presentation: order must list every vertex");
  rank_.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    const int v = order_[i];
    if (v < 0 || v >= n || rank_[v] >= 0) throw ValidationError("presentation: order is not a permutation");
    rank_[v] = i;
  }
  by_vertex_.resize(n);
  for (int v = 0; v < n; ++v) {
    const VertexGroup& g = groups_[v];
    const std::string& name = lambda_.name(v);
    const auto elems = g.generator_elements();
    for (std::int64_t x : elems) {
      std::string token;
      if (g.is_integers()) {
        token = x > 0 ? name : name + "^-1";
      } else if (elems.size() == 1 && g.invert(x) == x) {
        token = name;
      } else {
        token = name + "[" + std::to_string(x) + "]";
      }
      by_vertex_[v].push_back(static_cast<int>(generators_.size()));
      token_index_.emplace(token, static_cast<int>(generators_.size()));
      generators_.push_back({v, x, std::move(token)});
    }
  }
  inverse_gen_.assign(generators_.size(), -1);
  for (std::size_t i = 0; i < generators_.size(); ++i) {
    const Generator& s = generators_[i];
    const std::int64_t inv = groups_[s.vertex].invert(s.element);
    for (int j : by_vertex_[s.vertex]) {
      if (generators_[j].element == inv) inverse_gen_[i] = j;
    }
  }
}

int PresentationGraph::generator_index(std::string_view token) const {
  auto it = token_index_.find(std::string(token));
  return it == token_index_.end() ? -1 : it->second;
}

Alphabet PresentationGraph::alphabet() const {
  Alphabet a;
  for (const Generator& s : generators_) a.add(s.token);
  for (std::size_t i = 0; i < generators_.size(); ++i) {
    a.set_inverse(static_cast<LabelId>(i), static_cast<LabelId>(inverse_gen_[i]));
  }
  return a;
}

PresentationGraph make_raag(const std::vector<std::string>& names,
                            const std::vector<std::pair<std::string, std::string>>& edges) {
  SimplicialGraph g(names);
  for (const auto& [u, v] : edges) g.add_edge(*g.index_of(u), *g.index_of(v));
  return PresentationGraph(std::move(g), std::vector<VertexGroup>(names.size(), VertexGroup::integers()));
}

PresentationGraph make_racg(const std::vector<std::string>& names,
                            const std::vector<std::pair<std::string, std::string>>& edges) {
  SimplicialGraph g(names);
  for (const auto& [u, v] : edges) g.add_edge(*g.index_of(u), *g.index_of(v));
  return PresentationGraph(std::move(g), std::vector<VertexGroup>(names.size(), VertexGroup::cyclic(2)));
}

// ---------------------------------------------------------------------------
// Normal form

std::size_t GPElementHash::operator()(const GPElement& g) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const Syllable& s : g.syllables()) {
    h = mix64(h ^ static_cast<std::uint64_t>(s.vertex));
    h = mix64(h ^ static_cast<std::uint64_t>(s.value));
  }
  return static_cast<std::size_t>(h);
}

GPElement normal_form(const PresentationGraph& p, std::span<const Syllable> word) {
  // Reduction: each incoming syllable merges with the nearest same-vertex
  // syllable reachable through commuting ones.
  thread_local std::vector<Syllable> red;
  thread_local std::vector<char> used;
  red.clear();
  for (const Syllable& s : word) {
    const VertexGroup& grp = p.group(s.vertex);
    if (!grp.contains(s.value)) throw std::out_of_range("syllable value outside its vertex group");
    if (grp.is_identity(s.value)) continue;
    bool merged = false;
    for (std::size_t j = red.size(); j-- > 0;) {
      if (red[j].vertex == s.vertex) {
        red[j].value = grp.multiply(red[j].value, s.value);
        if (grp.is_identity(red[j].value)) red.erase(red.begin() + static_cast<std::ptrdiff_t>(j));
        merged = true;
        break;
      }
      if (!p.adjacent(red[j].vertex, s.vertex)) break;
    }
    if (!merged) red.push_back(s);
  }
  // Canonical ordering: repeatedly emit the least-ranked syllable that commutes
  // with everything still in front of it.
  GPElement out;
  out.syllables_.reserve(red.size());
  used.assign(red.size(), 0);
  for (std::size_t emitted = 0; emitted < red.size(); ++emitted) {
    std::size_t best = red.size();
    for (std::size_t i = 0; i < red.size(); ++i) {
      if (used[i]) continue;
      bool available = true;
      for (std::size_t k = 0; k < i && available; ++k) {
        if (!used[k] && !p.adjacent(red[k].vertex, red[i].vertex)) available = false;
      }
      if (available && (best == red.size() || p.rank(red[i].vertex) < p.rank(red[best].vertex))) best = i;
    }
    used[best] = 1;
    out.syllables_.push_back(red[best]);
  }
  return out;
}

GPElement multiply(const PresentationGraph& p, const GPElement& a, const GPElement& b) {
  std::vector<Syllable> word(a.syllables());
  word.insert(word.end(), b.syllables().begin(), b.syllables().end());
  return normal_form(p, word);
}

GPElement invert(const PresentationGraph& p, const GPElement& a) {
  std::vector<Syllable> word;
  word.reserve(a.num_syllables());
  for (auto it = a.syllables().rbegin(); it != a.syllables().rend(); ++it) {
    word.push_back({it->vertex, p.group(it->vertex).invert(it->value)});
  }
  return normal_form(p, word);
}

std::int64_t word_length(const PresentationGraph& p, const GPElement& a) {
  std::int64_t total = 0;
  for (const Syllable& s : a.syllables()) total += p.group(s.vertex).length(s.value);
  return total;
}

GPElement generator_element(const PresentationGraph& p, int gen) {
  const Generator& s = p.generators().at(gen);
  const Syllable syl{s.vertex, s.element};
  return normal_form(p, std::span<const Syllable>(&syl, 1));
}

GPElement evaluate_word(const PresentationGraph& p, std::span<const int> generators) {
  std::vector<Syllable> word;
  word.reserve(generators.size());
  for (int g : generators) {
    const Generator& s = p.generators().at(g);
    word.push_back({s.vertex, s.element});
  }
  return normal_form(p, word);
}

GPElement times_generator(const PresentationGraph& p, const GPElement& a, int gen) {
  thread_local std::vector<Syllable> word;
  word.assign(a.syllables().begin(), a.syllables().end());
  const Generator& s = p.generators().at(gen);
  word.push_back({s.vertex, s.element});
  return normal_form(p, word);
}

std::string to_string(const PresentationGraph& p, const GPElement& a) {
  if (a.is_identity()) return "1";
  std::ostringstream os;
  bool first = true;
  for (const Syllable& s : a.syllables()) {
    if (!first) os << ' ';
    first = false;
    os << p.lambda().name(s.vertex);
    if (p.group(s.vertex).is_integers()) {
      if (s.value != 1) os << '^' << s.value;
    } else {
      os << '[' << s.value << ']';
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Oracles

std::vector<std::uint64_t> SphereOracle::sizes() const {
  std::vector<std::uint64_t> out;
  for (const auto& s : spheres) out.push_back(s.size());
  return out;
}

SphereOracle bfs_sphere_oracle(const PresentationGraph& p, int n_max, std::uint64_t cap) {
  if (n_max < 0) throw std::invalid_argument("bfs_sphere_oracle: negative radius");
  SphereOracle oracle;
  oracle.spheres.push_back({GPElement{}});
  GPElementSet previous, current{GPElement{}};
  std::uint64_t total = 1;
  const int ngen = static_cast<int>(p.generators().size());
  for (int n = 0; n < n_max; ++n) {
    GPElementSet next;
    std::vector<GPElement> layer;
    for (const GPElement& g : oracle.spheres[n]) {
      for (int s = 0; s < ngen; ++s) {
        GPElement h = times_generator(p, g, s);
        if (current.contains(h) || previous.contains(h)) continue;
        if (next.insert(h).second) {
          layer.push_back(std::move(h));
          if (++total > cap) throw CapExceededError("bfs_sphere_oracle: more than " + std::to_string(cap) + " elements");
        }
      }
    }
    previous = std::move(current);
    current = std::move(next);
    oracle.spheres.push_back(std::move(layer));
  }
  return oracle;
}

std::vector<GPElement> ball_elements(const PresentationGraph& p, int c, std::uint64_t cap) {
  if (c < 0 || c > 4) throw std::invalid_argument("ball_elements: radius must be in [0, 4]");
  SphereOracle oracle = bfs_sphere_oracle(p, c, cap);
  std::vector<GPElement> out;
  for (auto& sphere : oracle.spheres) {
    for (auto& g : sphere) out.push_back(std::move(g));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Homomorphisms

namespace {

PresentationGraph induced_presentation(const PresentationGraph& p, const std::vector<int>& kept) {
  std::vector<VertexGroup> groups;
  for (int v : kept) groups.push_back(p.group(v));
  std::vector<int> local(p.num_vertices(), -1);
  for (std::size_t i = 0; i < kept.size(); ++i) local[kept[i]] = static_cast<int>(i);
  std::vector<int> order;
  for (int v : p.order()) {
    if (local[v] >= 0) order.push_back(local[v]);
  }
  return PresentationGraph(p.lambda().induced(kept), std::move(groups), std::move(order));
}

std::vector<int> sorted_unique(std::vector<int> v, int n) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  for (int x : v) {
    if (x < 0 || x >= n) throw std::out_of_range("vertex-killing homomorphism: vertex out of range");
  }
  return v;
}

}  // namespace

VertexKillingHom::VertexKillingHom(const PresentationGraph& source, std::vector<int> kept)
    : source_(&source),
      kept_(sorted_unique(std::move(kept), source.num_vertices())),
      target_(induced_presentation(source, kept_)) {
  vertex_map_.assign(source.num_vertices(), -1);
  for (std::size_t i = 0; i < kept_.size(); ++i) vertex_map_[kept_[i]] = static_cast<int>(i);
  gen_map_.assign(source.generators().size(), -1);
  for (std::size_t g = 0; g < source.generators().size(); ++g) {
    const Generator& s = source.generators()[g];
    const int tv = vertex_map_[s.vertex];
    if (tv < 0) continue;
    for (int t : target_.generators_of(tv)) {
      if (target_.generators()[t].element == s.element) gen_map_[g] = t;
    }
  }
}

GPElement VertexKillingHom::apply(const GPElement& g) const {
  std::vector<Syllable> word;
  for (const Syllable& s : g.syllables()) {
    const int tv = vertex_map_[s.vertex];
    if (tv >= 0) word.push_back({tv, s.value});
  }
  return normal_form(target_, word);
}

VertexKillingHom quotient_to_free(const PresentationGraph& p, int u, int v) {
  if (u == v) throw std::invalid_argument("quotient_to_free: pair must consist of distinct vertices");
  if (p.adjacent(u, v)) {
    throw std::invalid_argument("quotient_to_free: vertices " + p.lambda().name(u) + " and " + p.lambda().name(v) +
                                " are adjacent");
  }
  return VertexKillingHom(p, {u, v});
}

}  // namespace loxolab
