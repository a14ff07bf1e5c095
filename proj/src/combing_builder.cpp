#include "loxolab/combing_builder.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

#include "loxolab/errors.hpp"

namespace loxolab {

bool is_anticonnected(const SimplicialGraph& lambda) {
  const int n = lambda.size();
  if (n == 0) return false;
  std::vector<bool> seen(n, false);
  std::deque<int> queue{0};
  seen[0] = true;
  int reached = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v = 0; v < n; ++v) {
      if (v != u && !seen[v] && !lambda.adjacent(u, v)) {
        seen[v] = true;
        ++reached;
        queue.push_back(v);
      }
    }
  }
  return reached == n;
}

std::vector<int> choose_order(const SimplicialGraph& lambda, const std::vector<int>& input_order) {
  const int n = lambda.size();
  if (static_cast<int>(input_order.size()) != n) throw std::invalid_argument("choose_order: order size");
  if (n < 2) return input_order;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (lambda.adjacent(input_order[i], input_order[j])) continue;
      std::vector<int> out{input_order[i], input_order[j]};
      for (int k = 0; k < n; ++k) {
        if (k != i && k != j) out.push_back(input_order[k]);
      }
      return out;
    }
  }
  throw ValidationError("choose_order: every pair of vertices is adjacent");
}

std::vector<int> choose_order(const SimplicialGraph& lambda) {
  std::vector<int> input(lambda.size());
  std::iota(input.begin(), input.end(), 0);
  return choose_order(lambda, input);
}

// ---------------------------------------------------------------------------
// Admissible trees

namespace {

std::vector<int> ranks_of(const std::vector<int>& order) {
  std::vector<int> rank(order.size(), -1);
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<int>(i);
  return rank;
}

std::string joined_name(const SimplicialGraph& lambda, const std::vector<int>& word) {
  std::string s = "T:";
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i) s += '.';
    s += lambda.name(word[i]);
  }
  return s;
}

}  // namespace

std::vector<int> AdmissibleTree::word(int node) const {
  std::vector<int> w;
  for (int v = node; v >= 0; v = parent[v]) w.push_back(label[v]);
  std::reverse(w.begin(), w.end());
  return w;
}

std::vector<std::vector<int>> AdmissibleTree::words() const {
  std::vector<std::vector<int>> out;
  for (int v = 0; v < static_cast<int>(label.size()); ++v) out.push_back(word(v));
  return out;
}

AdmissibleTree build_admissible_tree(const SimplicialGraph& lambda, const std::vector<int>& order, int I, int J) {
  const std::vector<int> rank = ranks_of(order);
  if (I == J || lambda.adjacent(I, J) || rank[I] <= rank[J]) {
    throw std::invalid_argument("build_admissible_tree: need I > J non-adjacent");
  }
  AdmissibleTree t;
  t.root_label = I;
  t.first_label = J;
  t.label = {I, J};
  t.parent = {-1, 0};
  t.children = {{1}, {}};
  // Depth-first growth; a node's extensions are letters above its own label.
  std::vector<int> stack{1};
  while (!stack.empty()) {
    const int node = stack.back();
    stack.pop_back();
    const std::vector<int> prefix = t.word(node);
    std::vector<int> new_children;
    for (int r = rank[t.label[node]] + 1; r < static_cast<int>(order.size()); ++r) {
      const int K = order[r];
      bool ok = true;
      if (r <= rank[I]) {
        ok = std::any_of(prefix.begin(), prefix.end(), [&](int X) { return !lambda.adjacent(K, X); });
      }
      if (!ok) continue;
      const int child = static_cast<int>(t.label.size());
      t.label.push_back(K);
      t.parent.push_back(node);
      t.children.emplace_back();
      t.children[node].push_back(child);
      new_children.push_back(child);
    }
    for (auto it = new_children.rbegin(); it != new_children.rend(); ++it) stack.push_back(*it);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Letter automata

namespace {

struct PendingEdges {
  std::vector<std::vector<std::pair<int, int>>> out;  // (target, letter)
};

struct TreeLayout {
  std::vector<AdmissibleTree> trees;
  std::vector<std::vector<int>> node_vertex;  // per tree, automaton vertex per node (-1 if absent)
  std::vector<std::vector<int>> tree_of_pair; // [I][J] -> tree index or -1
};

TreeLayout all_trees(const SimplicialGraph& lambda, const std::vector<int>& order) {
  const int n = lambda.size();
  const std::vector<int> rank = ranks_of(order);
  TreeLayout layout;
  layout.tree_of_pair.assign(n, std::vector<int>(n, -1));
  for (int ri = 0; ri < n; ++ri) {
    for (int rj = 0; rj < ri; ++rj) {
      const int I = order[ri], J = order[rj];
      if (lambda.adjacent(I, J)) continue;
      layout.tree_of_pair[I][J] = static_cast<int>(layout.trees.size());
      layout.trees.push_back(build_admissible_tree(lambda, order, I, J));
    }
  }
  layout.node_vertex.resize(layout.trees.size());
  return layout;
}

// Emits out-edges sorted by letter rank so the lexicographic path order
// follows the vertex order.
void emit(TypedAutomaton& a, const PendingEdges& pending, const std::vector<int>& rank, const SimplicialGraph& lambda) {
  for (int v = 0; v < static_cast<int>(pending.out.size()); ++v) {
    auto edges = pending.out[v];
    std::sort(edges.begin(), edges.end(), [&](auto x, auto y) { return rank[x.second] < rank[y.second]; });
    for (auto [to, letter] : edges) a.graph.add_edge(v, to, lambda.name(letter));
  }
}

TypedAutomaton letter_automaton(const SimplicialGraph& lambda, const std::vector<int>& order, bool with_header) {
  const int n = lambda.size();
  const std::vector<int> rank = ranks_of(order);
  TypedAutomaton a;
  for (int v : order) a.graph.alphabet().add(lambda.name(v));
  for (LabelId l = 0; l < static_cast<LabelId>(a.graph.alphabet().size()); ++l) a.graph.alphabet().set_inverse(l, l);

  auto add = [&](std::string name, int type) {
    a.type.push_back(type);
    a.state.push_back(-1);
    return a.graph.add_vertex(std::move(name));
  };
  add("v0", -1);
  a.graph.set_initial(0);

  std::vector<int> header(n, -1);
  if (with_header) {
    for (int v : order) header[v] = add("H:" + lambda.name(v), v);
  }
  TreeLayout layout = all_trees(lambda, order);
  for (std::size_t t = 0; t < layout.trees.size(); ++t) {
    const AdmissibleTree& tree = layout.trees[t];
    layout.node_vertex[t].assign(tree.label.size(), -1);
    layout.node_vertex[t][0] = with_header ? header[tree.root_label] : -1;
    for (int node = 1; node < static_cast<int>(tree.label.size()); ++node) {
      layout.node_vertex[t][node] = add(joined_name(lambda, tree.word(node)), tree.label[node]);
    }
  }

  PendingEdges pending;
  pending.out.resize(a.graph.num_vertices());
  if (with_header) {
    for (int X : order) pending.out[0].push_back({header[X], X});
    for (int A : order) {
      for (int B : order) {
        if (rank[A] < rank[B]) pending.out[header[A]].push_back({header[B], B});
      }
    }
  } else {
    if (n < 2) throw ValidationError("recurrent graph needs at least two vertices");
    const int A = order[0], B = order[1];
    const int t = layout.tree_of_pair[B][A];
    const AdmissibleTree& tree = layout.trees[t];
    pending.out[0].push_back({layout.node_vertex[t][1], A});
    for (int child : tree.children[1]) pending.out[0].push_back({layout.node_vertex[t][child], tree.label[child]});
  }
  for (std::size_t t = 0; t < layout.trees.size(); ++t) {
    const AdmissibleTree& tree = layout.trees[t];
    for (int node = 0; node < static_cast<int>(tree.label.size()); ++node) {
      const int from = layout.node_vertex[t][node];
      if (from < 0) continue;
      for (int child : tree.children[node]) pending.out[from].push_back({layout.node_vertex[t][child], tree.label[child]});
      if (node == 0) continue;  // the root's cross edges coincide with its tree edges
      const int X = tree.label[node];
      for (int B : order) {
        if (rank[B] >= rank[X] || lambda.adjacent(X, B)) continue;
        const int target_tree = layout.tree_of_pair[X][B];
        pending.out[from].push_back({layout.node_vertex[target_tree][1], B});
      }
    }
  }
  emit(a, pending, rank, lambda);
  return a;
}

}  // namespace

TypedAutomaton build_hm_graph(const SimplicialGraph& lambda, const std::vector<int>& order) {
  if (static_cast<int>(order.size()) != lambda.size()) throw std::invalid_argument("build_hm_graph: order size");
  if (lambda.size() >= 2 && lambda.adjacent(order[0], order[1])) {
    throw ValidationError("first two vertices of the order must be non-adjacent");
  }
  return letter_automaton(lambda, order, true);
}

TypedAutomaton build_racg_recurrent(const SimplicialGraph& lambda, const std::vector<int>& order) {
  if (static_cast<int>(order.size()) != lambda.size()) throw std::invalid_argument("build_racg_recurrent: order size");
  if (!is_anticonnected(lambda)) throw ValidationError("defining graph is not anticonnected");
  if (lambda.size() < 2) throw ValidationError("recurrent graph needs at least two vertices");
  if (lambda.adjacent(order[0], order[1])) throw ValidationError("first two vertices of the order must be non-adjacent");
  return letter_automaton(lambda, order, false);
}

// ---------------------------------------------------------------------------
// Full build

CombingBuild build_combing(const PresentationGraph& p, const BuildOptions& options) {
  std::vector<int> input = p.order();
  if (options.order) {
    input.clear();
    for (const auto& name : *options.order) {
      const auto idx = p.lambda().index_of(name);
      if (!idx) throw ConfigError("order: unknown vertex '" + name + "'");
      input.push_back(*idx);
    }
  }
  const std::vector<int> order = choose_order(p.lambda(), input);
  CombingBuild b{PresentationGraph(p.lambda(), p.groups(), order), order, {}, {}, 0, {}, 0.0, {}};
  if (options.construction == Construction::Recurrent) {
    b.letters = build_racg_recurrent(b.presentation.lambda(), order);
    b.construction = "HM-recurrent-v1";
  } else {
    b.letters = build_hm_graph(b.presentation.lambda(), order);
    b.construction = "HM-v1";
  }
  b.combing = expand_with_vertex_groups(b.letters, b.presentation);
  require_valid(b.combing.graph);

  const GrowthClassification gc = classify_growth(b.combing.graph);
  b.lambda_hint = gc.lambda;
  int maximal_components = 0;
  int period = 0;
  for (int c = 0; c < gc.num_scc; ++c) {
    if (!gc.maximal[c]) continue;
    ++maximal_components;
    period = std::gcd(period, period_of_component(b.combing.graph, gc.members[c])) ;
  }
  b.period = period;
  const ComponentCertificate cert = single_nontrivial_component_certificate(b.combing.graph);
  const auto non_initial = b.combing.graph.num_vertices() - 1;
  if (cert.single_nontrivial && gc.members[*cert.witness_scc].size() == non_initial) b.flags.push_back("irreducible");
  if (cert.thick) b.flags.push_back("thick");
  if (maximal_components == 1 && period == 1) b.flags.push_back("aperiodic");
  if (period > 1) b.flags.push_back("period" + std::to_string(period));
  return b;
}

nlohmann::json sidecar_json(const CombingBuild& build) {
  nlohmann::json order = nlohmann::json::array();
  for (int v : build.order) order.push_back(build.presentation.lambda().name(v));
  return {{"order", std::move(order)},
          {"lambda_hint", build.lambda_hint},
          {"flags", build.flags},
          {"period", build.period},
          {"construction", build.construction},
          {"presentation", build.presentation.to_json()}};
}

std::vector<std::string> language_words(const CombingGraph& graph, int n, std::uint64_t cap) {
  std::vector<std::string> out;
  for_each_path(
      graph, graph.initial(), n, [&](std::span<const EdgeId> edges, VertexId) { out.push_back(spell(graph, edges)); },
      cap);
  return out;
}

}  // namespace loxolab
