#include <deque>

#include "loxolab/combing_builder.hpp"
#include "loxolab/errors.hpp"

namespace loxolab {

namespace {

void copy_alphabet(const PresentationGraph& p, CombingGraph& g) {
  const Alphabet a = p.alphabet();
  for (LabelId l = 0; l < static_cast<LabelId>(a.size()); ++l) g.alphabet().add(a.token(l));
  for (LabelId l = 0; l < static_cast<LabelId>(a.size()); ++l) g.alphabet().set_inverse(l, a.inverse(l));
}

}  // namespace

CombingGraph vertex_group_automaton(const PresentationGraph& p, int vertex) {
  const VertexGroup& grp = p.group(vertex);
  CombingGraph g;
  copy_alphabet(p, g);
  g.add_vertex("v0");
  g.set_initial(0);
  const auto& gens = p.generators_of(vertex);
  if (grp.is_integers()) {
    const VertexId pos = g.add_vertex("+");
    const VertexId neg = g.add_vertex("-");
    for (int s : gens) {
      const VertexId target = p.generators()[s].element > 0 ? pos : neg;
      g.add_edge(0, target, static_cast<LabelId>(s));
      g.add_edge(target, target, static_cast<LabelId>(s));
    }
    return g;
  }
  // ShortLex tree: elements discovered in BFS order, each reached from the
  // first (least) geodesic prefix through the first generator that reaches it.
  const int order = grp.order();
  std::vector<VertexId> state(order, -1);
  state[grp.identity()] = 0;
  std::deque<int> queue{static_cast<int>(grp.identity())};
  while (!queue.empty()) {
    const int x = queue.front();
    queue.pop_front();
    for (int s : gens) {
      const int y = static_cast<int>(grp.multiply(x, p.generators()[s].element));
      if (state[y] >= 0) continue;
      state[y] = g.add_vertex(std::to_string(y));
      g.add_edge(state[x], state[y], static_cast<LabelId>(s));
      queue.push_back(y);
    }
  }
  return g;
}

TypedAutomaton expand_with_vertex_groups(const TypedAutomaton& letters, const PresentationGraph& p) {
  const CombingGraph& L = letters.graph;
  const int nv = static_cast<int>(L.num_vertices());
  std::vector<CombingGraph> local;
  for (int v = 0; v < p.num_vertices(); ++v) local.push_back(vertex_group_automaton(p, v));

  TypedAutomaton out;
  copy_alphabet(p, out.graph);
  out.graph.add_vertex("v0");
  out.graph.set_initial(0);
  out.type.push_back(-1);
  out.state.push_back(-1);

  // copy_of[u][s] = vertex for state s (s >= 1) of the copy attached to u.
  std::vector<std::vector<VertexId>> copy_of(nv);
  for (VertexId u = 0; u < nv; ++u) {
    if (u == L.initial()) continue;
    const int t = letters.type.at(u);
    if (t < 0 || t >= p.num_vertices()) throw ValidationError("expansion: vertex '" + L.vertex_name(u) + "' has no type");
    const CombingGraph& gamma = local[t];
    copy_of[u].assign(gamma.num_vertices(), -1);
    for (VertexId s = 1; s < static_cast<VertexId>(gamma.num_vertices()); ++s) {
      copy_of[u][s] = out.graph.add_vertex(L.vertex_name(u) + "|" + gamma.vertex_name(s));
      out.type.push_back(t);
      out.state.push_back(s);
    }
  }
  auto entry_edges = [&](VertexId from, VertexId w) {
    const CombingGraph& gamma = local[letters.type.at(w)];
    for (EdgeId e : gamma.out_edges(gamma.initial())) {
      out.graph.add_edge(from, copy_of[w][gamma.edge(e).to], gamma.edge(e).label);
    }
  };
  for (VertexId u = 0; u < nv; ++u) {
    if (u == L.initial()) {
      for (EdgeId e : L.out_edges(u)) entry_edges(0, L.edge(e).to);
      continue;
    }
    const CombingGraph& gamma = local[letters.type[u]];
    for (VertexId s = 1; s < static_cast<VertexId>(gamma.num_vertices()); ++s) {
      for (EdgeId e : gamma.out_edges(s)) out.graph.add_edge(copy_of[u][s], copy_of[u][gamma.edge(e).to], gamma.edge(e).label);
      for (EdgeId e : L.out_edges(u)) entry_edges(copy_of[u][s], L.edge(e).to);
    }
  }
  return out;
}

}  // namespace loxolab
