#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>

#include "loxolab/errors.hpp"
#include "loxolab/graph_core.hpp"

namespace loxolab {

namespace {

constexpr double kMaximalRelTol = 1e-9;

// Iterative Tarjan. Component ids come out in reverse topological order
// (sinks first), which we flip afterwards.
std::vector<int> tarjan_scc(const CombingGraph& graph, int& num_scc) {
  const auto n = static_cast<VertexId>(graph.num_vertices());
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<VertexId> stack;
  int counter = 0;
  num_scc = 0;
  struct Call {
    VertexId v;
    std::size_t next;
  };
  for (VertexId root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    std::vector<Call> calls{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!calls.empty()) {
      Call& c = calls.back();
      const auto& out = graph.out_edges(c.v);
      if (c.next < out.size()) {
        const VertexId w = graph.edge(out[c.next++]).to;
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          calls.push_back({w, 0});
        } else if (on_stack[w]) {
          low[c.v] = std::min(low[c.v], index[w]);
        }
        continue;
      }
      const VertexId v = c.v;
      calls.pop_back();
      if (!calls.empty()) low[calls.back().v] = std::min(low[calls.back().v], low[v]);
      if (low[v] == index[v]) {
        while (true) {
          const VertexId w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = num_scc;
          if (w == v) break;
        }
        ++num_scc;
      }
    }
  }
  for (auto& c : comp) c = num_scc - 1 - c;
  return comp;
}

}  // namespace

RadiusEstimate irreducible_spectral_radius(const std::vector<std::vector<double>>& matrix, double rel_tol,
                                           int max_iter) {
  const std::size_t n = matrix.size();
  RadiusEstimate est;
  if (n == 0) return est;
  std::vector<double> x(n, 1.0), y(n);
  for (int it = 1; it <= max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += matrix[i][j] * x[j];
      y[i] = s;
    }
    // Collatz-Wielandt: min/max of (Mx)_i / x_i bracket the spectral radius.
    double lo = INFINITY, hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] / x[i];
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    est.lower = lo;
    est.upper = hi;
    est.value = 0.5 * (lo + hi);
    est.iterations = it;
    if (hi == 0.0 || hi - lo <= rel_tol * hi) return est;
    // Averaging consecutive iterates (x + Mx) removes the oscillation of
    // periodic components while keeping the Perron vector fixed.
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = x[i] + y[i] / hi;
      norm = std::max(norm, x[i]);
    }
    for (auto& v : x) v /= norm;
  }
  if (est.upper - est.lower > kMaximalRelTol * est.upper) {
    throw ConvergenceError("spectral radius: power iteration did not converge");
  }
  return est;
}

int period_of_component(const CombingGraph& graph, std::span<const VertexId> vertices) {
  if (vertices.empty()) return 0;
  std::vector<int> level(graph.num_vertices(), -1);
  std::vector<bool> inside(graph.num_vertices(), false);
  for (VertexId v : vertices) inside[v] = true;
  std::deque<VertexId> queue{vertices.front()};
  level[vertices.front()] = 0;
  int g = 0;
  while (!queue.empty()) {
    const VertexId v = queue.front();
    queue.pop_front();
    for (EdgeId e : graph.out_edges(v)) {
      const VertexId w = graph.edge(e).to;
      if (!inside[w]) continue;
      if (level[w] < 0) {
        level[w] = level[v] + 1;
        queue.push_back(w);
      } else {
        g = std::gcd(g, std::abs(level[v] + 1 - level[w]));
      }
    }
  }
  return g;
}

GrowthClassification classify_growth(const CombingGraph& graph) {
  require_valid(graph);
  GrowthClassification gc;
  const auto n = static_cast<VertexId>(graph.num_vertices());
  gc.scc_of = tarjan_scc(graph, gc.num_scc);
  gc.members.assign(gc.num_scc, {});
  for (VertexId v = 0; v < n; ++v) gc.members[gc.scc_of[v]].push_back(v);

  std::vector<std::set<int>> succ(gc.num_scc);
  gc.nontrivial.assign(gc.num_scc, false);
  for (const Edge& e : graph.edges()) {
    const int a = gc.scc_of[e.from], b = gc.scc_of[e.to];
    if (a == b) {
      gc.nontrivial[a] = true;
    } else {
      succ[a].insert(b);
    }
  }
  gc.condensation.resize(gc.num_scc);
  for (int c = 0; c < gc.num_scc; ++c) gc.condensation[c].assign(succ[c].begin(), succ[c].end());
  gc.topo_order.resize(gc.num_scc);
  std::iota(gc.topo_order.begin(), gc.topo_order.end(), 0);

  gc.radius.assign(gc.num_scc, 0.0);
  for (int c = 0; c < gc.num_scc; ++c) {
    if (!gc.nontrivial[c]) continue;
    const auto& mem = gc.members[c];
    std::vector<int> local(graph.num_vertices(), -1);
    for (std::size_t i = 0; i < mem.size(); ++i) local[mem[i]] = static_cast<int>(i);
    std::vector<std::vector<double>> m(mem.size(), std::vector<double>(mem.size(), 0.0));
    for (std::size_t i = 0; i < mem.size(); ++i) {
      for (EdgeId e : graph.out_edges(mem[i])) {
        const int j = local[graph.edge(e).to];
        if (j >= 0) m[i][j] += 1.0;
      }
    }
    gc.radius[c] = irreducible_spectral_radius(m).value;
  }
  gc.lambda = gc.num_scc == 0 ? 0.0 : *std::max_element(gc.radius.begin(), gc.radius.end());
  gc.almost_semisimple_candidate = gc.lambda > 1.0 + 1e-9;

  gc.maximal.assign(gc.num_scc, false);
  for (int c = 0; c < gc.num_scc; ++c) {
    gc.maximal[c] = gc.nontrivial[c] && std::abs(gc.radius[c] - gc.lambda) <= kMaximalRelTol * gc.lambda;
  }
  // Large growth: reaches a maximal component. Process sinks first.
  std::vector<bool> reaches(gc.num_scc, false);
  for (auto it = gc.topo_order.rbegin(); it != gc.topo_order.rend(); ++it) {
    const int c = *it;
    bool r = gc.maximal[c];
    for (int d : gc.condensation[c]) r = r || reaches[d];
    reaches[c] = r;
  }
  gc.vertex_class.resize(n);
  for (VertexId v = 0; v < n; ++v) {
    const int c = gc.scc_of[v];
    gc.vertex_class[v] = gc.maximal[c] ? GrowthClass::Maximal : (reaches[c] ? GrowthClass::Large : GrowthClass::Small);
  }
  return gc;
}

ComponentCertificate single_nontrivial_component_certificate(const CombingGraph& graph) {
  const GrowthClassification gc = classify_growth(graph);
  ComponentCertificate cert;
  for (int c = 0; c < gc.num_scc; ++c) {
    if (gc.nontrivial[c]) {
      ++cert.nontrivial_count;
      cert.witness_scc = c;
    }
  }
  cert.single_nontrivial = cert.nontrivial_count == 1;
  if (!cert.single_nontrivial) cert.witness_scc.reset();
  cert.thick = cert.single_nontrivial;
  return cert;
}

}  // namespace loxolab
