#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "loxolab/errors.hpp"
#include "loxolab/graph_core.hpp"

namespace loxolab {

namespace {

// Number of length-n paths from `start`, saturating at cap + 1.
std::uint64_t bounded_path_count(const CombingGraph& graph, VertexId start, int n, std::uint64_t cap) {
  const std::size_t nv = graph.num_vertices();
  const std::uint64_t sat = cap + 1;
  std::vector<std::uint64_t> cur(nv, 1), nxt(nv);
  for (int k = 0; k < n; ++k) {
    for (std::size_t v = 0; v < nv; ++v) {
      std::uint64_t s = 0;
      for (EdgeId e : graph.out_edges(static_cast<VertexId>(v))) {
        s += cur[graph.edge(e).to];
        if (s >= sat) {
          s = sat;
          break;
        }
      }
      nxt[v] = s;
    }
    cur.swap(nxt);
  }
  return cur[start];
}

struct Frame {
  VertexId vertex;
  std::size_t next_edge;
};

}  // namespace

void for_each_path(const CombingGraph& graph, VertexId start, int n, const PathVisitor& visit,
                   std::uint64_t cap) {
  if (n < 0) throw std::invalid_argument("for_each_path: negative length");
  if (bounded_path_count(graph, start, n, cap) > cap) {
    throw CapExceededError("path enumeration: more than " + std::to_string(cap) + " paths of length " +
                           std::to_string(n));
  }
  std::vector<EdgeId> path;
  path.reserve(n);
  if (n == 0) {
    visit(path, start);
    return;
  }
  std::vector<Frame> stack{{start, 0}};
  while (!stack.empty()) {
    Frame& top = stack.back();
    const auto& out = graph.out_edges(top.vertex);
    if (top.next_edge == out.size()) {
      stack.pop_back();
      if (!path.empty()) path.pop_back();
      continue;
    }
    const EdgeId e = out[top.next_edge++];
    const VertexId w = graph.edge(e).to;
    path.push_back(e);
    if (static_cast<int>(path.size()) == n) {
      visit(path, w);
      path.pop_back();
    } else {
      stack.push_back({w, 0});
    }
  }
}

std::vector<GraphPath> enumerate_paths(const CombingGraph& graph, int n, std::uint64_t cap) {
  require_valid(graph);
  std::vector<GraphPath> out;
  for_each_path(
      graph, graph.initial(), n,
      [&](std::span<const EdgeId> edges, VertexId) {
        out.push_back({graph.initial(), std::vector<EdgeId>(edges.begin(), edges.end())});
      },
      cap);
  return out;
}

UniformPathSampler::UniformPathSampler(const CombingGraph& graph, int horizon)
    : graph_(&graph), table_(count_spheres(graph, horizon)) {}

GraphPath UniformPathSampler::unrank(int n, BigInt rank) const {
  if (n < 0 || n > table_.horizon()) throw std::out_of_range("unrank: length beyond table horizon");
  if (rank < 0 || rank >= table_.sphere(n)) throw std::out_of_range("unrank: rank out of range");
  GraphPath path{graph_->initial(), {}};
  path.edges.reserve(n);
  VertexId v = graph_->initial();
  for (int remaining = n; remaining > 0; --remaining) {
    bool moved = false;
    for (EdgeId e : graph_->out_edges(v)) {
      const BigInt& block = table_.at(graph_->edge(e).to, remaining - 1);
      if (rank < block) {
        path.edges.push_back(e);
        v = graph_->edge(e).to;
        moved = true;
        break;
      }
      rank -= block;
    }
    if (!moved) throw std::logic_error("unrank: inconsistent count table");
  }
  return path;
}

GraphPath UniformPathSampler::sample(int n, Rng& rng) const {
  if (n < 0 || n > table_.horizon()) throw std::out_of_range("sample: length beyond table horizon");
  const BigInt& total = table_.sphere(n);
  if (total == 0) throw std::domain_error("sample_uniform_path: S_n is empty");
  return unrank(n, rng.below(total));
}

GraphPath sample_uniform_path(const CombingGraph& graph, int n, std::uint64_t seed) {
  UniformPathSampler sampler(graph, n);
  Rng rng(seed);
  return sampler.sample(n, rng);
}

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double nt = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / nt;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nt;
  const double center = (p + z2 / (2.0 * nt)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nt + z2 / (4.0 * nt * nt)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

MeasureResult counting_measure(const CombingGraph& graph, int n, const PathPredicate& predicate,
                               const MeasureOptions& options) {
  require_valid(graph);
  MeasureResult result;
  if (bounded_path_count(graph, graph.initial(), n, options.exact_cap) <= options.exact_cap) {
    std::uint64_t hits = 0, total = 0;
    for_each_path(
        graph, graph.initial(), n,
        [&](std::span<const EdgeId> edges, VertexId end) {
          ++total;
          if (predicate(edges, end)) ++hits;
        },
        options.exact_cap);
    result.exact = true;
    result.value = total == 0 ? Rational(0) : Rational(BigInt(hits), BigInt(total));
    result.estimate = to_double(result.value);
    result.ci_low = result.ci_high = result.estimate;
    return result;
  }
  UniformPathSampler sampler(graph, n);
  Rng rng(options.seed);
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < options.samples; ++i) {
    const GraphPath p = sampler.sample(n, rng);
    if (predicate(p.edges, p.end(graph))) ++hits;
  }
  result.exact = false;
  result.samples = options.samples;
  result.seed = options.seed;
  result.estimate = options.samples == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(options.samples);
  const WilsonInterval ci = wilson_interval(hits, options.samples);
  result.ci_low = ci.low;
  result.ci_high = ci.high;
  return result;
}

std::vector<GraphPath> loop_paths(const CombingGraph& graph, VertexId v, int n, bool primitive,
                                  std::uint64_t cap) {
  if (v < 0 || v >= static_cast<VertexId>(graph.num_vertices())) throw std::out_of_range("loop_paths: vertex");
  std::vector<GraphPath> out;
  if (n == 0) {
    out.push_back({v, {}});
    return out;
  }
  // Walks from v of length n bound the number of loops; enumerate with pruning.
  std::uint64_t visited = 0;
  std::vector<EdgeId> path;
  std::vector<Frame> stack{{v, 0}};
  while (!stack.empty()) {
    Frame& top = stack.back();
    const auto& outs = graph.out_edges(top.vertex);
    if (top.next_edge == outs.size()) {
      stack.pop_back();
      if (!path.empty()) path.pop_back();
      continue;
    }
    const EdgeId e = outs[top.next_edge++];
    const VertexId w = graph.edge(e).to;
    const bool last = static_cast<int>(path.size()) + 1 == n;
    if (primitive && !last && w == v) continue;
    path.push_back(e);
    if (last) {
      if (w == v) {
        if (++visited > cap) throw CapExceededError("loop_paths: cap exceeded");
        out.push_back({v, path});
      }
      path.pop_back();
    } else {
      stack.push_back({w, 0});
    }
  }
  return out;
}

std::vector<BigInt> count_loops(const CombingGraph& graph, VertexId v, int horizon, bool primitive) {
  if (horizon < 0 || horizon >= kMaxHorizon) throw std::invalid_argument("count_loops: bad horizon");
  const std::size_t nv = graph.num_vertices();
  // cur[w] = number of walks v -> w of the current length (avoiding v in the
  // interior when primitive).
  std::vector<BigInt> cur(nv), nxt(nv);
  std::vector<BigInt> result(horizon + 1);
  result[0] = 1;
  cur[v] = 1;
  for (int n = 1; n <= horizon; ++n) {
    for (auto& x : nxt) x = 0;
    for (std::size_t u = 0; u < nv; ++u) {
      if (cur[u] == 0) continue;
      if (primitive && n > 1 && static_cast<VertexId>(u) == v) continue;
      for (EdgeId e : graph.out_edges(static_cast<VertexId>(u))) nxt[graph.edge(e).to] += cur[u];
    }
    cur.swap(nxt);
    result[n] = cur[v];
  }
  return result;
}

}  // namespace loxolab
