#include "loxolab/graph_core.hpp"

#include <deque>
#include <sstream>
#include <stdexcept>

#include "loxolab/errors.hpp"

namespace loxolab {

LabelId Alphabet::add(std::string token) {
  if (auto it = index_.find(token); it != index_.end()) return it->second;
  const auto id = static_cast<LabelId>(tokens_.size());
  index_.emplace(token, id);
  tokens_.push_back(std::move(token));
  inverse_.push_back(id);
  return id;
}

void Alphabet::set_inverse(LabelId a, LabelId b) {
  inverse_.at(a) = b;
  inverse_.at(b) = a;
}

LabelId Alphabet::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? -1 : it->second;
}

void Alphabet::infer_inverses_from_suffix() {
  constexpr std::string_view kSuffix = "^-1";
  for (LabelId id = 0; id < static_cast<LabelId>(tokens_.size()); ++id) {
    const std::string& t = tokens_[id];
    if (t.size() > kSuffix.size() && t.ends_with(kSuffix)) {
      const LabelId base = find(std::string_view(t).substr(0, t.size() - kSuffix.size()));
      if (base >= 0) set_inverse(base, id);
    }
  }
}

VertexId CombingGraph::add_vertex(std::string name) {
  const auto id = static_cast<VertexId>(names_.size());
  if (!name_index_.emplace(name, id).second) {
    throw ValidationError("duplicate vertex name '" + name + "'");
  }
  names_.push_back(std::move(name));
  out_.emplace_back();
  return id;
}

EdgeId CombingGraph::add_edge(VertexId from, VertexId to, LabelId label) {
  const auto n = static_cast<VertexId>(names_.size());
  if (from < 0 || from >= n || to < 0 || to >= n) throw std::out_of_range("add_edge: vertex out of range");
  if (label < 0 || label >= static_cast<LabelId>(alphabet_.size())) {
    throw std::out_of_range("add_edge: label out of range");
  }
  const auto id = static_cast<EdgeId>(edges_.size());
  edges_.push_back({from, to, label});
  out_[from].push_back(id);
  return id;
}

EdgeId CombingGraph::add_edge(VertexId from, VertexId to, std::string_view token) {
  return add_edge(from, to, alphabet_.add(std::string(token)));
}

std::optional<VertexId> CombingGraph::find_vertex(std::string_view name) const {
  auto it = name_index_.find(std::string(name));
  if (it == name_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<VertexId> CombingGraph::follow(VertexId v, LabelId label) const {
  for (EdgeId e : out_[v]) {
    if (edges_[e].label == label) return edges_[e].to;
  }
  return std::nullopt;
}

std::vector<LabelId> labels_of(const CombingGraph& g, std::span<const EdgeId> edges) {
  std::vector<LabelId> out;
  out.reserve(edges.size());
  for (EdgeId e : edges) out.push_back(g.edge(e).label);
  return out;
}

std::string spell(const CombingGraph& g, std::span<const EdgeId> edges) {
  std::string out;
  for (EdgeId e : edges) {
    if (!out.empty()) out += ' ';
    out += g.alphabet().token(g.edge(e).label);
  }
  return out.empty() ? std::string("<empty>") : out;
}

// ---------------------------------------------------------------------------

ValidationReport validate(const CombingGraph& graph) {
  ValidationReport report;
  const auto n = static_cast<VertexId>(graph.num_vertices());
  if (n == 0 || graph.initial() < 0 || graph.initial() >= n) {
    report.initial_in_range = false;
    return report;
  }
  std::vector<bool> seen(n, false);
  std::deque<VertexId> queue{graph.initial()};
  seen[graph.initial()] = true;
  while (!queue.empty()) {
    const VertexId v = queue.front();
    queue.pop_front();
    for (EdgeId e : graph.out_edges(v)) {
      const VertexId w = graph.edge(e).to;
      if (!seen[w]) {
        seen[w] = true;
        queue.push_back(w);
      }
    }
  }
  for (VertexId v = 0; v < n; ++v) {
    if (!seen[v]) report.unreachable.push_back(v);
    std::unordered_map<LabelId, int> count;
    for (EdgeId e : graph.out_edges(v)) {
      if (++count[graph.edge(e).label] == 2) report.duplicate_labels.emplace_back(v, graph.edge(e).label);
      if (graph.edge(e).to == graph.initial()) report.edges_into_initial.push_back(e);
    }
  }
  return report;
}

std::string ValidationReport::summary(const CombingGraph& g) const {
  std::ostringstream os;
  if (!initial_in_range) {
    os << "initial vertex missing or out of range";
    return os.str();
  }
  if (valid()) os << "valid";
  for (VertexId v : unreachable) os << (os.tellp() > 0 ? "; " : "") << "unreachable vertex '" << g.vertex_name(v) << "'";
  for (auto [v, l] : duplicate_labels) {
    os << (os.tellp() > 0 ? "; " : "") << "duplicate out-label '" << g.alphabet().token(l) << "' at vertex '"
       << g.vertex_name(v) << "'";
  }
  return os.str();
}

void require_valid(const CombingGraph& graph) {
  const ValidationReport report = validate(graph);
  if (!report.valid()) throw ValidationError("invalid graph structure: " + report.summary(graph));
}

// ---------------------------------------------------------------------------

PathCountTable::PathCountTable(std::size_t vertices, int horizon, VertexId initial)
    : stride_(vertices),
      horizon_(horizon),
      initial_(initial),
      counts_(vertices * static_cast<std::size_t>(horizon + 1)) {}

BigInt PathCountTable::ball(int n) const {
  BigInt total = 0;
  for (int k = 0; k <= n; ++k) total += sphere(k);
  return total;
}

PathCountTable count_spheres(const CombingGraph& graph, int horizon) {
  if (horizon < 0) throw std::invalid_argument("count_spheres: negative horizon");
  if (horizon >= kMaxHorizon) throw std::invalid_argument("count_spheres: horizon must be below 2^20");
  require_valid(graph);
  const auto nv = static_cast<VertexId>(graph.num_vertices());
  PathCountTable table(graph.num_vertices(), horizon, graph.initial());
  for (VertexId v = 0; v < nv; ++v) table.at(v, 0) = 1;
  for (int n = 0; n < horizon; ++n) {
    for (VertexId v = 0; v < nv; ++v) {
      BigInt sum = 0;
      for (EdgeId e : graph.out_edges(v)) sum += table.at(graph.edge(e).to, n);
      table.at(v, n + 1) = std::move(sum);
    }
  }
  return table;
}

std::vector<BigInt> count_with_monitor(const CombingGraph& graph, const LabelMonitor& monitor, int horizon) {
  if (horizon < 0 || horizon >= kMaxHorizon) throw std::invalid_argument("count_with_monitor: bad horizon");
  require_valid(graph);
  const std::size_t nv = graph.num_vertices();
  const auto ns = static_cast<std::size_t>(monitor.num_states);
  // Precompute the monitor transition per (state, label).
  const std::size_t nl = graph.alphabet().size();
  std::vector<int> step(ns * nl);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t l = 0; l < nl; ++l) {
      const int t = monitor.step(static_cast<int>(s), static_cast<LabelId>(l));
      if (t < 0 || t >= monitor.num_states) throw std::out_of_range("monitor step out of range");
      step[s * nl + l] = t;
    }
  }
  // Forward DP over (vertex, state) from the initial configuration.
  std::vector<BigInt> current(nv * ns), next(nv * ns);
  current[graph.initial() * ns + monitor.initial_state] = 1;
  std::vector<BigInt> result;
  result.reserve(horizon + 1);
  auto accepted = [&](const std::vector<BigInt>& layer) {
    BigInt total = 0;
    for (std::size_t v = 0; v < nv; ++v) {
      for (std::size_t s = 0; s < ns; ++s) {
        if (layer[v * ns + s] != 0 && monitor.accept(static_cast<int>(s))) total += layer[v * ns + s];
      }
    }
    return total;
  };
  result.push_back(accepted(current));
  for (int n = 0; n < horizon; ++n) {
    for (auto& x : next) x = 0;
    for (std::size_t v = 0; v < nv; ++v) {
      for (std::size_t s = 0; s < ns; ++s) {
        const BigInt& c = current[v * ns + s];
        if (c == 0) continue;
        for (EdgeId e : graph.out_edges(static_cast<VertexId>(v))) {
          const Edge& edge = graph.edge(e);
          next[edge.to * ns + step[s * nl + edge.label]] += c;
        }
      }
    }
    current.swap(next);
    result.push_back(accepted(current));
  }
  return result;
}

}  // namespace loxolab
