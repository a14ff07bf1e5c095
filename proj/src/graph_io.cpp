#include <fstream>

#include "loxolab/errors.hpp"
#include "loxolab/graph_core.hpp"

namespace loxolab {

using nlohmann::json;

json to_json(const CombingGraph& graph) {
  json j;
  json vertices = json::array();
  for (VertexId v = 0; v < static_cast<VertexId>(graph.num_vertices()); ++v) vertices.push_back(graph.vertex_name(v));
  j["vertices"] = std::move(vertices);
  j["initial"] = graph.num_vertices() == 0 ? std::string() : graph.vertex_name(graph.initial());
  json edges = json::array();
  for (const Edge& e : graph.edges()) {
    edges.push_back({{"from", graph.vertex_name(e.from)},
                     {"to", graph.vertex_name(e.to)},
                     {"label", graph.alphabet().token(e.label)}});
  }
  j["edges"] = std::move(edges);
  json alphabet = json::array();
  const Alphabet& a = graph.alphabet();
  for (LabelId l = 0; l < static_cast<LabelId>(a.size()); ++l) {
    alphabet.push_back({{"token", a.token(l)}, {"inverse", a.token(a.inverse(l))}});
  }
  j["alphabet"] = std::move(alphabet);
  return j;
}

CombingGraph combing_graph_from_json(const json& j) {
  try {
    CombingGraph g;
    for (const auto& name : j.at("vertices")) g.add_vertex(name.get<std::string>());
    const auto initial = g.find_vertex(j.at("initial").get<std::string>());
    if (!initial) throw ConfigError("combing graph: unknown initial vertex");
    g.set_initial(*initial);
    const bool explicit_alphabet = j.contains("alphabet");
    if (explicit_alphabet) {
      for (const auto& entry : j.at("alphabet")) g.alphabet().add(entry.at("token").get<std::string>());
      for (const auto& entry : j.at("alphabet")) {
        const LabelId a = g.alphabet().find(entry.at("token").get<std::string>());
        const LabelId b = g.alphabet().find(entry.at("inverse").get<std::string>());
        if (b < 0) throw ConfigError("combing graph: inverse token not in alphabet");
        g.alphabet().set_inverse(a, b);
      }
    }
    for (const auto& e : j.at("edges")) {
      const auto from = g.find_vertex(e.at("from").get<std::string>());
      const auto to = g.find_vertex(e.at("to").get<std::string>());
      if (!from || !to) throw ConfigError("combing graph: edge references unknown vertex");
      const std::string label = e.at("label").get<std::string>();
      if (explicit_alphabet && g.alphabet().find(label) < 0) {
        throw ConfigError("combing graph: edge label '" + label + "' not in alphabet");
      }
      g.add_edge(*from, *to, label);
    }
    if (!explicit_alphabet) g.alphabet().infer_inverses_from_suffix();
    return g;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("combing graph JSON: ") + e.what());
  }
}

CombingGraph load_combing_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open combing file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("combing file '" + path + "': " + e.what());
  }
  return combing_graph_from_json(j);
}

void save_combing_graph(const CombingGraph& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << to_json(graph).dump(2) << '\n';
}

}  // namespace loxolab
