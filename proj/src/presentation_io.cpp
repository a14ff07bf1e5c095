#include <fstream>

#include "loxolab/errors.hpp"
#include "loxolab/group_kernel.hpp"

namespace loxolab {

using nlohmann::json;

json PresentationGraph::to_json() const {
  json vertices = json::array();
  for (int v = 0; v < num_vertices(); ++v) {
    json entry{{"name", lambda_.name(v)}};
    const VertexGroup& g = groups_[v];
    if (g.is_integers()) {
      entry["group"] = "Z";
    } else {
      entry["group"] = {{"table", g.table()}, {"identity", g.identity()}, {"generators", g.declared_generators()}};
    }
    vertices.push_back(std::move(entry));
  }
  json edges = json::array();
  for (int u = 0; u < num_vertices(); ++u) {
    for (int v = u + 1; v < num_vertices(); ++v) {
      if (adjacent(u, v)) edges.push_back({lambda_.name(u), lambda_.name(v)});
    }
  }
  json order = json::array();
  for (int v : order_) order.push_back(lambda_.name(v));
  return {{"vertices", std::move(vertices)}, {"edges", std::move(edges)}, {"order", std::move(order)}};
}

PresentationGraph presentation_from_json(const json& j) {
  try {
    std::vector<std::string> names;
    std::vector<VertexGroup> groups;
    for (const auto& v : j.at("vertices")) {
      names.push_back(v.at("name").get<std::string>());
      const json& g = v.at("group");
      if (g.is_string()) {
        const auto kind = g.get<std::string>();
        if (kind != "Z") throw ConfigError("presentation: unknown group kind '" + kind + "'");
        groups.push_back(VertexGroup::integers());
      } else {
        groups.push_back(VertexGroup::finite(g.at("table").get<std::vector<std::vector<int>>>(),
                                             g.at("identity").get<int>(),
                                             g.at("generators").get<std::vector<int>>()));
      }
    }
    SimplicialGraph lambda(names);
    auto lookup = [&](const json& name) {
      const auto idx = lambda.index_of(name.get<std::string>());
      if (!idx) throw ConfigError("presentation: unknown vertex '" + name.get<std::string>() + "'");
      return *idx;
    };
    if (j.contains("edges")) {
      for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw ConfigError("presentation: edges must be name pairs");
        lambda.add_edge(lookup(e[0]), lookup(e[1]));
      }
    }
    std::vector<int> order;
    if (j.contains("order")) {
      for (const auto& name : j.at("order")) order.push_back(lookup(name));
    }
    return PresentationGraph(std::move(lambda), std::move(groups), std::move(order));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("presentation JSON: ") + e.what());
  }
}

PresentationGraph load_presentation(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open presentation file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("presentation file '" + path + "': " + e.what());
  }
  return presentation_from_json(j);
}

}  // namespace loxolab
