#pragma once

#include <string>

#include "loxolab/combing_builder.hpp"
#include "loxolab/graph_core.hpp"
#include "loxolab/group_kernel.hpp"
#include "loxolab/rng.hpp"

namespace loxolab::testing {

inline std::string data_path(const std::string& name) { return std::string(LOXOLAB_DATA_DIR) + "/" + name; }

inline PresentationGraph fixture(const std::string& name) { return load_presentation(data_path(name + ".json")); }

/// Random deterministic graph on `n` vertices where every vertex is reachable from 0.
inline CombingGraph random_graph(int n, int extra_edges, std::uint64_t seed) {
  Rng rng(seed);
  CombingGraph g;
  for (int v = 0; v < n; ++v) g.add_vertex("q" + std::to_string(v));
  const char* tokens[] = {"a", "a^-1", "b", "b^-1"};
  std::vector<std::vector<bool>> used(n, std::vector<bool>(4, false));
  auto add = [&](int from, int to) {
    const int start = static_cast<int>(rng.below(4));
    for (int k = 0; k < 4; ++k) {
      const int l = (start + k) % 4;
      if (!used[from][l]) {
        used[from][l] = true;
        g.add_edge(from, to, tokens[l]);
        return true;
      }
    }
    return false;
  };
  for (int v = 1; v < n; ++v) {
    const int first = static_cast<int>(rng.below(v));
    for (int k = 0; k < v && !add((first + k) % v, v); ++k) {
    }
  }
  for (int e = 0; e < extra_edges; ++e) add(static_cast<int>(rng.below(n)), static_cast<int>(rng.below(n)));
  g.alphabet().infer_inverses_from_suffix();
  return g;
}

}  // namespace loxolab::testing
