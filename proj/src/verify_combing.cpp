#include "loxolab/combing_builder.hpp"

#include <algorithm>

#include "loxolab/errors.hpp"

namespace loxolab {

std::vector<int> label_to_generator(const CombingGraph& graph, const PresentationGraph& p) {
  std::vector<int> map(graph.alphabet().size(), -1);
  for (LabelId l = 0; l < static_cast<LabelId>(map.size()); ++l) map[l] = p.generator_index(graph.alphabet().token(l));
  return map;
}

nlohmann::json CombingCertificate::to_json() const {
  nlohmann::json j{{"passed", passed}, {"n_max", n_max}, {"sphere_sizes", sphere_sizes}, {"oracle_sizes", oracle_sizes}};
  if (!passed) {
    j["failure"] = failure;
    j["witness"] = witness;
    j["failure_length"] = failure_length;
  }
  return j;
}

namespace {

constexpr int kTailHorizon = 5;

struct Walker {
  const CombingGraph& graph;
  const PresentationGraph& p;
  const std::vector<int>& gen;
  int n_max;
  std::uint64_t cap;
  std::uint64_t visited = 0;
  std::vector<EdgeId> path;
  CombingCertificate& cert;
  std::vector<GPElementSet>* images = nullptr;  // only for walks from v0

  void fail(std::string kind) {
    if (!cert.passed) return;
    cert.passed = false;
    cert.failure = std::move(kind);
    cert.witness = spell(graph, path);
    cert.failure_length = static_cast<int>(path.size());
  }

  // Depth-first over all paths of length <= n_max, carrying the evaluated element.
  void walk(VertexId v, const GPElement& g) {
    if (!cert.passed) return;
    const int depth = static_cast<int>(path.size());
    if (++visited > cap) throw CapExceededError("verify_combing: path cap exceeded");
    if (word_length(p, g) != depth) return fail("not geodesic");
    if (images && !(*images)[depth].insert(g).second) return fail("non-injective");
    if (depth == n_max) return;
    for (EdgeId e : graph.out_edges(v)) {
      const int s = gen[graph.edge(e).label];
      path.push_back(e);
      if (s < 0) {
        fail("unknown label");
      } else {
        walk(graph.edge(e).to, times_generator(p, g, s));
      }
      path.pop_back();
      if (!cert.passed) return;
    }
  }
};

}  // namespace

CombingCertificate verify_combing(const CombingGraph& graph, const PresentationGraph& p, int n_max,
                                  std::uint64_t cap) {
  require_valid(graph);
  if (n_max < 0) throw std::invalid_argument("verify_combing: negative n_max");
  CombingCertificate cert;
  cert.n_max = n_max;
  const std::vector<int> gen = label_to_generator(graph, p);

  std::vector<GPElementSet> images(n_max + 1);
  Walker root{graph, p, gen, n_max, cap, 0, {}, cert, &images};
  root.walk(graph.initial(), GPElement{});
  for (const auto& s : images) cert.sphere_sizes.push_back(s.size());

  const SphereOracle oracle = bfs_sphere_oracle(p, n_max, cap);
  cert.oracle_sizes = oracle.sizes();
  if (!cert.passed) return cert;

  for (int n = 0; n <= n_max; ++n) {
    for (const GPElement& g : oracle.spheres[n]) {
      if (!images[n].contains(g)) {
        cert.passed = false;
        cert.failure = "image mismatch";
        cert.witness = "element " + to_string(p, g) + " has no path";
        cert.failure_length = n;
        return cert;
      }
    }
    if (images[n].size() != oracle.spheres[n].size()) {
      cert.passed = false;
      cert.failure = "image mismatch";
      cert.witness = "sphere " + std::to_string(n) + " larger than the oracle sphere";
      cert.failure_length = n;
      return cert;
    }
  }

  // Geodesicity of paths that do not start at the initial vertex, on a shorter
  // horizon: long ones are mostly suffixes of paths already checked from v0.
  const int tail_nmax = std::min(n_max, kTailHorizon);
  for (VertexId v = 0; v < static_cast<VertexId>(graph.num_vertices()); ++v) {
    if (v == graph.initial()) continue;
    Walker w{graph, p, gen, tail_nmax, cap, 0, {}, cert, nullptr};
    w.walk(v, GPElement{});
    if (!cert.passed) {
      cert.witness = "from " + graph.vertex_name(v) + ": " + cert.witness;
      return cert;
    }
  }
  return cert;
}

}  // namespace loxolab
