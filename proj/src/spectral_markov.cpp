#include "loxolab/spectral_markov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "loxolab/errors.hpp"

namespace loxolab {

namespace {

constexpr double kStochasticTol = 1e-9;

// Rothblum: the index of lambda equals the longest chain of maximal components
// in the condensation, so lambda is semisimple iff no maximal component reaches
// another one.
bool maximal_components_in_series(const GrowthClassification& gc) {
  std::vector<int> below(gc.num_scc, 0);  // maximal components reachable strictly downstream
  for (auto it = gc.topo_order.rbegin(); it != gc.topo_order.rend(); ++it) {
    const int c = *it;
    for (int d : gc.condensation[c]) below[c] = std::max(below[c], below[d] + (gc.maximal[d] ? 1 : 0));
  }
  for (int c = 0; c < gc.num_scc; ++c) {
    if (gc.maximal[c] && below[c] > 0) return true;
  }
  return false;
}

// det(M) == 0 for a square integer matrix, by fraction-free elimination.
bool singular(std::vector<std::vector<BigInt>> m) {
  const std::size_t n = m.size();
  BigInt prev = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    while (pivot < n && m[pivot][k] == 0) ++pivot;
    if (pivot == n) return true;
    std::swap(m[k], m[pivot]);
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
      m[i][k] = 0;
    }
    prev = m[k][k];
  }
  return m[n - 1][n - 1] == 0;
}

}  // namespace

PerronData perron(const CombingGraph& graph) {
  const GrowthClassification gc = classify_growth(graph);
  if (!gc.almost_semisimple_candidate || gc.lambda <= 1.0 + 1e-9) {
    throw ValidationError("not almost semisimple candidate: growth rate " + format_double(gc.lambda) + " <= 1");
  }
  if (maximal_components_in_series(gc)) {
    throw ValidationError("not almost semisimple: a maximal component reaches another maximal component");
  }
  const std::size_t n = graph.num_vertices();
  PerronData pd;
  pd.lambda = gc.lambda;
  pd.vertex_class = gc.vertex_class;
  const double lambda = gc.lambda;

  // Lazy iteration x <- (M x + lambda x) / (2 lambda) from the all-ones vector.
  // Its limit is the Cesaro limit of M^n 1 / lambda^n; rescaling each step only
  // changes the overall factor, which the final normalisation discards anyway.
  std::vector<double> x(n, 0.0), y(n);
  for (std::size_t v = 0; v < n; ++v) x[v] = gc.is_large(static_cast<VertexId>(v)) ? 1.0 : 0.0;
  const int max_iter = 1'000'000;
  bool converged = false;
  for (int it = 1; it <= max_iter && !converged; ++it) {
    double top = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      if (!gc.is_large(static_cast<VertexId>(v))) {
        y[v] = 0.0;
        continue;
      }
      double s = lambda * x[v];
      for (EdgeId e : graph.out_edges(static_cast<VertexId>(v))) s += x[graph.edge(e).to];
      y[v] = s / (2.0 * lambda);
      top = std::max(top, y[v]);
    }
    double change = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      y[v] /= top;
      change = std::max(change, std::abs(y[v] - x[v]));
    }
    x.swap(y);
    pd.iterations = it;
    converged = change <= 1e-15;
  }
  if (!converged) throw ConvergenceError("perron: eigenvector iteration did not converge");
  pd.rho = x;

  double res = 0.0, top = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    double s = 0.0;
    for (EdgeId e : graph.out_edges(static_cast<VertexId>(v))) s += pd.rho[graph.edge(e).to];
    if (gc.is_large(static_cast<VertexId>(v))) res = std::max(res, std::abs(s - lambda * pd.rho[v]));
    top = std::max(top, pd.rho[v]);
  }
  pd.residual = res / (lambda * top);
  return pd;
}

MarkovChain build_markov(const CombingGraph& graph, const PerronData& pd) {
  const std::size_t n = graph.num_vertices();
  if (pd.rho.size() != n) throw std::invalid_argument("build_markov: Perron data for another graph");
  MarkovChain chain;
  chain.mu.assign(graph.num_edges(), 0.0);
  chain.absorbing.assign(n, false);
  for (std::size_t v = 0; v < n; ++v) {
    if (pd.vertex_class[v] == GrowthClass::Small) {
      chain.absorbing[v] = true;
      continue;
    }
    double sum = 0.0;
    for (EdgeId e : graph.out_edges(static_cast<VertexId>(v))) {
      chain.mu[e] = pd.rho[graph.edge(e).to] / (pd.lambda * pd.rho[v]);
      sum += chain.mu[e];
    }
    chain.row_sum_max_dev = std::max(chain.row_sum_max_dev, std::abs(sum - 1.0));
  }
  if (chain.row_sum_max_dev > kStochasticTol) {
    throw ValidationError("build_markov: row sums deviate from 1 by " + format_double(chain.row_sum_max_dev));
  }
  return chain;
}

namespace {

EdgeId draw_edge(const CombingGraph& graph, const MarkovChain& chain, VertexId v, Rng& rng) {
  if (chain.absorbing[v]) throw std::logic_error("markov walk entered an absorbing vertex");
  const double u = rng.uniform01();
  double acc = 0.0;
  EdgeId last = -1;
  for (EdgeId e : graph.out_edges(v)) {
    if (chain.mu[e] <= 0.0) continue;
    acc += chain.mu[e];
    last = e;
    if (u < acc) return e;
  }
  if (last < 0) throw std::logic_error("markov walk: vertex without positive transitions");
  return last;  // rounding slack in the last bin
}

}  // namespace

GraphPath sample_markov_path(const CombingGraph& graph, const MarkovChain& chain, int n, Rng& rng) {
  if (n < 0) throw std::invalid_argument("sample_markov_path: negative length");
  GraphPath path{graph.initial(), {}};
  path.edges.reserve(n);
  VertexId v = graph.initial();
  for (int k = 0; k < n; ++k) {
    const EdgeId e = draw_edge(graph, chain, v, rng);
    path.edges.push_back(e);
    v = graph.edge(e).to;
  }
  return path;
}

GraphPath sample_markov_path(const CombingGraph& graph, const MarkovChain& chain, int n, std::uint64_t seed) {
  Rng rng(seed);
  return sample_markov_path(graph, chain, n, rng);
}

double path_probability(const CombingGraph&, const MarkovChain& chain, std::span<const EdgeId> edges) {
  double p = 1.0;
  for (EdgeId e : edges) p *= chain.mu[e];
  return p;
}

// ---------------------------------------------------------------------------
// Return times

double FirstReturnStats::empirical(int n) const {
  if (samples == 0 || n < 0 || n >= static_cast<int>(histogram.size())) return 0.0;
  return static_cast<double>(histogram[n]) / static_cast<double>(samples);
}

TailFit fit_log_tail(const std::vector<double>& probabilities, int n_lo, int n_hi) {
  TailFit fit;
  fit.n_lo = n_lo;
  fit.n_hi = n_hi;
  std::vector<double> xs, ys;
  for (int n = n_lo; n <= n_hi && n < static_cast<int>(probabilities.size()); ++n) {
    if (probabilities[n] <= 0.0) continue;
    xs.push_back(n);
    ys.push_back(std::log(probabilities[n]));
  }
  if (xs.size() < 2) return fit;
  const double m = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / m;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

FirstReturnStats first_return_stats(const CombingGraph& graph, const MarkovChain& chain, VertexId v,
                                    std::uint64_t num_samples, std::uint64_t seed, int horizon, int max_steps,
                                    int fit_lo, int fit_hi) {
  const GrowthClassification gc = classify_growth(graph);
  if (v < 0 || v >= static_cast<VertexId>(graph.num_vertices()) || !gc.maximal[gc.scc_of[v]]) {
    throw ValidationError("first_return_stats: vertex is not recurrent");
  }
  FirstReturnStats st;
  st.vertex = v;
  st.samples = num_samples;
  st.seed = seed;

  // Taboo recursion: mass of walks from v that have not yet come back.
  const std::size_t n = graph.num_vertices();
  std::vector<double> d(n, 0.0), next(n);
  d[v] = 1.0;
  st.exact.assign(horizon + 1, 0.0);
  for (int k = 1; k <= horizon; ++k) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t u = 0; u < n; ++u) {
      if (d[u] == 0.0) continue;
      for (EdgeId e : graph.out_edges(static_cast<VertexId>(u))) next[graph.edge(e).to] += d[u] * chain.mu[e];
    }
    st.exact[k] = next[v];
    next[v] = 0.0;
    d.swap(next);
  }
  st.exact_mass = std::accumulate(st.exact.begin(), st.exact.end(), 0.0);

  Rng rng(seed);
  double total = 0.0;
  std::uint64_t returned = 0;
  for (std::uint64_t i = 0; i < num_samples; ++i) {
    VertexId u = v;
    int steps = 0;
    do {
      u = graph.edge(draw_edge(graph, chain, u, rng)).to;
      ++steps;
    } while (u != v && steps < max_steps);
    if (u != v) {
      ++st.truncated;
      continue;
    }
    if (static_cast<int>(st.histogram.size()) <= steps) st.histogram.resize(steps + 1, 0);
    ++st.histogram[steps];
    total += steps;
    ++returned;
  }
  st.mean = returned == 0 ? 0.0 : total / static_cast<double>(returned);
  st.tail = fit_log_tail(st.exact, fit_lo, fit_hi);
  return st;
}

// ---------------------------------------------------------------------------
// Growth constants

GrowthConstant growth_constant(const CombingGraph& graph, const PerronData& pd, int n_lo, int n_hi) {
  if (pd.lambda <= 1.0 + 1e-9) throw ValidationError("growth_constant: growth rate <= 1");
  if (n_lo < 0 || n_hi < n_lo) throw std::invalid_argument("growth_constant: bad window");
  const GrowthClassification gc = classify_growth(graph);
  GrowthConstant g;
  g.lambda = pd.lambda;
  g.period = 0;
  for (int c = 0; c < gc.num_scc; ++c) {
    if (gc.maximal[c]) g.period = std::gcd(g.period, period_of_component(graph, gc.members[c]));
  }
  if (g.period == 0) g.period = 1;

  const auto k = static_cast<std::int64_t>(std::llround(pd.lambda));
  if (std::abs(pd.lambda - static_cast<double>(k)) <= 1e-9 * pd.lambda) {
    for (int c = 0; c < gc.num_scc && !g.integer_lambda; ++c) {
      if (!gc.maximal[c]) continue;
      const auto& mem = gc.members[c];
      std::vector<int> local(graph.num_vertices(), -1);
      for (std::size_t i = 0; i < mem.size(); ++i) local[mem[i]] = static_cast<int>(i);
      std::vector<std::vector<BigInt>> m(mem.size(), std::vector<BigInt>(mem.size(), 0));
      for (std::size_t i = 0; i < mem.size(); ++i) {
        m[i][i] -= k;
        for (EdgeId e : graph.out_edges(mem[i])) {
          const int j = local[graph.edge(e).to];
          if (j >= 0) m[i][j] += 1;
        }
      }
      if (singular(std::move(m))) g.integer_lambda = k;
    }
  }
  if (g.integer_lambda) g.lambda = static_cast<double>(*g.integer_lambda);

  const PathCountTable table = count_spheres(graph, n_hi);
  for (int n = n_lo; n <= n_hi; ++n) {
    g.n.push_back(n);
    g.sphere.push_back(table.sphere(n));
    if (g.integer_lambda) {
      const Rational r(table.sphere(n), boost::multiprecision::pow(BigInt(*g.integer_lambda), n));
      g.exact_ratio.push_back(r);
      g.ratio.push_back(to_double(r));
    } else {
      g.ratio.push_back(std::exp(std::log(to_double(table.sphere(n))) - n * std::log(g.lambda)));
    }
  }
  for (std::size_t i = 0; i + 1 < g.ratio.size(); ++i) g.increments.push_back(std::abs(g.ratio[i + 1] - g.ratio[i]));

  const int p = g.period;
  const int size = static_cast<int>(g.ratio.size());
  const int take = std::min(p, size);
  g.subsequence_C.assign(p, std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  for (int i = size - take; i < size; ++i) {
    sum += g.ratio[i];
    g.subsequence_C[g.n[i] % p] = g.ratio[i];
  }
  g.C = take == 0 ? 0.0 : sum / take;
  if (g.integer_lambda && size > p) {
    bool stable = true;
    Rational acc = 0;
    for (int i = size - p; i < size; ++i) {
      stable = stable && g.exact_ratio[i] == g.exact_ratio[i - p];
      acc += g.exact_ratio[i];
    }
    if (stable) g.exact_C = acc / p;
  }
  return g;
}

// ---------------------------------------------------------------------------

std::vector<int> recurrent_components(const CombingGraph& graph, const MarkovChain& chain) {
  const GrowthClassification gc = classify_growth(graph);
  std::vector<int> maximal, closed;
  for (int c = 0; c < gc.num_scc; ++c) {
    if (gc.maximal[c]) maximal.push_back(c);
    const VertexId rep = gc.members[c].front();
    if (chain.absorbing[rep] || !gc.nontrivial[c]) continue;
    bool leaks = false, internal = false;
    for (VertexId v : gc.members[c]) {
      for (EdgeId e : graph.out_edges(v)) {
        if (chain.mu[e] <= 0.0) continue;
        if (gc.scc_of[graph.edge(e).to] == c) {
          internal = true;
        } else {
          leaks = true;
        }
      }
    }
    if (internal && !leaks) closed.push_back(c);
  }
  if (maximal != closed) throw std::logic_error("recurrent_components: chain classes differ from maximal components");
  return maximal;
}

std::vector<NamedPredicate> predicate_battery(const CombingGraph& graph) {
  const auto L = static_cast<LabelId>(std::max<std::size_t>(graph.alphabet().size(), 1));
  const LabelId a = 0, b = 1 % L, c = 2 % L;
  const VertexId hub = graph.out_edges(graph.initial()).empty() ? graph.initial()
                                                                 : graph.edge(graph.out_edges(graph.initial())[0]).to;
  auto lab = [&graph](std::span<const EdgeId> p, std::size_t i) { return graph.edge(p[i]).label; };
  auto count = [&graph](std::span<const EdgeId> p, LabelId l) {
    return static_cast<int>(std::count_if(p.begin(), p.end(), [&](EdgeId e) { return graph.edge(e).label == l; }));
  };
  std::vector<NamedPredicate> out;
  out.push_back({"always", [](std::span<const EdgeId>, VertexId) { return true; }});
  out.push_back({"first_is_a", [=](std::span<const EdgeId> p, VertexId) { return !p.empty() && lab(p, 0) == a; }});
  out.push_back({"last_is_a", [=](std::span<const EdgeId> p, VertexId) { return !p.empty() && lab(p, p.size() - 1) == a; }});
  out.push_back({"contains_a", [=](std::span<const EdgeId> p, VertexId) { return count(p, a) > 0; }});
  out.push_back({"avoids_b", [=](std::span<const EdgeId> p, VertexId) { return count(p, b) == 0; }});
  out.push_back({"even_a", [=](std::span<const EdgeId> p, VertexId) { return count(p, a) % 2 == 0; }});
  out.push_back({"ends_at_hub", [=](std::span<const EdgeId>, VertexId end) { return end == hub; }});
  out.push_back({"first_equals_last",
                 [=](std::span<const EdgeId> p, VertexId) { return !p.empty() && lab(p, 0) == lab(p, p.size() - 1); }});
  out.push_back({"has_aa", [=](std::span<const EdgeId> p, VertexId) {
                   for (std::size_t i = 1; i < p.size(); ++i) {
                     if (lab(p, i - 1) == a && lab(p, i) == a) return true;
                   }
                   return false;
                 }});
  out.push_back({"has_ba", [=](std::span<const EdgeId> p, VertexId) {
                   for (std::size_t i = 1; i < p.size(); ++i) {
                     if (lab(p, i - 1) == b && lab(p, i) == a) return true;
                   }
                   return false;
                 }});
  out.push_back({"a_at_least_b", [=](std::span<const EdgeId> p, VertexId) { return count(p, a) >= count(p, b); }});
  out.push_back({"two_distinct_labels", [=](std::span<const EdgeId> p, VertexId) {
                   for (std::size_t i = 1; i < p.size(); ++i) {
                     if (lab(p, i) != lab(p, 0)) return true;
                   }
                   return false;
                 }});
  out.push_back({"first_not_a_last_not_b", [=](std::span<const EdgeId> p, VertexId) {
                   return !p.empty() && lab(p, 0) != a && lab(p, p.size() - 1) != b;
                 }});
  out.push_back({"hub_twice", [=](std::span<const EdgeId> p, VertexId) {
                   int visits = 0;
                   for (EdgeId e : p) visits += graph.edge(e).to == hub ? 1 : 0;
                   return visits >= 2;
                 }});
  out.push_back({"second_is_b", [=](std::span<const EdgeId> p, VertexId) { return p.size() >= 2 && lab(p, 1) == b; }});
  out.push_back({"a_count_mod3_zero", [=](std::span<const EdgeId> p, VertexId) { return count(p, a) % 3 == 0; }});
  out.push_back({"last_two_equal", [=](std::span<const EdgeId> p, VertexId) {
                   return p.size() >= 2 && lab(p, p.size() - 1) == lab(p, p.size() - 2);
                 }});
  out.push_back({"label_sum_even", [=](std::span<const EdgeId> p, VertexId) {
                   long s = 0;
                   for (EdgeId e : p) s += graph.edge(e).label;
                   return s % 2 == 0;
                 }});
  out.push_back({"ends_at_even_vertex", [](std::span<const EdgeId>, VertexId end) { return end % 2 == 0; }});
  out.push_back({"contains_c_at_most_once", [=](std::span<const EdgeId> p, VertexId) { return count(p, c) <= 1; }});
  return out;
}

MeasureComparison compare_counting_markov(const CombingGraph& graph, const MarkovChain& chain,
                                          const std::vector<NamedPredicate>& battery, int n_max, std::uint64_t cap) {
  const GrowthClassification gc = classify_growth(graph);
  MeasureComparison mc;
  mc.n_max = n_max;
  for (const auto& p : battery) mc.predicates.push_back(p.name);
  const std::size_t K = battery.size();
  mc.counting.assign(K, std::vector<double>(n_max + 1, 0.0));
  mc.markov.assign(K, std::vector<double>(n_max + 1, 0.0));
  mc.fitted_c = 1.0;
  for (int n = 0; n <= n_max; ++n) {
    std::vector<std::uint64_t> hits(K, 0);
    std::uint64_t total = 0;
    for_each_path(
        graph, graph.initial(), n,
        [&](std::span<const EdgeId> edges, VertexId end) {
          ++total;
          const double prob = path_probability(graph, chain, edges);
          const bool large = gc.is_large(end);
          for (std::size_t k = 0; k < K; ++k) {
            if (!battery[k].predicate(edges, end)) continue;
            mc.markov[k][n] += prob;
            if (large) ++hits[k];
          }
        },
        cap);
    for (std::size_t k = 0; k < K; ++k) {
      mc.counting[k][n] = static_cast<double>(hits[k]) / static_cast<double>(total);
      const double x = mc.counting[k][n], y = mc.markov[k][n];
      if (x == 0.0 && y == 0.0) continue;
      if (x == 0.0 || y == 0.0) {
        mc.fitted_c = std::numeric_limits<double>::infinity();
        continue;
      }
      mc.fitted_c = std::max({mc.fitted_c, x / y, y / x});
    }
  }
  return mc;
}

nlohmann::json spectral_report(const CombingGraph& graph, int window_lo, int window_hi, std::uint64_t return_samples,
                               std::uint64_t seed) {
  const PerronData pd = perron(graph);
  const MarkovChain chain = build_markov(graph, pd);
  const GrowthConstant gcst = growth_constant(graph, pd, window_lo, window_hi);
  const GrowthClassification gc = classify_growth(graph);
  VertexId recurrent = -1;
  for (VertexId v = 0; v < static_cast<VertexId>(graph.num_vertices()) && recurrent < 0; ++v) {
    if (gc.is_maximal(v)) recurrent = v;
  }
  const FirstReturnStats ret = first_return_stats(graph, chain, recurrent, return_samples, seed);
  nlohmann::json window = nlohmann::json::array();
  for (std::size_t i = 0; i < gcst.n.size(); ++i) {
    nlohmann::json row{{"n", gcst.n[i]}, {"Sn", gcst.sphere[i].str()}, {"ratio", gcst.ratio[i]}};
    if (!gcst.exact_ratio.empty()) row["exact"] = to_string(gcst.exact_ratio[i]);
    window.push_back(std::move(row));
  }
  nlohmann::json j{{"lambda", pd.lambda},
                   {"rho", pd.rho},
                   {"C_window", std::move(window)},
                   {"C", gcst.C},
                   {"period", gcst.period},
                   {"row_sum_max_dev", chain.row_sum_max_dev},
                   {"eigen_residual", pd.residual},
                   {"return_tail",
                    {{"vertex", graph.vertex_name(recurrent)},
                     {"slope", ret.tail.slope},
                     {"r2", ret.tail.r2},
                     {"samples", ret.samples},
                     {"seed", ret.seed},
                     {"p1_exact", ret.exact.size() > 1 ? ret.exact[1] : 0.0},
                     {"p1_empirical", ret.empirical(1)}}}};
  if (gcst.integer_lambda) j["lambda_exact"] = *gcst.integer_lambda;
  if (gcst.exact_C) j["C_exact"] = to_string(*gcst.exact_C);
  return j;
}

}  // namespace loxolab
