#include "loxolab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "loxolab/errors.hpp"

namespace loxolab {

using nlohmann::json;

namespace {

constexpr std::uint64_t kChunk = 1024;
constexpr double kZ99 = 2.5758293035489004;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

std::string resolve(const std::string& base, const std::string& path) {
  const std::filesystem::path p(path);
  if (p.is_absolute() || base.empty()) return path;
  return (std::filesystem::path(base) / p).lexically_normal().string();
}

// Runs fn(chunk) for every chunk on the worker pool; results come back in
// chunk order, so any reduction over them is deterministic.
template <class R, class Fn>
std::vector<R> run_chunks(std::uint64_t chunks, Fn fn) {
  std::vector<R> out(chunks);
  const unsigned threads = static_cast<unsigned>(std::min<std::uint64_t>(worker_threads(), std::max<std::uint64_t>(chunks, 1)));
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    try {
      for (std::uint64_t c = next++; c < chunks; c = next++) out[c] = fn(c);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
      next = chunks;
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::uint64_t chunk_size(std::uint64_t chunk, std::uint64_t total) {
  return std::min(kChunk, total - chunk * kChunk);
}

std::uint64_t num_chunks(std::uint64_t total) { return (total + kChunk - 1) / kChunk; }

FractionEstimate from_counts(std::uint64_t hits, std::uint64_t samples) {
  FractionEstimate f;
  f.exact = false;
  f.samples = samples;
  f.estimate = samples == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(samples);
  const WilsonInterval ci = wilson_interval(hits, samples, kZ99);
  f.ci_low = ci.low;
  f.ci_high = ci.high;
  return f;
}

}  // namespace

unsigned worker_threads() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LOXOLAB_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
  }
  return hw;
}

// ---------------------------------------------------------------------------
// Config

ExperimentConfig ExperimentConfig::from_json(const json& raw, const std::string& base_dir) {
  static const std::vector<std::string> known = {
      "presentation", "combing", "order", "construction", "action", "n", "region", "samples", "seed", "exact_cap",
      "epsilon", "L_hat", "drift_n", "drift_paths", "subgroup", "word", "c", "r_values", "shadow_center", "window",
      "verify_nmax", "distribution_exact_cap"};
  if (!raw.is_object()) throw ConfigError("config must be a JSON object");
  // Null means "not set", so the canonical form loads back unchanged.
  json j = json::object();
  for (const auto& [key, value] : raw.items()) {
    if (!value.is_null()) j[key] = value;
  }
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("config: unknown key '" + key + "'");
  }
  ExperimentConfig c;
  try {
    if (!j.contains("presentation")) throw ConfigError("config: 'presentation' is required");
    const json& p = j.at("presentation");
    c.presentation = p.is_string() ? read_json_file(resolve(base_dir, p.get<std::string>())) : p;
    if (j.contains("combing")) c.combing_path = resolve(base_dir, j.at("combing").get<std::string>());
    if (j.contains("order")) c.order = j.at("order").get<std::vector<std::string>>();
    if (j.contains("construction")) c.construction = j.at("construction").get<std::string>();
    if (c.construction != "auto" && c.construction != "recurrent" && c.construction != "hm") {
      throw ConfigError("config: construction must be auto, recurrent or hm");
    }
    if (j.contains("action")) {
      const json& a = j.at("action");
      c.action = a.is_string() ? read_json_file(resolve(base_dir, a.get<std::string>())) : a;
    }
    if (j.contains("n")) {
      const json& n = j.at("n");
      if (n.is_array()) {
        c.n_values = n.get<std::vector<int>>();
      } else {
        const int lo = n.at("min").get<int>(), hi = n.at("max").get<int>();
        const int step = n.contains("step") ? n.at("step").get<int>() : 1;
        if (step <= 0) throw ConfigError("config: n.step must be positive");
        for (int v = lo; v <= hi; v += step) c.n_values.push_back(v);
      }
    } else {
      c.n_values = {8};
    }
    if (c.n_values.empty()) throw ConfigError("config: n range is empty");
    for (int n : c.n_values) {
      if (n < 0 || n >= kMaxHorizon) throw ConfigError("config: n out of range");
    }
    if (j.contains("region")) c.region = j.at("region").get<std::string>();
    if (c.region != "sphere" && c.region != "ball") throw ConfigError("config: region must be sphere or ball");
    if (j.contains("samples")) c.samples = j.at("samples").get<std::uint64_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("exact_cap")) c.exact_cap = j.at("exact_cap").get<std::uint64_t>();
    if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
    if (j.contains("L_hat")) c.L_hat = j.at("L_hat").get<double>();
    if (j.contains("drift_n")) c.drift_n = j.at("drift_n").get<int>();
    if (j.contains("drift_paths")) c.drift_paths = j.at("drift_paths").get<std::uint64_t>();
    if (j.contains("subgroup")) c.subgroup = j.at("subgroup").get<std::vector<std::string>>();
    if (j.contains("word")) c.word = j.at("word").get<std::string>();
    if (j.contains("c")) c.c = j.at("c").get<int>();
    if (c.c < 0 || c.c > 4) throw ConfigError("config: c must be in [0, 4]");
    if (j.contains("r_values")) c.r_values = j.at("r_values").get<std::vector<int>>();
    if (j.contains("shadow_center")) c.shadow_center = j.at("shadow_center").get<std::string>();
    if (j.contains("window")) {
      const auto w = j.at("window").get<std::vector<int>>();
      if (w.size() != 2 || w[0] < 0 || w[1] < w[0]) throw ConfigError("config: window must be [lo, hi]");
      c.window_lo = w[0];
      c.window_hi = w[1];
    }
    if (j.contains("verify_nmax")) c.verify_nmax = j.at("verify_nmax").get<int>();
    if (j.contains("distribution_exact_cap")) c.distribution_exact_cap = j.at("distribution_exact_cap").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  return from_json(read_json_file(path), std::filesystem::path(path).parent_path().string());
}

json ExperimentConfig::to_json() const {
  json j{{"presentation", presentation},
         {"construction", construction},
         {"action", action},
         {"n", n_values},
         {"region", region},
         {"samples", samples},
         {"seed", seed},
         {"exact_cap", exact_cap},
         {"drift_n", drift_n},
         {"drift_paths", drift_paths},
         {"subgroup", subgroup},
         {"word", word},
         {"c", c},
         {"r_values", r_values},
         {"shadow_center", shadow_center},
         {"window", {window_lo, window_hi}},
         {"verify_nmax", verify_nmax},
         {"distribution_exact_cap", distribution_exact_cap}};
  j["combing"] = combing_path ? json(*combing_path) : json(nullptr);
  j["order"] = order ? json(*order) : json(nullptr);
  j["epsilon"] = epsilon ? json(*epsilon) : json(nullptr);
  j["L_hat"] = L_hat ? json(*L_hat) : json(nullptr);
  return j;
}

std::string ExperimentConfig::hash() const { return fnv1a_hex(to_json().dump()); }

// ---------------------------------------------------------------------------
// Context

ExperimentContext ExperimentContext::create(const ExperimentConfig& config) {
  ExperimentContext ctx;
  ctx.presentation = std::make_shared<const PresentationGraph>(presentation_from_json(config.presentation));
  const PresentationGraph& p = *ctx.presentation;
  if (config.combing_path) {
    ctx.combing = load_combing_graph(*config.combing_path);
  } else {
    BuildOptions options;
    options.order = config.order;
    const bool recurrent = config.construction == "recurrent" ||
                           (config.construction == "auto" && p.num_vertices() >= 2 && is_anticonnected(p.lambda()));
    options.construction = recurrent ? Construction::Recurrent : Construction::HermillerMeier;
    ctx.build = build_combing(p, options);
    ctx.combing = ctx.build->combing.graph;
  }
  require_valid(ctx.combing);
  if (config.action.is_null()) {
    // Default: a free product acts on its own tree when its factors allow it.
    if (p.lambda().num_edges() == 0) {
      try {
        ctx.action = std::make_shared<const ActionHandle>(make_identity_action(p));
      } catch (const ConfigError&) {
      }
    }
  } else {
    ctx.action = std::make_shared<const ActionHandle>(make_action(p, config.action));
  }
  ctx.label_generator = label_to_generator(ctx.combing, p);
  for (std::size_t l = 0; l < ctx.label_generator.size(); ++l) {
    if (ctx.label_generator[l] < 0) {
      throw ConfigError("combing label '" + ctx.combing.alphabet().token(static_cast<LabelId>(l)) +
                        "' is not a generator of the presentation");
    }
    ctx.label_letter.push_back(ctx.action ? ctx.action->generator_letter(ctx.label_generator[l]) : -1);
  }
  return ctx;
}

Word ExperimentContext::image(std::span<const EdgeId> edges) const {
  Word w;
  const FreeProductSpace& space = action->space();
  for (EdgeId e : edges) {
    const int l = label_letter[combing.edge(e).label];
    if (l >= 0) space.push(w, l);
  }
  return w;
}

GPElement ExperimentContext::element(std::span<const EdgeId> edges) const {
  std::vector<int> gens;
  for (EdgeId e : edges) gens.push_back(label_generator[combing.edge(e).label]);
  return evaluate_word(*presentation, gens);
}

// ---------------------------------------------------------------------------
// Measurement engines

std::vector<FractionEstimate> measure_fractions(const CombingGraph& graph, int n, int num_events, const PathEvents& events,
                                                bool ball, std::uint64_t exact_cap, std::uint64_t samples,
                                                std::uint64_t seed, std::uint64_t stream) {
  const PathCountTable table = count_spheres(graph, n);
  const BigInt total = ball ? table.ball(n) : table.sphere(n);
  std::vector<FractionEstimate> out(num_events);
  if (total == 0) throw std::domain_error("measure_fractions: empty sphere");
  if (total <= exact_cap) {
    std::vector<std::uint64_t> hits(num_events, 0);
    std::vector<char> h(num_events);
    for (int k = ball ? 0 : n; k <= n; ++k) {
      for_each_path(
          graph, graph.initial(), k,
          [&](std::span<const EdgeId> edges, VertexId end) {
            std::fill(h.begin(), h.end(), 0);
            events(edges, end, h);
            for (int i = 0; i < num_events; ++i) hits[i] += h[i] ? 1 : 0;
          },
          exact_cap);
    }
    for (int i = 0; i < num_events; ++i) {
      out[i].exact = true;
      out[i].value = Rational(BigInt(hits[i]), total);
      out[i].estimate = out[i].ci_low = out[i].ci_high = to_double(out[i].value);
    }
    return out;
  }
  UniformPathSampler sampler(graph, n);
  std::vector<BigInt> prefix;  // cumulative sphere sizes for ball sampling
  if (ball) {
    BigInt acc = 0;
    for (int k = 0; k <= n; ++k) {
      acc += table.sphere(k);
      prefix.push_back(acc);
    }
  }
  const Rng base(seed, stream);
  auto partial = run_chunks<std::vector<std::uint64_t>>(num_chunks(samples), [&](std::uint64_t chunk) {
    Rng rng = base.substream(chunk);
    std::vector<std::uint64_t> hits(num_events, 0);
    std::vector<char> h(num_events);
    for (std::uint64_t i = 0; i < chunk_size(chunk, samples); ++i) {
      GraphPath path;
      if (ball) {
        BigInt r = rng.below(total);
        int k = 0;
        while (r >= prefix[k]) ++k;
        if (k > 0) r -= prefix[k - 1];
        path = sampler.unrank(k, r);
      } else {
        path = sampler.sample(n, rng);
      }
      std::fill(h.begin(), h.end(), 0);
      events(path.edges, path.end(graph), h);
      for (int e = 0; e < num_events; ++e) hits[e] += h[e] ? 1 : 0;
    }
    return hits;
  });
  for (int e = 0; e < num_events; ++e) {
    std::uint64_t hits = 0;
    for (const auto& p : partial) hits += p[e];
    out[e] = from_counts(hits, samples);
  }
  return out;
}

std::vector<FractionEstimate> markov_fractions(const CombingGraph& graph, const MarkovChain& chain, int n,
                                               int num_events, const PathEvents& events, std::uint64_t samples,
                                               std::uint64_t seed, std::uint64_t stream) {
  const Rng base(seed, stream);
  auto partial = run_chunks<std::vector<std::uint64_t>>(num_chunks(samples), [&](std::uint64_t chunk) {
    Rng rng = base.substream(chunk);
    std::vector<std::uint64_t> hits(num_events, 0);
    std::vector<char> h(num_events);
    for (std::uint64_t i = 0; i < chunk_size(chunk, samples); ++i) {
      const GraphPath path = sample_markov_path(graph, chain, n, rng);
      std::fill(h.begin(), h.end(), 0);
      events(path.edges, path.end(graph), h);
      for (int e = 0; e < num_events; ++e) hits[e] += h[e] ? 1 : 0;
    }
    return hits;
  });
  std::vector<FractionEstimate> out(num_events);
  for (int e = 0; e < num_events; ++e) {
    std::uint64_t hits = 0;
    for (const auto& p : partial) hits += p[e];
    out[e] = from_counts(hits, samples);
  }
  return out;
}

DriftResult estimate_drift(const ExperimentContext& ctx, const MarkovChain& chain, int n, std::uint64_t paths,
                           std::uint64_t seed) {
  if (n <= 0) throw ConfigError("drift: path length must be positive");
  const GrowthClassification gc = classify_growth(ctx.combing);
  struct Acc {
    std::map<int, std::tuple<std::uint64_t, double, double>> by_component;  // count, sum, sum of squares
  };
  const Rng base(seed, 0xd71f7ULL + static_cast<std::uint64_t>(n));
  auto partial = run_chunks<Acc>(num_chunks(paths), [&](std::uint64_t chunk) {
    Rng rng = base.substream(chunk);
    Acc acc;
    for (std::uint64_t i = 0; i < chunk_size(chunk, paths); ++i) {
      const GraphPath path = sample_markov_path(ctx.combing, chain, n, rng);
      const double rate = static_cast<double>(ctx.image(path.edges).size()) / n;
      const int c = gc.maximal[gc.scc_of[path.end(ctx.combing)]] ? gc.scc_of[path.end(ctx.combing)] : -1;
      auto& [cnt, sum, sq] = acc.by_component[c];
      ++cnt;
      sum += rate;
      sq += rate * rate;
    }
    return acc;
  });
  std::map<int, std::tuple<std::uint64_t, double, double>> total;
  for (const Acc& a : partial) {
    for (const auto& [c, v] : a.by_component) {
      auto& [cnt, sum, sq] = total[c];
      cnt += std::get<0>(v);
      sum += std::get<1>(v);
      sq += std::get<2>(v);
    }
  }
  DriftResult r;
  r.n = n;
  r.L_hat = std::numeric_limits<double>::infinity();
  for (const auto& [c, v] : total) {
    const auto [cnt, sum, sq] = v;
    DriftEstimate d;
    d.component = c;
    d.paths = cnt;
    d.mean = sum / static_cast<double>(cnt);
    const double var = cnt > 1 ? std::max(0.0, (sq - sum * d.mean) / static_cast<double>(cnt - 1)) : 0.0;
    const double half = kZ99 * std::sqrt(var / static_cast<double>(cnt));
    d.ci_low = d.mean - half;
    d.ci_high = d.mean + half;
    r.components.push_back(d);
    if (c >= 0) r.L_hat = std::min(r.L_hat, d.mean);
  }
  if (!std::isfinite(r.L_hat)) throw ValidationError("drift: no sampled path reached a recurrent component");
  return r;
}

std::vector<Rational> special_subgroup_density(const CombingGraph& graph, const PresentationGraph& p,
                                               const std::vector<int>& vertices, int n_max) {
  const std::vector<int> gen = label_to_generator(graph, p);
  std::vector<bool> inside(graph.alphabet().size(), false);
  for (std::size_t l = 0; l < gen.size(); ++l) {
    if (gen[l] < 0) throw ConfigError("subgroup density: unknown combing label");
    const int v = p.generators()[gen[l]].vertex;
    inside[l] = std::find(vertices.begin(), vertices.end(), v) != vertices.end();
  }
  // A geodesic word lies in a special subgroup iff all its letters do.
  LabelMonitor monitor;
  monitor.num_states = 2;
  monitor.initial_state = 0;
  monitor.step = [&inside](int s, LabelId l) { return s == 0 && inside[l] ? 0 : 1; };
  monitor.accept = [](int s) { return s == 0; };
  const std::vector<BigInt> in_h = count_with_monitor(graph, monitor, n_max);
  const PathCountTable table = count_spheres(graph, n_max);
  std::vector<Rational> out;
  BigInt h = 0, all = 0;
  for (int n = 0; n <= n_max; ++n) {
    h += in_h[n];
    all += table.sphere(n);
    out.emplace_back(h, all);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

void add_fraction(Report& r, int n, const std::string& stat, const FractionEstimate& f, std::uint64_t seed) {
  if (f.exact) {
    r.add_exact(n, stat, f.value);
  } else {
    r.add_estimate(n, stat, f.estimate, f.ci_low, f.ci_high, f.samples, seed);
  }
}

struct Prepared {
  ExperimentContext ctx;
  std::optional<PerronData> perron;
  std::optional<MarkovChain> chain;
};

Prepared prepare(const ExperimentConfig& config, bool need_chain, bool need_action = true) {
  Prepared p{ExperimentContext::create(config), std::nullopt, std::nullopt};
  if (need_action && !p.ctx.action) throw ConfigError("this experiment needs an 'action' unless the defining graph is edgeless");
  if (need_chain) {
    p.perron = perron(p.ctx.combing);
    p.chain = build_markov(p.ctx.combing, *p.perron);
  }
  return p;
}

void describe(Report& r, const ExperimentConfig& config, const ExperimentContext& ctx) {
  r.meta()["config"] = config.to_json();
  r.meta()["action"] = ctx.action ? ctx.action->to_json() : json(nullptr);
  if (ctx.build) {
    json order = json::array();
    for (int v : ctx.build->order) order.push_back(ctx.presentation->lambda().name(v));
    r.meta()["order"] = order;
    r.meta()["construction"] = ctx.build->construction;
    r.meta()["flags"] = ctx.build->flags;
  }
  r.meta()["threads_independent"] = true;
}

// L-hat from the config or from the Markov drift; records both rows.
std::pair<double, double> drift_threshold(Report& r, const ExperimentConfig& config, const Prepared& prep) {
  double L;
  if (config.L_hat) {
    L = *config.L_hat;
    r.add_value(std::nullopt, "L_hat", L);
  } else {
    const DriftResult d = estimate_drift(prep.ctx, *prep.chain, config.drift_n, config.drift_paths, config.seed);
    L = d.L_hat;
    double lo = L, hi = L;
    for (const auto& c : d.components) {
      if (c.component >= 0 && c.mean == L) {
        lo = c.ci_low;
        hi = c.ci_high;
      }
    }
    r.add_estimate(config.drift_n, "L_hat", L, lo, hi, config.drift_paths, config.seed);
  }
  const double eps = config.epsilon ? *config.epsilon : L / 2.0;
  r.add_value(std::nullopt, "epsilon", eps);
  return {L, eps};
}

bool meets(double value, double threshold) { return value + 1e-9 >= threshold; }

// Projection onto a direct factor that is a free group: translation length is
// positive iff the geodesic path uses a letter of the factor.
bool free_factor_projection(const ExperimentContext& ctx) {
  if (ctx.action->kind() != "factor_projection") return false;
  for (const auto& f : ctx.action->space().factors()) {
    if (f.involution) return false;
  }
  return !ctx.action->space().factors().empty();
}

std::vector<BigInt> kept_letter_counts(const ExperimentContext& ctx, int n_max) {
  std::vector<bool> kept(ctx.combing.alphabet().size(), false);
  for (std::size_t l = 0; l < kept.size(); ++l) kept[l] = ctx.label_letter[l] >= 0;
  LabelMonitor m;
  m.num_states = 2;
  m.initial_state = 0;
  m.step = [kept](int s, LabelId l) { return s == 1 || kept[l] ? 1 : 0; };
  m.accept = [](int s) { return s == 1; };
  return count_with_monitor(ctx.combing, m, n_max);
}

}  // namespace

Report exp_displacement(const ExperimentConfig& config) {
  Report r("displacement", config.hash());
  Prepared prep = prepare(config, true);
  describe(r, config, prep.ctx);
  const auto [L, eps] = drift_threshold(r, config, prep);
  const bool ball = config.region == "ball";
  for (int n : config.n_values) {
    const double threshold = (L - eps) * n;
    auto f = measure_fractions(
        prep.ctx.combing, n, 1,
        [&](std::span<const EdgeId> edges, VertexId, std::vector<char>& h) {
          h[0] = meets(static_cast<double>(prep.ctx.image(edges).size()), threshold);
        },
        ball, config.exact_cap, config.samples, config.seed, 1000 + n);
    add_fraction(r, n, "frac_displacement_ge_threshold", f[0], config.seed);
  }
  return r;
}

Report exp_translation_genericity(const ExperimentConfig& config) {
  Report r("translation-genericity", config.hash());
  Prepared prep = prepare(config, true);
  describe(r, config, prep.ctx);
  const auto [L, eps] = drift_threshold(r, config, prep);
  const bool ball = config.region == "ball";
  const FreeProductSpace& space = prep.ctx.action->space();

  std::optional<std::vector<BigInt>> lox_counts;
  std::optional<PathCountTable> table;
  if (free_factor_projection(prep.ctx)) {
    const int n_max = *std::max_element(config.n_values.begin(), config.n_values.end());
    lox_counts = kept_letter_counts(prep.ctx, n_max);
    table = count_spheres(prep.ctx.combing, n_max);
    // The shortcut is cross-checked against the cyclic-reduction oracle where enumeration is cheap.
    for (int n = 0; n <= std::min(n_max, 6); ++n) {
      std::uint64_t lox = 0;
      for_each_path(prep.ctx.combing, prep.ctx.combing.initial(), n, [&](std::span<const EdgeId> edges, VertexId) {
        lox += translation_length_exact_tree(space, prep.ctx.image(edges)) > 0 ? 1 : 0;
      });
      if (BigInt(lox) != (*lox_counts)[n]) throw std::logic_error("loxodromic count shortcut disagrees with the oracle");
    }
    r.meta()["loxodromic_mode"] = "dynamic programming over factor letters";
  }
  for (int n : config.n_values) {
    const double threshold = (L - eps) * n;
    auto f = measure_fractions(
        prep.ctx.combing, n, 2,
        [&](std::span<const EdgeId> edges, VertexId, std::vector<char>& h) {
          const std::int64_t tau = translation_length_exact_tree(space, prep.ctx.image(edges));
          h[0] = tau > 0;
          h[1] = meets(static_cast<double>(tau), threshold);
        },
        ball, config.exact_cap, config.samples, config.seed, 2000 + n);
    if (lox_counts) {
      BigInt lox = 0, all = 0;
      for (int k = ball ? 0 : n; k <= n; ++k) {
        lox += (*lox_counts)[k];
        all += table->sphere(k);
      }
      r.add_exact(n, "frac_loxodromic", Rational(lox, all));
    } else {
      add_fraction(r, n, "frac_loxodromic", f[0], config.seed);
    }
    add_fraction(r, n, "frac_translation_ge_threshold", f[1], config.seed);
  }
  return r;
}

Report exp_markov_genericity(const ExperimentConfig& config) {
  Report r("markov-genericity", config.hash());
  Prepared prep = prepare(config, true);
  describe(r, config, prep.ctx);
  const auto [L, eps] = drift_threshold(r, config, prep);
  const FreeProductSpace& space = prep.ctx.action->space();
  for (int n : config.n_values) {
    const double threshold = (L - eps) * n;
    auto f = markov_fractions(
        prep.ctx.combing, *prep.chain, n, 2,
        [&](std::span<const EdgeId> edges, VertexId, std::vector<char>& h) {
          const std::int64_t tau = translation_length_exact_tree(space, prep.ctx.image(edges));
          h[0] = tau > 0;
          h[1] = meets(static_cast<double>(tau), threshold);
        },
        config.samples, config.seed, 3000 + n);
    add_fraction(r, n, "P_loxodromic", f[0], config.seed);
    add_fraction(r, n, "P_translation_ge_threshold", f[1], config.seed);
  }
  const DriftResult d = estimate_drift(prep.ctx, *prep.chain, config.drift_n, config.drift_paths, config.seed + 1);
  for (const auto& c : d.components) {
    r.add_estimate(config.drift_n, "drift_component_" + std::to_string(c.component), c.mean, c.ci_low, c.ci_high,
                   c.paths, config.seed + 1);
  }
  return r;
}

Report exp_drift(const ExperimentConfig& config) {
  Report r("drift", config.hash());
  Prepared prep = prepare(config, true);
  describe(r, config, prep.ctx);
  const DriftResult d = estimate_drift(prep.ctx, *prep.chain, config.drift_n, config.drift_paths, config.seed);
  for (const auto& c : d.components) {
    r.add_estimate(config.drift_n, "drift_component_" + std::to_string(c.component), c.mean, c.ci_low, c.ci_high,
                   c.paths, config.seed);
  }
  for (const auto& c : d.components) {
    if (c.component >= 0 && c.mean == d.L_hat) {
      r.add_estimate(config.drift_n, "L_hat", d.L_hat, c.ci_low, c.ci_high, c.paths, config.seed);
      break;
    }
  }
  for (int n : config.n_values) {
    const DriftResult dn = estimate_drift(prep.ctx, *prep.chain, n, config.drift_paths, config.seed);
    r.add_estimate(n, "drift_rate", dn.L_hat, dn.L_hat, dn.L_hat, config.drift_paths, config.seed);
  }
  return r;
}

Report exp_subgroup_density(const ExperimentConfig& config) {
  Report r("subgroup-density", config.hash());
  Prepared prep = prepare(config, false, false);
  describe(r, config, prep.ctx);
  const PresentationGraph& p = *prep.ctx.presentation;
  if (config.subgroup.empty()) throw ConfigError("subgroup-density: 'subgroup' must list generating vertices");
  std::vector<int> vertices;
  for (const auto& name : config.subgroup) {
    const auto idx = p.lambda().index_of(name);
    if (!idx) throw ConfigError("subgroup-density: unknown vertex '" + name + "'");
    vertices.push_back(*idx);
  }
  const int n_max = *std::max_element(config.n_values.begin(), config.n_values.end());
  const std::vector<Rational> density = special_subgroup_density(prep.ctx.combing, p, vertices, n_max);

  // Membership oracle on the normal form, compared with the label criterion on small balls.
  const int check_n = std::min(n_max, 6);
  BigInt in_h = 0, all = 0;
  for (int n = 0; n <= check_n; ++n) {
    for_each_path(
        prep.ctx.combing, prep.ctx.combing.initial(), n,
        [&](std::span<const EdgeId> edges, VertexId) {
          const GPElement g = prep.ctx.element(edges);
          const bool member = std::all_of(g.syllables().begin(), g.syllables().end(), [&](const Syllable& s) {
            return std::find(vertices.begin(), vertices.end(), s.vertex) != vertices.end();
          });
          ++all;
          if (member) ++in_h;
        },
        config.exact_cap);
    if (Rational(in_h, all) != density[n]) throw std::logic_error("subgroup density disagrees with membership oracle");
  }
  r.add_exact(check_n, "oracle_agreement_up_to_n", std::to_string(check_n));
  for (int n : config.n_values) r.add_exact(n, "density_ball", density[n]);
  return r;
}

Report exp_gromov_products(const ExperimentConfig& config) {
  Report r("gromov-products", config.hash());
  Prepared prep = prepare(config, false);
  describe(r, config, prep.ctx);
  const FreeProductSpace& space = prep.ctx.action->space();
  const CombingGraph& graph = prep.ctx.combing;
  for (int n : config.n_values) {
    const int n1 = n / 2;
    // Twice the three Gromov products of each sampled element.
    auto eval = [&](std::span<const EdgeId> edges) {
      const Word g = prep.ctx.image(edges);
      const Word i = prep.ctx.image(edges.subspan(0, n1));
      const Word t = prep.ctx.image(edges.subspan(n1));
      return std::array<std::int64_t, 3>{space.gromov_product(g, space.invert(g)).twice,
                                         space.gromov_product(i, space.invert(t)).twice,
                                         space.gromov_product(i, g).twice};
    };
    std::vector<std::array<std::int64_t, 3>> values;
    bool exact = false;
    const PathCountTable table = count_spheres(graph, n);
    if (table.sphere(n) <= config.distribution_exact_cap) {
      exact = true;
      for_each_path(graph, graph.initial(), n, [&](std::span<const EdgeId> edges, VertexId) { values.push_back(eval(edges)); });
    } else {
      UniformPathSampler sampler(graph, n);
      const Rng base(config.seed, 4000 + n);
      auto parts = run_chunks<std::vector<std::array<std::int64_t, 3>>>(num_chunks(config.samples), [&](std::uint64_t chunk) {
        Rng rng = base.substream(chunk);
        std::vector<std::array<std::int64_t, 3>> v;
        for (std::uint64_t i = 0; i < chunk_size(chunk, config.samples); ++i) v.push_back(eval(sampler.sample(n, rng).edges));
        return v;
      });
      for (auto& p : parts) values.insert(values.end(), p.begin(), p.end());
    }
    static const char* names[3] = {"g_ginv", "i_tinv", "i_g"};
    for (int s = 0; s < 3; ++s) {
      std::vector<std::int64_t> col;
      for (const auto& v : values) col.push_back(v[s]);
      std::sort(col.begin(), col.end());
      const std::int64_t sum = std::accumulate(col.begin(), col.end(), std::int64_t{0});
      const std::string base = std::string("gromov_") + names[s];
      const std::string median = to_string(HalfInt{col[col.size() / 2]});
      const std::string maximum = to_string(HalfInt{col.back()});
      if (exact) {
        r.add_exact(n, base + "_mean", Rational(BigInt(sum), BigInt(2 * col.size())));
        r.add_exact(n, base + "_median", median);
        r.add_exact(n, base + "_max", maximum);
      } else {
        const double mean = static_cast<double>(sum) / (2.0 * static_cast<double>(col.size()));
        r.add_estimate(n, base + "_mean", mean, mean, mean, config.samples, config.seed);
        r.add_estimate(n, base + "_median", parse_cell(median), parse_cell(median), parse_cell(median), config.samples,
                       config.seed);
        r.add_estimate(n, base + "_max", parse_cell(maximum), parse_cell(maximum), parse_cell(maximum), config.samples,
                       config.seed);
      }
    }
    std::uint64_t i_g_full = 0, big = 0;
    for (const auto& v : values) {
      i_g_full += v[2] == 2 * n1 ? 1 : 0;
      big += 10 * v[0] > 2 * n ? 1 : 0;
    }
    if (exact) {
      r.add_exact(n, "frac_i_g_equals_half_length", Rational(BigInt(i_g_full), BigInt(values.size())));
      r.add_exact(n, "frac_g_ginv_above_n_over_10", Rational(BigInt(big), BigInt(values.size())));
    } else {
      const FractionEstimate a = from_counts(i_g_full, values.size()), b = from_counts(big, values.size());
      r.add_estimate(n, "frac_i_g_equals_half_length", a.estimate, a.ci_low, a.ci_high, a.samples, config.seed);
      r.add_estimate(n, "frac_g_ginv_above_n_over_10", b.estimate, b.ci_low, b.ci_high, b.samples, config.seed);
    }
  }
  return r;
}

namespace {

std::vector<int> parse_generator_word(const PresentationGraph& p, const std::string& text) {
  std::istringstream in(text);
  std::string tok;
  std::vector<int> word;
  while (in >> tok) {
    const int g = p.generator_index(tok);
    if (g < 0) throw ConfigError("unknown generator token '" + tok + "'");
    word.push_back(g);
  }
  return word;
}

}  // namespace

Report exp_shadow_decay(const ExperimentConfig& config) {
  Report r("shadow-decay", config.hash());
  Prepared prep = prepare(config, true);
  describe(r, config, prep.ctx);
  const FreeProductSpace& space = prep.ctx.action->space();
  const CombingGraph& graph = prep.ctx.combing;
  Word y;
  if (config.shadow_center.empty()) {
    const UniformPathSampler sampler(graph, 6);
    y = prep.ctx.image(sampler.unrank(6, 0).edges);
  } else {
    y = prep.ctx.action->image(evaluate_word(*prep.ctx.presentation, parse_generator_word(*prep.ctx.presentation, config.shadow_center)));
  }
  const auto dy = static_cast<int>(y.size());
  std::vector<int> rs = config.r_values;
  if (rs.empty()) {
    for (int v = 0; v <= dy; ++v) rs.push_back(v);
  }
  std::sort(rs.begin(), rs.end());
  r.meta()["shadow_center"] = space.to_string(y);
  r.add_exact(std::nullopt, "center_distance", std::to_string(dy));
  std::vector<Shadow> shadows;
  for (int v : rs) shadows.push_back(Shadow{{}, y, HalfInt::from_int(dy - v)});
  const int k = static_cast<int>(shadows.size());

  for (int n : config.n_values) {
    auto f = measure_fractions(
        graph, n, k,
        [&](std::span<const EdgeId> edges, VertexId, std::vector<char>& h) {
          const Word z = prep.ctx.image(edges);
          for (int i = 0; i < k; ++i) h[i] = in_shadow(space, shadows[i], z);
        },
        false, config.exact_cap, config.samples, config.seed, 5000 + n);
    bool monotone = true;
    for (int i = 0; i < k; ++i) {
      add_fraction(r, n, "P_shadow_r" + std::to_string(rs[i]), f[i], config.seed);
      if (i > 0) {
        monotone = monotone && (f[i].exact && f[i - 1].exact ? f[i].value <= f[i - 1].value : f[i].estimate <= f[i - 1].estimate);
      }
    }
    r.add_exact(n, "monotone_in_r", monotone ? "1" : "0");
  }
  // Markov: does the walk ever enter the shadow before the largest horizon?
  const int horizon = *std::max_element(config.n_values.begin(), config.n_values.end());
  auto f = markov_fractions(
      graph, *prep.chain, horizon, k,
      [&](std::span<const EdgeId> edges, VertexId, std::vector<char>& h) {
        Word z;
        for (std::size_t step = 0; step <= edges.size(); ++step) {
          if (step > 0) {
            const int l = prep.ctx.label_letter[graph.edge(edges[step - 1]).label];
            if (l >= 0) space.push(z, l);
          }
          for (int i = 0; i < k; ++i) h[i] = h[i] || in_shadow(space, shadows[i], z);
        }
      },
      config.samples, config.seed, 5999);
  for (int i = 0; i < k; ++i) add_fraction(r, horizon, "P_markov_hits_shadow_r" + std::to_string(rs[i]), f[i], config.seed);
  return r;
}

Report exp_quasitightness(const ExperimentConfig& config) {
  Report r("quasitightness", config.hash());
  Prepared prep = prepare(config, false, false);
  describe(r, config, prep.ctx);
  const PresentationGraph& p = *prep.ctx.presentation;
  const GPElement w = evaluate_word(p, parse_generator_word(p, config.word));
  const std::vector<GPElement> ball = ball_elements(p, config.c);
  GPElementSet targets;
  for (const auto& a : ball) {
    for (const auto& b : ball) targets.insert(multiply(p, multiply(p, a, w), b));
  }
  const std::int64_t wl = word_length(p, w);
  const int lo = static_cast<int>(std::max<std::int64_t>(0, wl - 2 * config.c));
  const int hi = static_cast<int>(wl + 2 * config.c);
  const bool degenerate = targets.contains(GPElement{});
  r.add_exact(std::nullopt, "word_length", std::to_string(wl));
  r.add_exact(std::nullopt, "targets", std::to_string(targets.size()));
  r.add_exact(std::nullopt, "degenerate", degenerate ? "1" : "0");
  const CombingGraph& graph = prep.ctx.combing;
  for (int n : config.n_values) {
    auto f = measure_fractions(
        graph, n, 1,
        [&](std::span<const EdgeId> edges, VertexId, std::vector<char>& h) {
          bool contains = lo == 0 && degenerate;
          for (std::size_t i = 0; i < edges.size() && !contains; ++i) {
            GPElement g;
            for (int len = 1; len <= hi && i + len <= edges.size(); ++len) {
              g = times_generator(p, g, prep.ctx.label_generator[graph.edge(edges[i + len - 1]).label]);
              if (len >= lo && targets.contains(g)) {
                contains = true;
                break;
              }
            }
          }
          h[0] = !contains;
        },
        false, config.exact_cap, config.samples, config.seed, 6000 + n);
    add_fraction(r, n, "P_avoiding", f[0], config.seed);
  }
  return r;
}

Report exp_exact_growth(const ExperimentConfig& config) {
  Report r("exact-growth", config.hash());
  Prepared prep = prepare(config, true, false);
  describe(r, config, prep.ctx);
  const GrowthConstant g = growth_constant(prep.ctx.combing, *prep.perron, config.window_lo, config.window_hi);
  r.add_value(std::nullopt, "lambda", prep.perron->lambda);
  if (g.integer_lambda) r.add_exact(std::nullopt, "lambda_exact", std::to_string(*g.integer_lambda));
  r.add_exact(std::nullopt, "period", std::to_string(g.period));
  for (std::size_t i = 0; i < g.n.size(); ++i) {
    r.add_exact(g.n[i], "Sn", g.sphere[i]);
    if (g.integer_lambda) {
      r.add_exact(g.n[i], "Sn_over_lambda_n", g.exact_ratio[i]);
    } else {
      r.add_value(g.n[i], "Sn_over_lambda_n", g.ratio[i]);
    }
  }
  if (g.sphere.size() >= 2 && g.sphere[g.sphere.size() - 2] != 0) {
    r.add_value(g.n.back(), "ratio_Sn_over_Sn_minus_1",
                to_double(Rational(g.sphere.back(), g.sphere[g.sphere.size() - 2])));
  }
  r.add_value(std::nullopt, "C", g.C);
  if (g.exact_C) r.add_exact(std::nullopt, "C_exact", *g.exact_C);
  if (g.period > 1) {
    for (int res = 0; res < g.period; ++res) r.add_value(std::nullopt, "C_residue_" + std::to_string(res), g.subsequence_C[res]);
  }
  if (g.ratio.size() >= 2) {
    r.add_value(std::nullopt, "relative_change_window",
                std::abs(g.ratio.back() - g.ratio.front()) / std::abs(g.ratio.front()));
  }
  if (config.verify_nmax >= 0) {
    const CombingCertificate cert = verify_combing(prep.ctx.combing, *prep.ctx.presentation, config.verify_nmax);
    r.add_exact(std::nullopt, "verify_nmax", std::to_string(config.verify_nmax));
    r.add_exact(std::nullopt, "verify_passed", cert.passed ? "1" : "0");
    r.meta()["certificate"] = cert.to_json();
  }
  return r;
}

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids = {"displacement",      "translation-genericity", "markov-genericity",
                                               "drift",             "subgroup-density",       "gromov-products",
                                               "shadow-decay",      "quasitightness",         "exact-growth"};
  return ids;
}

Report run_experiment(const std::string& id, const ExperimentConfig& config) {
  if (id == "displacement") return exp_displacement(config);
  if (id == "translation-genericity") return exp_translation_genericity(config);
  if (id == "markov-genericity") return exp_markov_genericity(config);
  if (id == "drift") return exp_drift(config);
  if (id == "subgroup-density") return exp_subgroup_density(config);
  if (id == "gromov-products") return exp_gromov_products(config);
  if (id == "shadow-decay") return exp_shadow_decay(config);
  if (id == "quasitightness") return exp_quasitightness(config);
  if (id == "exact-growth") return exp_exact_growth(config);
  throw ConfigError("unknown experiment '" + id + "'");
}

}  // namespace loxolab
