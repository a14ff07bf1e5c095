#pragma once

// Counting experiments over a combed graph product acting on a tree. Every
// statistic is computed exactly (enumeration or dynamic programming) when the
// sphere is small enough, and otherwise estimated from seeded samples.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "loxolab/combing_builder.hpp"
#include "loxolab/graph_core.hpp"
#include "loxolab/group_kernel.hpp"
#include "loxolab/hyp_action.hpp"
#include "loxolab/report.hpp"
#include "loxolab/spectral_markov.hpp"

namespace loxolab {

struct ExperimentConfig {
  nlohmann::json presentation;            // inline presentation (paths are resolved on load)
  std::optional<std::string> combing_path;
  std::optional<std::vector<std::string>> order;
  std::string construction = "auto";      // auto | recurrent | hm
  nlohmann::json action;                  // inline action spec; null = identity on free groups
  std::vector<int> n_values;
  std::string region = "sphere";          // sphere | ball
  std::uint64_t samples = 100000;
  std::uint64_t seed = 1;
  std::uint64_t exact_cap = kDefaultPathCap;
  std::optional<double> epsilon;
  std::optional<double> L_hat;
  int drift_n = 200;
  std::uint64_t drift_paths = 10000;
  std::vector<std::string> subgroup;      // vertex names spanning a special subgroup
  std::string word;                       // quasitightness word, generator tokens
  int c = 1;
  std::vector<int> r_values;
  std::string shadow_center;              // generator tokens; empty = first path of length 6
  int window_lo = 30;
  int window_hi = 40;
  int verify_nmax = 8;
  std::uint64_t distribution_exact_cap = 100000;

  static ExperimentConfig from_json(const nlohmann::json& j, const std::string& base_dir = ".");
  static ExperimentConfig load(const std::string& path);
  /// Canonical form: sorted keys, every field explicit. Hashed into reports.
  nlohmann::json to_json() const;
  std::string hash() const;
};

/// Everything an experiment acts on, built once from a config.
struct ExperimentContext {
  std::shared_ptr<const PresentationGraph> presentation;
  CombingGraph combing;
  std::optional<CombingBuild> build;
  std::shared_ptr<const ActionHandle> action;
  std::vector<int> label_generator;  // combing label -> presentation generator
  std::vector<int> label_letter;     // combing label -> tree letter or -1

  static ExperimentContext create(const ExperimentConfig& config);
  Word image(std::span<const EdgeId> edges) const;
  GPElement element(std::span<const EdgeId> edges) const;
};

/// Worker threads for Monte Carlo loops: hardware concurrency capped by LOXOLAB_THREADS.
unsigned worker_threads();

struct FractionEstimate {
  bool exact = true;
  Rational value = 0;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t samples = 0;
};

using PathEvents = std::function<void(std::span<const EdgeId> edges, VertexId end, std::vector<char>& hits)>;

/// Fractions of S_n (or B_n) satisfying each of `events` indicators; exact by
/// enumeration under the cap, otherwise sampled in fixed-size chunks whose
/// random streams depend only on (seed, stream, chunk index).
std::vector<FractionEstimate> measure_fractions(const CombingGraph& graph, int n, int num_events, const PathEvents& events,
                                                bool ball, std::uint64_t exact_cap, std::uint64_t samples,
                                                std::uint64_t seed, std::uint64_t stream);

/// Markov-measure fractions from `samples` chain paths of length n.
std::vector<FractionEstimate> markov_fractions(const CombingGraph& graph, const MarkovChain& chain, int n,
                                               int num_events, const PathEvents& events, std::uint64_t samples,
                                               std::uint64_t seed, std::uint64_t stream);

struct DriftEstimate {
  int component = -1;
  std::uint64_t paths = 0;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct DriftResult {
  int n = 0;
  std::vector<DriftEstimate> components;
  double L_hat = 0.0;
};

DriftResult estimate_drift(const ExperimentContext& ctx, const MarkovChain& chain, int n, std::uint64_t paths,
                           std::uint64_t seed);

/// Exact ratio #(H and B_n) / #B_n for the special subgroup on `vertices`.
std::vector<Rational> special_subgroup_density(const CombingGraph& graph, const PresentationGraph& p,
                                               const std::vector<int>& vertices, int n_max);

Report exp_displacement(const ExperimentConfig& config);
Report exp_translation_genericity(const ExperimentConfig& config);
Report exp_markov_genericity(const ExperimentConfig& config);
Report exp_drift(const ExperimentConfig& config);
Report exp_subgroup_density(const ExperimentConfig& config);
Report exp_gromov_products(const ExperimentConfig& config);
Report exp_shadow_decay(const ExperimentConfig& config);
Report exp_quasitightness(const ExperimentConfig& config);
Report exp_exact_growth(const ExperimentConfig& config);

const std::vector<std::string>& experiment_ids();
/// Throws ConfigError for an unknown id.
Report run_experiment(const std::string& id, const ExperimentConfig& config);

}  // namespace loxolab
