#pragma once

// Perron-Frobenius data of a combing automaton, the associated Markov chain
// mu(v_i -> v_j) = M_ij rho_j / (lambda rho_i), sampling, return times and
// exact exponential growth constants.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "loxolab/graph_core.hpp"

namespace loxolab {

struct PerronData {
  double lambda = 0.0;
  /// Cesaro limit of N[i][n] / lambda^n, scaled so that max rho = 1; exactly 0
  /// on small-growth vertices.
  std::vector<double> rho;
  /// ||M rho - lambda rho||_inf / (lambda ||rho||_inf).
  double residual = 0.0;
  int iterations = 0;
  std::vector<GrowthClass> vertex_class;
};

/// Throws ValidationError when lambda <= 1 + 1e-9 (not an almost semisimple
/// candidate) and ConvergenceError when the averaged counts do not settle.
PerronData perron(const CombingGraph& graph);

struct MarkovChain {
  std::vector<double> mu;        // per edge
  std::vector<bool> absorbing;   // small-growth vertices carry an implicit self-loop of mass 1
  double row_sum_max_dev = 0.0;  // over large-growth vertices
};

/// Throws ValidationError when some row deviates from 1 by more than 1e-9.
MarkovChain build_markov(const CombingGraph& graph, const PerronData& perron);

/// w_n under P_{v0}. Paths from v0 never reach an absorbing vertex.
GraphPath sample_markov_path(const CombingGraph& graph, const MarkovChain& chain, int n, Rng& rng);
GraphPath sample_markov_path(const CombingGraph& graph, const MarkovChain& chain, int n, std::uint64_t seed);

/// Probability of a finite path under the chain started at its start vertex.
double path_probability(const CombingGraph& graph, const MarkovChain& chain, std::span<const EdgeId> edges);

struct TailFit {
  double slope = 0.0;      // of log P(tau = n) against n
  double intercept = 0.0;
  double r2 = 0.0;
  int n_lo = 0;
  int n_hi = 0;
};

struct FirstReturnStats {
  VertexId vertex = 0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  std::uint64_t truncated = 0;       // walks that did not return within max_steps
  std::vector<std::uint64_t> histogram;  // histogram[n] = returns at time n
  std::vector<double> exact;         // P(tau+ = n) from the taboo recursion, n <= horizon
  double exact_mass = 0.0;           // sum of `exact`
  double mean = 0.0;                 // empirical
  TailFit tail;                      // fitted on `exact`

  double empirical(int n) const;
};

/// Requires v in a maximal component (ValidationError otherwise).
FirstReturnStats first_return_stats(const CombingGraph& graph, const MarkovChain& chain, VertexId v,
                                    std::uint64_t num_samples, std::uint64_t seed, int horizon = 60,
                                    int max_steps = 100000, int fit_lo = 5, int fit_hi = 30);

TailFit fit_log_tail(const std::vector<double>& probabilities, int n_lo, int n_hi);

struct GrowthConstant {
  double lambda = 0.0;
  std::optional<std::int64_t> integer_lambda;  // set when lambda is certified to be this integer
  int period = 1;
  std::vector<int> n;
  std::vector<BigInt> sphere;
  std::vector<double> ratio;                 // #S_n / lambda^n
  std::vector<Rational> exact_ratio;         // when integer_lambda
  std::vector<double> increments;            // |ratio[k+1] - ratio[k]|
  double C = 0.0;                            // limit estimate (Cesaro over one period)
  std::optional<Rational> exact_C;           // when the exact window is constant on its last period
  std::vector<double> subsequence_C;         // per residue class mod period
};

/// Window [n_lo, n_hi] of #S_n / lambda^n. An integer lambda is certified by an
/// exact determinant det(M_C - kI) = 0 on a maximal component.
GrowthConstant growth_constant(const CombingGraph& graph, const PerronData& perron, int n_lo, int n_hi);

/// Maximal components; cross-checked against the closed classes of the chain.
std::vector<int> recurrent_components(const CombingGraph& graph, const MarkovChain& chain);

struct NamedPredicate {
  std::string name;
  PathPredicate predicate;
};

/// Twenty label- and vertex-based path events used for the counting vs Markov comparison.
std::vector<NamedPredicate> predicate_battery(const CombingGraph& graph);

struct MeasureComparison {
  std::vector<std::string> predicates;
  int n_max = 0;
  /// counting[k][n] = P^n(A_k and ends at a large vertex), markov[k][n] = P(w_n in A_k).
  std::vector<std::vector<double>> counting;
  std::vector<std::vector<double>> markov;
  /// Smallest c with every ratio in [1/c, c]; +inf when one side vanishes alone.
  double fitted_c = 1.0;
};

MeasureComparison compare_counting_markov(const CombingGraph& graph, const MarkovChain& chain,
                                          const std::vector<NamedPredicate>& battery, int n_max,
                                          std::uint64_t cap = kDefaultPathCap);

/// {lambda, rho, C_window, row_sum_max_dev, return_tail:{slope, r2}}.
nlohmann::json spectral_report(const CombingGraph& graph, int window_lo = 30, int window_hi = 40,
                               std::uint64_t return_samples = 10000, std::uint64_t seed = 1);

}  // namespace loxolab
