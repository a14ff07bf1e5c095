#pragma once

// Isometric actions on trees. The space is the Cayley tree of a free product
// of Z and Z/2 factors with basepoint x = identity, so delta = 0 and every
// quantity below is exact. A graph product acts through a homomorphism that
// kills all vertex groups outside a set of pairwise non-adjacent vertices.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "loxolab/group_kernel.hpp"
#include "loxolab/numeric.hpp"
#include "loxolab/rng.hpp"

namespace loxolab {

/// Reduced word in the letters of a FreeProductSpace; also a vertex of its tree.
using Word = std::vector<int>;

struct TreeFactor {
  std::string name;
  bool involution = false;  // Z/2 factor; otherwise Z
};

class FreeProductSpace {
 public:
  explicit FreeProductSpace(std::vector<TreeFactor> factors);

  const std::vector<TreeFactor>& factors() const { return factors_; }
  int num_letters() const { return static_cast<int>(tokens_.size()); }
  /// Letter for the factor's generator (sign +1) or its inverse (sign -1).
  int letter(int factor, int sign = 1) const;
  int inverse(int letter) const { return inverse_[letter]; }
  int factor_of(int letter) const { return factor_of_[letter]; }
  const std::string& token(int letter) const { return tokens_[letter]; }
  double delta() const { return 0.0; }

  /// Appends one letter to a reduced word, keeping it reduced.
  void push(Word& w, int letter) const;
  Word reduce(std::span<const int> letters) const;
  Word multiply(const Word& p, const Word& q) const;
  Word invert(const Word& p) const;
  bool is_reduced(const Word& w) const;

  std::int64_t dist(const Word& p, const Word& q) const;
  /// (p, q)_base from the distance formula.
  HalfInt gromov_product(const Word& p, const Word& q, const Word& base = {}) const;
  /// Common-prefix length of base^{-1} p and base^{-1} q (independent oracle).
  std::int64_t prefix_gromov_product(const Word& p, const Word& q, const Word& base = {}) const;

  Word parse(const std::string& text) const;  // whitespace-separated tokens
  std::string to_string(const Word& w) const;
  Word random_word(int length, Rng& rng) const;  // uniform reduced word of the given length

 private:
  std::vector<TreeFactor> factors_;
  std::vector<std::string> tokens_;
  std::vector<int> inverse_;
  std::vector<int> factor_of_;
  std::vector<std::pair<int, int>> letter_of_;  // per factor: (+1 letter, -1 letter)
};

std::size_t common_prefix(const Word& a, const Word& b);

// ---------------------------------------------------------------------------
// Translation length

struct TranslationEstimate {
  HalfInt value;            // max(0, d(x, gx) - 2 (gx, g^{-1}x)_x)
  bool hypothesis = false;  // d(x, gx) >= 2 (gx, g^{-1}x)_x
};

TranslationEstimate translation_length_estimate(const FreeProductSpace& space, const Word& g);

struct CyclicReduction {
  Word conjugator;  // u with g = u core u^{-1}
  Word core;        // cyclically reduced
};
CyclicReduction cyclic_reduction(const FreeProductSpace& space, const Word& g);

/// Length of the cyclic reduction; a lone involution letter is elliptic.
std::int64_t translation_length_exact_tree(const FreeProductSpace& space, const Word& g);
/// d(g^k x, x) / k for the given k.
double displacement_rate(const FreeProductSpace& space, const Word& g, int k);

/// Axis endpoints u core^{+inf} and u core^{-inf}, each given by a prefix
/// (conjugator) and a period; only meaningful for loxodromic g.
struct AxisEndpoint {
  Word prefix;
  Word period;
};
std::pair<AxisEndpoint, AxisEndpoint> axis_endpoints(const FreeProductSpace& space, const Word& g);
bool same_endpoint(const AxisEndpoint& a, const AxisEndpoint& b);
/// Both loxodromic with disjoint endpoint pairs.
bool independent_loxodromics(const FreeProductSpace& space, const Word& g, const Word& h);

// ---------------------------------------------------------------------------
// Shadows and fellow travelling

/// S_x(y, R) = { z : (y, z)_x >= d(x, y) - R }; distance parameter r = d(x, y) - R.
struct Shadow {
  Word x;
  Word y;
  HalfInt R;

  HalfInt distance_parameter(const FreeProductSpace& space) const;
};
bool in_shadow(const FreeProductSpace& space, const Shadow& s, const Word& z);

struct FellowTravelOutcome {
  bool hypotheses_met = false;
  bool conclusion_holds = true;
};

/// Fellow travelling with parameter delta_eff: hypotheses (a.b) >= A, (c.d) >= A,
/// (a.c) <= A - 3 delta_eff; conclusion |(b.d) - (a.c)| <= 2 delta_eff. For
/// delta = 0 the check runs with delta_eff = 1/3, which on trees (integer
/// products) means (a.c) <= A - 1 and exact equality (a.c) = (b.d).
FellowTravelOutcome fellow_travel_evaluate(const FreeProductSpace& space, const Word& a, const Word& b, const Word& c,
                                           const Word& d, HalfInt A, double delta_eff);
/// Returns whether the hypotheses held; throws std::logic_error when they held
/// and the conclusion failed.
bool fellow_travel_check(const FreeProductSpace& space, const Word& a, const Word& b, const Word& c, const Word& d,
                         HalfInt A);

// ---------------------------------------------------------------------------
// Actions of graph products

class ActionHandle {
 public:
  /// Keeps the vertex groups of `kept` (pairwise non-adjacent, each Z or Z/2);
  /// spot-checks the homomorphism property on `checks` random pairs.
  ActionHandle(PresentationGraph source, std::vector<int> kept, std::string kind, int checks = 1000,
               std::uint64_t seed = 7);

  const PresentationGraph& source() const { return *source_; }
  const FreeProductSpace& space() const { return *space_; }
  const VertexKillingHom& hom() const { return *hom_; }
  const std::string& kind() const { return kind_; }

  /// Tree letter of a source generator, -1 when it maps to the identity.
  int generator_letter(int gen) const { return gen_letter_[gen]; }
  Word image(const GPElement& g) const;
  Word image_of_generators(std::span<const int> generators) const;
  /// max over generators s of d(x, s x).
  std::int64_t lipschitz() const { return lipschitz_; }

  std::int64_t displacement(const GPElement& g) const;
  TranslationEstimate translation_estimate(const GPElement& g) const;
  std::int64_t translation_exact(const GPElement& g) const;

  nlohmann::json to_json() const;

 private:
  std::shared_ptr<const PresentationGraph> source_;
  std::shared_ptr<const VertexKillingHom> hom_;
  std::shared_ptr<const FreeProductSpace> space_;
  std::vector<int> gen_letter_;
  std::int64_t lipschitz_ = 0;
  std::string kind_;
};

/// Free group (edgeless Lambda) on its own tree.
ActionHandle make_identity_action(const PresentationGraph& p);
/// Projection onto the factor spanned by `keep` (a free product of its vertex groups).
ActionHandle make_projection_action(const PresentationGraph& p, const std::vector<std::string>& keep);
/// Quotient onto the free product of two non-adjacent vertex groups.
ActionHandle make_quotient_action(const PresentationGraph& p, const std::string& u, const std::string& v);
/// Kills everything: every element acts trivially.
ActionHandle make_trivial_action(const PresentationGraph& p);

/// {space:{type:"free_product", factors:[names]}, hom:{type, params:{keep:[names]}}}.
ActionHandle make_action(const PresentationGraph& p, const nlohmann::json& spec);
ActionHandle load_action(const PresentationGraph& p, const std::string& path);

/// Searches generator words of length <= search_depth (shortest first) for two
/// elements acting as independent loxodromics.
std::optional<std::pair<GPElement, GPElement>> find_independent_loxodromics(const ActionHandle& action,
                                                                            int search_depth);

}  // namespace loxolab
