#include "loxolab/hyp_action.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "loxolab/errors.hpp"

namespace loxolab {

// ---------------------------------------------------------------------------
// FreeProductSpace

FreeProductSpace::FreeProductSpace(std::vector<TreeFactor> factors) : factors_(std::move(factors)) {
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    const int fi = static_cast<int>(f);
    const int plus = static_cast<int>(tokens_.size());
    tokens_.push_back(factors_[f].name);
    factor_of_.push_back(fi);
    if (factors_[f].involution) {
      inverse_.push_back(plus);
      letter_of_.push_back({plus, plus});
    } else {
      tokens_.push_back(factors_[f].name + "^-1");
      factor_of_.push_back(fi);
      inverse_.push_back(plus + 1);
      inverse_.push_back(plus);
      letter_of_.push_back({plus, plus + 1});
    }
  }
}

int FreeProductSpace::letter(int factor, int sign) const {
  const auto& [p, m] = letter_of_.at(factor);
  return sign > 0 ? p : m;
}

void FreeProductSpace::push(Word& w, int letter) const {
  if (!w.empty() && w.back() == inverse_[letter]) {
    w.pop_back();
  } else {
    w.push_back(letter);
  }
}

Word FreeProductSpace::reduce(std::span<const int> letters) const {
  Word w;
  for (int l : letters) push(w, l);
  return w;
}

Word FreeProductSpace::multiply(const Word& p, const Word& q) const {
  Word w = p;
  for (int l : q) push(w, l);
  return w;
}

Word FreeProductSpace::invert(const Word& p) const {
  Word w;
  w.reserve(p.size());
  for (auto it = p.rbegin(); it != p.rend(); ++it) w.push_back(inverse_[*it]);
  return w;
}

bool FreeProductSpace::is_reduced(const Word& w) const {
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (w[i] == inverse_[w[i - 1]]) return false;
  }
  return true;
}

std::size_t common_prefix(const Word& a, const Word& b) {
  const std::size_t n = std::min(a.size(), b.size());
  std::size_t i = 0;
  while (i < n && a[i] == b[i]) ++i;
  return i;
}

std::int64_t FreeProductSpace::dist(const Word& p, const Word& q) const {
  return static_cast<std::int64_t>(multiply(invert(p), q).size());
}

HalfInt FreeProductSpace::gromov_product(const Word& p, const Word& q, const Word& base) const {
  return HalfInt{dist(base, p) + dist(base, q) - dist(p, q)};
}

std::int64_t FreeProductSpace::prefix_gromov_product(const Word& p, const Word& q, const Word& base) const {
  const Word bi = invert(base);
  return static_cast<std::int64_t>(common_prefix(multiply(bi, p), multiply(bi, q)));
}

Word FreeProductSpace::parse(const std::string& text) const {
  std::istringstream in(text);
  std::string tok;
  Word letters;
  while (in >> tok) {
    const auto it = std::find(tokens_.begin(), tokens_.end(), tok);
    if (it == tokens_.end()) throw ConfigError("unknown tree letter '" + tok + "'");
    letters.push_back(static_cast<int>(it - tokens_.begin()));
  }
  return reduce(letters);
}

std::string FreeProductSpace::to_string(const Word& w) const {
  if (w.empty()) return "1";
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += ' ';
    s += tokens_[w[i]];
  }
  return s;
}

Word FreeProductSpace::random_word(int length, Rng& rng) const {
  Word w;
  const auto L = static_cast<std::uint64_t>(tokens_.size());
  if (L == 0) return w;
  for (int i = 0; i < length; ++i) {
    if (w.empty()) {
      w.push_back(static_cast<int>(rng.below(L)));
      continue;
    }
    if (L == 1) break;
    // Uniform over the L - 1 letters other than the inverse of the last one.
    const int forbidden = inverse_[w.back()];
    int pick = static_cast<int>(rng.below(L - 1));
    if (pick >= forbidden) ++pick;
    w.push_back(pick);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Translation length

TranslationEstimate translation_length_estimate(const FreeProductSpace& space, const Word& g) {
  const Word gi = space.invert(g);
  const HalfInt d = HalfInt::from_int(space.dist({}, g));
  const HalfInt prod = space.gromov_product(g, gi);
  TranslationEstimate est;
  est.hypothesis = d >= prod + prod;
  const HalfInt diff = d - prod - prod;
  est.value = diff > HalfInt{} ? diff : HalfInt{};
  return est;
}

CyclicReduction cyclic_reduction(const FreeProductSpace& space, const Word& g) {
  CyclicReduction cr;
  std::size_t lo = 0, hi = g.size();
  while (hi - lo >= 2 && g[lo] == space.inverse(g[hi - 1])) {
    cr.conjugator.push_back(g[lo]);
    ++lo;
    --hi;
  }
  cr.core.assign(g.begin() + static_cast<std::ptrdiff_t>(lo), g.begin() + static_cast<std::ptrdiff_t>(hi));
  return cr;
}

std::int64_t translation_length_exact_tree(const FreeProductSpace& space, const Word& g) {
  const CyclicReduction cr = cyclic_reduction(space, g);
  if (cr.core.size() == 1 && space.inverse(cr.core[0]) == cr.core[0]) return 0;
  return static_cast<std::int64_t>(cr.core.size());
}

double displacement_rate(const FreeProductSpace& space, const Word& g, int k) {
  Word power;
  for (int i = 0; i < k; ++i) power = space.multiply(power, g);
  return static_cast<double>(power.size()) / static_cast<double>(k);
}

std::pair<AxisEndpoint, AxisEndpoint> axis_endpoints(const FreeProductSpace& space, const Word& g) {
  const CyclicReduction cr = cyclic_reduction(space, g);
  return {AxisEndpoint{cr.conjugator, cr.core}, AxisEndpoint{cr.conjugator, space.invert(cr.core)}};
}

namespace {

int endpoint_letter(const AxisEndpoint& e, std::size_t i) {
  if (i < e.prefix.size()) return e.prefix[i];
  return e.period[(i - e.prefix.size()) % e.period.size()];
}

}  // namespace

bool same_endpoint(const AxisEndpoint& a, const AxisEndpoint& b) {
  if (a.period.empty() || b.period.empty()) return false;
  // Past both prefixes the sequences are periodic, so agreement on
  // |period_a| + |period_b| further letters forces equality.
  const std::size_t n = std::max(a.prefix.size(), b.prefix.size()) + a.period.size() + b.period.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (endpoint_letter(a, i) != endpoint_letter(b, i)) return false;
  }
  return true;
}

bool independent_loxodromics(const FreeProductSpace& space, const Word& g, const Word& h) {
  if (translation_length_exact_tree(space, g) == 0 || translation_length_exact_tree(space, h) == 0) return false;
  const auto [gp, gm] = axis_endpoints(space, g);
  const auto [hp, hm] = axis_endpoints(space, h);
  return !same_endpoint(gp, hp) && !same_endpoint(gp, hm) && !same_endpoint(gm, hp) && !same_endpoint(gm, hm);
}

// ---------------------------------------------------------------------------
// Shadows, fellow travelling

HalfInt Shadow::distance_parameter(const FreeProductSpace& space) const {
  return HalfInt::from_int(space.dist(x, y)) - R;
}

bool in_shadow(const FreeProductSpace& space, const Shadow& s, const Word& z) {
  return space.gromov_product(s.y, z, s.x) >= HalfInt::from_int(space.dist(s.x, s.y)) - s.R;
}

FellowTravelOutcome fellow_travel_evaluate(const FreeProductSpace& space, const Word& a, const Word& b, const Word& c,
                                           const Word& d, HalfInt A, double delta_eff) {
  const double ab = space.gromov_product(a, b).value();
  const double cd = space.gromov_product(c, d).value();
  const double ac = space.gromov_product(a, c).value();
  const double bd = space.gromov_product(b, d).value();
  FellowTravelOutcome out;
  out.hypotheses_met = ab >= A.value() && cd >= A.value() && ac <= A.value() - 3.0 * delta_eff;
  if (out.hypotheses_met) out.conclusion_holds = bd - 2.0 * delta_eff <= ac && ac <= bd + 2.0 * delta_eff;
  return out;
}

bool fellow_travel_check(const FreeProductSpace& space, const Word& a, const Word& b, const Word& c, const Word& d,
                         HalfInt A) {
  const double delta_eff = space.delta() > 0.0 ? space.delta() : 1.0 / 3.0;
  const FellowTravelOutcome out = fellow_travel_evaluate(space, a, b, c, d, A, delta_eff);
  if (out.hypotheses_met && !out.conclusion_holds) {
    throw std::logic_error("fellow travelling violated for a=" + space.to_string(a) + " b=" + space.to_string(b) +
                           " c=" + space.to_string(c) + " d=" + space.to_string(d));
  }
  return out.hypotheses_met;
}

// ---------------------------------------------------------------------------
// ActionHandle

namespace {

std::vector<TreeFactor> factors_for(const PresentationGraph& p, const std::vector<int>& kept) {
  std::vector<TreeFactor> out;
  for (int v : kept) {
    const VertexGroup& g = p.group(v);
    if (!g.is_integers() && !g.is_involution_group()) {
      throw ConfigError("tree action: vertex group of '" + p.lambda().name(v) + "' is neither Z nor Z/2");
    }
    out.push_back({p.lambda().name(v), !g.is_integers()});
  }
  return out;
}

GPElement random_element(const PresentationGraph& p, Rng& rng, int max_len) {
  const auto ngen = static_cast<std::uint64_t>(p.generators().size());
  std::vector<int> word;
  const int len = static_cast<int>(rng.below(static_cast<std::uint64_t>(max_len + 1)));
  for (int i = 0; i < len && ngen > 0; ++i) word.push_back(static_cast<int>(rng.below(ngen)));
  return evaluate_word(p, word);
}

}  // namespace

ActionHandle::ActionHandle(PresentationGraph source, std::vector<int> kept, std::string kind, int checks,
                           std::uint64_t seed)
    : source_(std::make_shared<const PresentationGraph>(std::move(source))), kind_(std::move(kind)) {
  std::sort(kept.begin(), kept.end());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    for (std::size_t j = i + 1; j < kept.size(); ++j) {
      if (source_->adjacent(kept[i], kept[j])) {
        throw ConfigError("tree action: kept vertices " + source_->lambda().name(kept[i]) + " and " +
                          source_->lambda().name(kept[j]) + " are adjacent");
      }
    }
  }
  hom_ = std::make_shared<const VertexKillingHom>(*source_, kept);
  space_ = std::make_shared<const FreeProductSpace>(factors_for(*source_, hom_->kept()));
  gen_letter_.assign(source_->generators().size(), -1);
  for (std::size_t s = 0; s < gen_letter_.size(); ++s) {
    const Generator& gen = source_->generators()[s];
    const int tv = hom_->image_vertex(gen.vertex);
    if (tv < 0) continue;
    gen_letter_[s] = source_->group(gen.vertex).is_integers() ? space_->letter(tv, gen.element > 0 ? 1 : -1)
                                                              : space_->letter(tv);
    lipschitz_ = 1;
  }
  Rng rng(seed);
  for (int i = 0; i < checks; ++i) {
    const GPElement g = random_element(*source_, rng, 10);
    const GPElement h = random_element(*source_, rng, 10);
    if (image(multiply(*source_, g, h)) != space_->multiply(image(g), image(h))) {
      throw ValidationError("tree action: homomorphism check failed on " + loxolab::to_string(*source_, g) + ", " +
                            loxolab::to_string(*source_, h));
    }
  }
}

Word ActionHandle::image(const GPElement& g) const {
  Word w;
  for (const Syllable& s : g.syllables()) {
    const int tv = hom_->image_vertex(s.vertex);
    if (tv < 0) continue;
    if (source_->group(s.vertex).is_integers()) {
      const int l = space_->letter(tv, s.value > 0 ? 1 : -1);
      for (std::int64_t k = 0; k < (s.value > 0 ? s.value : -s.value); ++k) space_->push(w, l);
    } else {
      space_->push(w, space_->letter(tv));
    }
  }
  return w;
}

Word ActionHandle::image_of_generators(std::span<const int> generators) const {
  Word w;
  for (int s : generators) {
    const int l = gen_letter_[s];
    if (l >= 0) space_->push(w, l);
  }
  return w;
}

std::int64_t ActionHandle::displacement(const GPElement& g) const { return static_cast<std::int64_t>(image(g).size()); }

TranslationEstimate ActionHandle::translation_estimate(const GPElement& g) const {
  return translation_length_estimate(*space_, image(g));
}

std::int64_t ActionHandle::translation_exact(const GPElement& g) const {
  return translation_length_exact_tree(*space_, image(g));
}

nlohmann::json ActionHandle::to_json() const {
  nlohmann::json factors = nlohmann::json::array();
  for (const auto& f : space_->factors()) factors.push_back(f.name);
  return {{"space", {{"type", "free_product"}, {"factors", factors}}},
          {"hom", {{"type", kind_}, {"params", {{"keep", factors}}}}},
          {"lipschitz", lipschitz_}};
}

namespace {

std::vector<int> indices_of(const PresentationGraph& p, const std::vector<std::string>& names) {
  std::vector<int> out;
  for (const auto& n : names) {
    const auto idx = p.lambda().index_of(n);
    if (!idx) throw ConfigError("tree action: unknown vertex '" + n + "'");
    out.push_back(*idx);
  }
  return out;
}

}  // namespace

ActionHandle make_identity_action(const PresentationGraph& p) {
  if (p.lambda().num_edges() != 0) throw ConfigError("identity action needs an edgeless defining graph");
  std::vector<int> all(p.num_vertices());
  for (int v = 0; v < p.num_vertices(); ++v) all[v] = v;
  return ActionHandle(p, all, "identity");
}

ActionHandle make_projection_action(const PresentationGraph& p, const std::vector<std::string>& keep) {
  const std::vector<int> kept = indices_of(p, keep);
  // A direct factor: every kept vertex commutes with every discarded vertex.
  for (int v = 0; v < p.num_vertices(); ++v) {
    if (std::find(kept.begin(), kept.end(), v) != kept.end()) continue;
    for (int k : kept) {
      if (!p.adjacent(v, k)) {
        throw ConfigError("factor projection: '" + p.lambda().name(v) + "' does not commute with '" +
                          p.lambda().name(k) + "'");
      }
    }
  }
  return ActionHandle(p, kept, "factor_projection");
}

ActionHandle make_quotient_action(const PresentationGraph& p, const std::string& u, const std::string& v) {
  const std::vector<int> pair = indices_of(p, {u, v});
  if (pair[0] == pair[1] || p.adjacent(pair[0], pair[1])) {
    throw ConfigError("quotient action: vertices '" + u + "' and '" + v + "' must be distinct and non-adjacent");
  }
  return ActionHandle(p, pair, "kill_except");
}

ActionHandle make_trivial_action(const PresentationGraph& p) { return ActionHandle(p, {}, "kill_except"); }

ActionHandle make_action(const PresentationGraph& p, const nlohmann::json& spec) {
  try {
    const auto& space = spec.at("space");
    if (space.at("type").get<std::string>() != "free_product") throw ConfigError("action: space type must be free_product");
    const auto factors = space.at("factors").get<std::vector<std::string>>();
    const auto& hom = spec.at("hom");
    const std::string type = hom.at("type").get<std::string>();
    std::vector<std::string> keep = factors;
    if (hom.contains("params") && hom.at("params").contains("keep")) {
      keep = hom.at("params").at("keep").get<std::vector<std::string>>();
    }
    auto sorted = [](std::vector<std::string> v) {
      std::sort(v.begin(), v.end());
      return v;
    };
    if (sorted(keep) != sorted(factors)) throw ConfigError("action: factors must be the kept vertices");
    if (type == "identity") {
      ActionHandle a = make_identity_action(p);
      if (static_cast<int>(factors.size()) != p.num_vertices()) throw ConfigError("identity action: factors must list every vertex");
      return a;
    }
    if (type == "factor_projection") return make_projection_action(p, keep);
    if (type == "kill_except") {
      if (keep.size() == 2) return make_quotient_action(p, keep[0], keep[1]);
      return ActionHandle(p, indices_of(p, keep), "kill_except");
    }
    throw ConfigError("action: unknown hom type '" + type + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("action JSON: ") + e.what());
  }
}

ActionHandle load_action(const PresentationGraph& p, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open action file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("action file '" + path + "': " + e.what());
  }
  return make_action(p, j);
}

std::optional<std::pair<GPElement, GPElement>> find_independent_loxodromics(const ActionHandle& action,
                                                                            int search_depth) {
  const PresentationGraph& p = action.source();
  const int ngen = static_cast<int>(p.generators().size());
  std::vector<GPElement> candidates;
  std::vector<Word> images;
  GPElementSet seen;
  std::vector<std::vector<int>> frontier{{}};
  for (int len = 1; len <= search_depth; ++len) {
    std::vector<std::vector<int>> next;
    for (const auto& w : frontier) {
      for (int s = 0; s < ngen; ++s) {
        std::vector<int> word = w;
        word.push_back(s);
        next.push_back(word);
        GPElement g = evaluate_word(p, word);
        if (!seen.insert(g).second) continue;
        Word img = action.image(g);
        if (translation_length_exact_tree(action.space(), img) == 0) continue;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
          if (independent_loxodromics(action.space(), images[i], img)) return std::make_pair(candidates[i], g);
        }
        candidates.push_back(std::move(g));
        images.push_back(std::move(img));
      }
    }
    frontier = std::move(next);
  }
  return std::nullopt;
}

}  // namespace loxolab
