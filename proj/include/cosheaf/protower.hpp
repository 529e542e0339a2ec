#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cosheaf/errors.hpp"
#include "cosheaf/kmod.hpp"

namespace cosheaf {

// How levels beyond the stored data are produced.
enum class TowerRule {
  kExplicitPrefix,  // stored levels A_1..A_k, then A_n = A_k with identity steps
  kConvergentB,     // B_n = G^{n+1}, (g_0, ..., g_{n+1}) -> (g_0 + g_{n+1}, g_1, ..., g_n)
};

inline std::string to_string(TowerRule r) {
  return r == TowerRule::kExplicitPrefix ? "stabilized" : "builtin:convergentB";
}

// An inverse sequence A_1 <- A_2 <- A_3 <- ..., with step(n) : A_{n+1} -> A_n.
template <class R>
class Tower {
 public:
  // steps[k] : levels[k+1] -> levels[k].
  static Tower explicit_prefix(std::vector<PresentedModule<R>> levels, std::vector<Matrix<R>> steps) {
    if (levels.empty()) throw DimensionError("a tower needs at least one level");
    if (steps.size() + 1 != levels.size()) throw DimensionError("one step per pair of consecutive levels expected");
    Tower t(TowerRule::kExplicitPrefix, levels.front().ring());
    for (std::size_t k = 0; k < steps.size(); ++k) {
      require_well_defined(ModuleMap<R>(levels[k + 1], levels[k], steps[k]), "tower step " + std::to_string(k + 1));
    }
    t.levels_ = std::move(levels);
    t.steps_ = std::move(steps);
    return t;
  }

  static Tower convergent(const PresentedModule<R>& g) {
    Tower t(TowerRule::kConvergentB, g.ring());
    t.g_ = g;
    return t;
  }

  // The tower n -> A_{n+k}.
  Tower shifted(std::size_t k) const {
    Tower t = *this;
    t.offset_ += k;
    return t;
  }

  TowerRule rule() const noexcept { return rule_; }
  const R& ring() const noexcept { return ring_; }
  std::size_t offset() const noexcept { return offset_; }
  const std::optional<PresentedModule<R>>& builtin_parameter() const noexcept { return g_; }
  const std::vector<PresentedModule<R>>& prefix_levels() const noexcept { return levels_; }
  const std::vector<Matrix<R>>& prefix_steps() const noexcept { return steps_; }

  // Index from which every step is the identity (explicit towers only).
  std::optional<std::size_t> stable_index() const {
    if (rule_ != TowerRule::kExplicitPrefix) return std::nullopt;
    return levels_.size() > offset_ ? levels_.size() - offset_ : 1;
  }

  // Every step from the stored prefix on is surjective, by construction of the rule.
  bool tail_surjective() const noexcept { return true; }

  PresentedModule<R> level(std::size_t n) const {
    require_index(n);
    const std::size_t m = n + offset_;
    if (rule_ == TowerRule::kExplicitPrefix) return levels_[std::min(m, levels_.size()) - 1];
    return power(*g_, m + 1);
  }

  ModuleMap<R> step(std::size_t n) const {
    require_index(n);
    const std::size_t m = n + offset_;
    if (rule_ == TowerRule::kExplicitPrefix) {
      if (m < levels_.size()) return ModuleMap<R>(levels_[m], levels_[m - 1], steps_[m - 1]);
      return ModuleMap<R>(level(n + 1), level(n), Matrix<R>::identity(ring_, level(n).generators()));
    }
    const std::size_t k = g_->generators();
    Matrix<R> s(ring_, (m + 2) * k, (m + 1) * k);
    for (std::size_t b = 0; b <= m; ++b) {
      for (std::size_t i = 0; i < k; ++i) s(b * k + i, b * k + i) = ring_.one();
    }
    for (std::size_t i = 0; i < k; ++i) s((m + 1) * k + i, i) = ring_.one();
    return ModuleMap<R>(level(n + 1), level(n), std::move(s));
  }

  // A_j -> A_i for j >= i.
  ModuleMap<R> composite(std::size_t j, std::size_t i) const {
    if (j < i) throw DimensionError("composite needs j >= i");
    Matrix<R> m = Matrix<R>::identity(ring_, level(j).generators());
    for (std::size_t n = j; n > i; --n) m = m * step(n - 1).matrix();
    return ModuleMap<R>(level(j), level(i), std::move(m));
  }

  std::string description() const {
    std::string s = to_string(rule_);
    if (offset_ > 0) s += " shifted by " + std::to_string(offset_);
    return s;
  }

 private:
  Tower(TowerRule rule, R ring) : rule_(rule), ring_(std::move(ring)) {}

  void require_index(std::size_t n) const {
    if (n == 0) throw DimensionError("tower levels are indexed from 1");
  }

  static PresentedModule<R> power(const PresentedModule<R>& g, std::size_t copies) {
    return direct_sum_module(g.ring(), std::vector<PresentedModule<R>>(copies, g));
  }

  TowerRule rule_;
  R ring_;
  std::size_t offset_ = 0;
  std::vector<PresentedModule<R>> levels_;
  std::vector<Matrix<R>> steps_;
  std::optional<PresentedModule<R>> g_;
};

template <class R>
Tower<R> builtin_convergent_tower(const PresentedModule<R>& g) {
  return Tower<R>::convergent(g);
}

enum class ZeroVerdict { kZero, kUnknown };

struct ZeroCheck {
  ZeroVerdict verdict = ZeroVerdict::kUnknown;
  // (i, j): the composite A_j -> A_i vanishes.
  std::vector<std::pair<std::size_t, std::size_t>> witnesses;
  std::string reason;
};

// Zero with a vanishing composite into every level below N, and the rule making every level from
// N on zero (the stable level of an explicit tower, or G for the builtin tower).
template <class R>
ZeroCheck is_zero_up_to(const Tower<R>& t, std::size_t n_bound) {
  if (n_bound < 1) throw DimensionError("is_zero_up_to needs N >= 1");
  ZeroCheck out;
  for (std::size_t i = 1; i < n_bound; ++i) {
    std::optional<std::size_t> found;
    for (std::size_t j = i + 1; j <= n_bound && !found; ++j) {
      if (is_zero_map(t.composite(j, i))) found = j;
    }
    if (!found) {
      out.reason = "no vanishing composite into level " + std::to_string(i) + " from levels up to " + std::to_string(n_bound);
      return out;
    }
    out.witnesses.emplace_back(i, *found);
  }
  if (auto k = t.stable_index()) {
    if (*k > n_bound || !canonicalize(t.level(*k)).is_zero()) {
      out.reason = "the tower does not reach a zero stable level by level " + std::to_string(n_bound);
      return out;
    }
  } else if (!canonicalize(*t.builtin_parameter()).is_zero()) {
    out.reason = "every composite of the builtin tower is surjective onto a nonzero level";
    return out;
  }
  out.verdict = ZeroVerdict::kZero;
  return out;
}

enum class RudimentaryVerdict { kObstructed, kInconclusive };

template <class R>
struct ObstructionWitness {
  std::size_t i0 = 0;
  std::size_t j = 0;
  std::vector<typename R::Scalar> element;   // nonzero, in A_{i0+1}, killed by the step to A_{i0}
  std::vector<typename R::Scalar> preimage;  // in A_j, mapped onto element
};

template <class R>
struct RudimentaryCheck {
  RudimentaryVerdict verdict = RudimentaryVerdict::kInconclusive;
  std::vector<ObstructionWitness<R>> witnesses;
  std::string reason;
};

// For every i0 < N and every j in (i0, N], a nonzero element of ker(A_{i0+1} -> A_{i0}) in the image
// of A_j. Such elements rule out any i0 serving a rudimentary presentation; the certificate extends
// past N only when the rule makes all steps surjective.
template <class R>
RudimentaryCheck<R> rudimentary_obstruction(const Tower<R>& t, std::size_t n_bound) {
  if (n_bound < 2) throw DimensionError("rudimentary_obstruction needs N >= 2");
  RudimentaryCheck<R> out;
  for (std::size_t i0 = 1; i0 < n_bound; ++i0) {
    const auto s = t.step(i0);
    for (std::size_t j = i0 + 1; j <= n_bound; ++j) {
      const auto c = t.composite(j, i0 + 1);
      auto ker = detail::kernel_lift(compose(s, c));
      std::optional<ObstructionWitness<R>> w;
      for (std::size_t r = 0; r < ker.rows() && !w; ++r) {
        auto b = ker.row_vector(r);
        auto a = c.matrix().apply(b);
        if (!t.level(i0 + 1).is_zero_element(a)) w = ObstructionWitness<R>{i0, j, a, b};
      }
      if (!w) {
        out.reason = "the step into level " + std::to_string(i0) + " is injective on the image of level " + std::to_string(j);
        out.witnesses.clear();
        return out;
      }
      out.witnesses.push_back(std::move(*w));
    }
  }
  if (t.rule() == TowerRule::kExplicitPrefix) {
    out.reason = "explicit towers end in identity steps, so they are rudimentary";
    out.witnesses.clear();
    return out;
  }
  out.verdict = RudimentaryVerdict::kObstructed;
  return out;
}

template <class R>
struct PairingColimit {
  std::vector<PresentedModule<R>> terms;     // Hom(A_n, M), n = 1..N
  std::vector<ModuleMap<R>> transitions;     // Hom(A_n, M) -> Hom(A_{n+1}, M)
  PresentedModule<R> colimit;                // the last term
  bool stabilized = false;
  std::optional<std::size_t> stable_from;
};

// colim_n Hom(A_n, M) truncated at N.
template <class R>
PairingColimit<R> pairing_colimit(const Tower<R>& t, const PresentedModule<R>& m, std::size_t n_bound) {
  if (!(t.ring() == m.ring())) throw RingMismatchError("pairing_colimit across different rings");
  if (n_bound < 1) throw DimensionError("pairing_colimit needs N >= 1");
  std::vector<HomModule<R>> homs;
  for (std::size_t n = 1; n <= n_bound; ++n) homs.emplace_back(t.level(n), m);
  PairingColimit<R> out{{}, {}, homs.back().module(), false, std::nullopt};
  for (const auto& h : homs) out.terms.push_back(h.module());
  for (std::size_t n = 1; n < n_bound; ++n) out.transitions.push_back(hom_precompose(t.step(n), homs[n - 1], homs[n]));
  // Transitions past N: identities for explicit towers; for the builtin tower they add a copy of
  // Hom(G, M) each time, so they are isomorphisms exactly when Hom(G, M) = 0.
  bool tail_iso = true;
  std::size_t first = n_bound;
  if (t.rule() == TowerRule::kExplicitPrefix) {
    const std::size_t k = *t.stable_index();
    first = std::min(first, k);
    std::optional<HomModule<R>> prev;
    for (std::size_t n = n_bound; n < k && tail_iso; ++n) {
      if (!prev) prev.emplace(t.level(n), m);
      HomModule<R> next(t.level(n + 1), m);
      tail_iso = is_isomorphism(hom_precompose(t.step(n), *prev, next));
      prev.emplace(std::move(next));
    }
  } else {
    tail_iso = canonicalize(hom_module(*t.builtin_parameter(), m)).is_zero();
  }
  if (tail_iso) {
    std::size_t n0 = std::min(first, n_bound);
    while (n0 > 1 && is_isomorphism(out.transitions[n0 - 2])) --n0;
    out.stable_from = n0;
    out.stabilized = true;
  }
  return out;
}

// Components f_n : X_n -> Y_n for every n, produced on demand.
template <class R>
struct LevelMorphism {
  Tower<R> source;
  Tower<R> target;
  std::function<Matrix<R>(std::size_t)> components;

  ModuleMap<R> component(std::size_t n) const { return ModuleMap<R>(source.level(n), target.level(n), components(n)); }
};

template <class R>
LevelMorphism<R> identity_level(const Tower<R>& t) {
  return {t, t, [t](std::size_t n) { return Matrix<R>::identity(t.ring(), t.level(n).generators()); }};
}

// g after f.
template <class R>
LevelMorphism<R> compose_level(const LevelMorphism<R>& g, const LevelMorphism<R>& f) {
  return {f.source, g.target, [f, g](std::size_t n) { return f.components(n) * g.components(n); }};
}

// Well-defined components and commuting squares f_n . step = step . f_{n+1} for n < N.
template <class R>
bool check_level(const LevelMorphism<R>& f, std::size_t n_bound = 10) {
  for (std::size_t n = 1; n <= n_bound; ++n) {
    if (!is_well_defined(f.component(n))) return false;
    if (n == n_bound) break;
    auto lhs = compose(f.component(n), f.source.step(n));
    auto rhs = compose(f.target.step(n), f.component(n + 1));
    if (!maps_equal(lhs, rhs)) return false;
  }
  return true;
}

}  // namespace cosheaf
