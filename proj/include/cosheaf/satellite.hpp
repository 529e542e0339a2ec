#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cosheaf/cech.hpp"
#include "cosheaf/complex.hpp"
#include "cosheaf/diagram.hpp"
#include "cosheaf/errors.hpp"
#include "cosheaf/kmod.hpp"

namespace cosheaf {

// P_depth -> ... -> P_0 -> target, objectwise exact, every level objectwise free.
template <class R>
struct Resolution {
  Precosheaf<R> target;
  std::vector<Precosheaf<R>> levels;
  std::vector<NaturalTransformation<R>> differentials;  // differentials[k-1] : P_k -> P_{k-1}
  NaturalTransformation<R> augmentation;                // P_0 -> target
  std::size_t depth = 0;

  // First (object, degree) where the augmented complex fails to be exact, degree -1 meaning the augmentation.
  std::optional<std::pair<ObjectId, long>> exactness_violation() const {
    const auto& c = target.category();
    for (ObjectId u = 0; u < c.object_count(); ++u) {
      if (!is_surjective(augmentation.component(u))) return std::make_pair(u, -1L);
      for (std::size_t k = 0; k < depth; ++k) {
        ModuleMap<R> out = k == 0 ? augmentation.component(u) : differentials[k - 1].component(u);
        auto h = detail::homology_unchecked(differentials[k].component(u), out);
        if (!canonicalize(h.module()).is_zero()) return std::make_pair(u, static_cast<long>(k));
      }
    }
    return std::nullopt;
  }
};

// Iterated quasi-projective covers of kernels.
template <class R>
Resolution<R> resolve(const Precosheaf<R>& a, std::size_t depth = 3, CoverStrategy strategy = CoverStrategy::kStandard) {
  auto first = quasiprojective_cover(a, strategy);
  Resolution<R> res{a, {first.cover}, {}, first.epi, depth};
  NaturalTransformation<R> last = first.epi;
  for (std::size_t k = 1; k <= depth; ++k) {
    auto ker = kernel(last);
    auto cov = quasiprojective_cover(ker.kernel, strategy);
    NaturalTransformation<R> d = compose(ker.inclusion, cov.epi);
    res.levels.push_back(cov.cover);
    res.differentials.push_back(d);
    last = std::move(d);
  }
  return res;
}

// An additive functor from precosheaves to modules, given by its two evaluators.
template <class R>
struct AdditiveFunctor {
  std::string name;
  std::function<PresentedModule<R>(const Precosheaf<R>&)> on_objects;
  // Matrix of F(t) between on_objects(t.source) and on_objects(t.target).
  std::function<Matrix<R>(const NaturalTransformation<R>&)> on_morphisms;

  ModuleMap<R> map(const NaturalTransformation<R>& t) const {
    return ModuleMap<R>(on_objects(t.source), on_objects(t.target), on_morphisms(t));
  }
};

namespace detail {

template <class R>
NaturalTransformation<R> add_transformations(const NaturalTransformation<R>& f, const NaturalTransformation<R>& g) {
  std::vector<Matrix<R>> comps;
  for (std::size_t o = 0; o < f.components.size(); ++o) comps.push_back(f.components[o] + g.components[o]);
  return {f.source, f.target, std::move(comps)};
}

}  // namespace detail

// F(f + g) = F(f) + F(g) on one parallel pair; throws NonAdditiveFunctorError otherwise.
template <class R>
void check_additive(const AdditiveFunctor<R>& f, const NaturalTransformation<R>& x, const NaturalTransformation<R>& y) {
  auto sum = f.map(detail::add_transformations(x, y));
  auto parts = add(f.map(x), f.map(y));
  if (!maps_equal(sum, parts)) throw NonAdditiveFunctorError("functor " + f.name + " is not additive");
}

template <class R>
AdditiveFunctor<R> evaluation_functor(ObjectId u, const std::string& label = "") {
  return {label.empty() ? "evaluation at object " + std::to_string(u) : label,
          [u](const Precosheaf<R>& a) { return a.value(u); },
          [u](const NaturalTransformation<R>& t) { return t.components.at(u); }};
}

// H_0(R, -): blocks of the sieve colimit moved by the components at the member domains.
template <class R>
AdditiveFunctor<R> sieve_h0_functor(const Sieve& r, const std::string& label = "") {
  return {label.empty() ? "H_0 over a sieve" : label,
          [r](const Precosheaf<R>& a) { return h0_sieve(a, r).module(); },
          [r](const NaturalTransformation<R>& t) {
            const auto& c = t.source.category();
            std::vector<const Matrix<R>*> blocks;
            for (auto f : r.members) blocks.push_back(&t.components.at(c.dom(f)));
            return block_diagonal(t.source.ring(), blocks);
          }};
}

// F applied to a resolution, as a chain complex F(P_depth) -> ... -> F(P_0).
template <class R>
ChainComplex<R> apply_to_resolution(const AdditiveFunctor<R>& f, const Resolution<R>& res) {
  std::vector<PresentedModule<R>> mods;
  for (const auto& p : res.levels) mods.push_back(f.on_objects(p));
  std::vector<Matrix<R>> bd;
  for (const auto& d : res.differentials) bd.push_back(f.on_morphisms(d));
  return ChainComplex<R>(res.target.ring(), std::move(mods), std::move(bd), true);
}

// L_n F(A) = H_n(F(P_*)).
template <class R>
PresentedModule<R> left_satellite(const AdditiveFunctor<R>& f, const Resolution<R>& res, std::size_t n) {
  if (res.depth < n + 1) throw DimensionError("left_satellite needs a resolution of depth at least n + 1");
  check_additive(f, res.augmentation, res.augmentation);
  if (!res.differentials.empty()) check_additive(f, res.differentials[0], res.differentials[0]);
  auto cx = apply_to_resolution(f, res);
  if (auto bad = cx.dd_violation()) {
    throw InvariantError("F(P) is not a complex at degree " + std::to_string(*bad) + " for functor " + f.name);
  }
  return cx.homology(n);
}

template <class R>
PresentedModule<R> left_satellite(const AdditiveFunctor<R>& f, const Precosheaf<R>& a, std::size_t n,
                                  CoverStrategy strategy = CoverStrategy::kStandard) {
  return left_satellite(f, resolve(a, std::max<std::size_t>(3, n + 1), strategy), n);
}

// Cosheaf homology in low degrees, read off Cech homology: H_0 and H_1 exactly, and a module
// that H_2 surjects onto. For flask cosheaves every degree up to flask_degree is exact.
template <class R>
struct LowDegreeHomology {
  PresentedModule<R> h0;
  PresentedModule<R> h1;
  PresentedModule<R> h2_quotient;
  bool flask = false;
  std::size_t flask_degree = 0;
};

template <class R>
LowDegreeHomology<R> cosheaf_h_low(const Site& site, ObjectId u, const Precosheaf<R>& a, std::size_t flask_check = 2) {
  if (auto w = cosheaf_violation(site, a)) throw NotACosheafError("input is not a cosheaf: " + w->detail);
  LowDegreeHomology<R> out{cech_H_n(site, u, a, 0, CechRoute::kSieves), cech_H_n(site, u, a, 1, CechRoute::kSieves),
                           cech_H_n(site, u, a, 2, CechRoute::kSieves), false, 0};
  if (flask_check > 0 && is_flask(site, a, flask_check)) {
    out.flask = true;
    out.flask_degree = flask_check;
  }
  return out;
}

}  // namespace cosheaf
