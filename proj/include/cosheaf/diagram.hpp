#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cosheaf/errors.hpp"
#include "cosheaf/fincat.hpp"
#include "cosheaf/kmod.hpp"

namespace cosheaf {

// Covariant functor from a finite category to presented modules. Also serves as a
// diagram for limits and colimits.
template <class R>
class Precosheaf {
 public:
  using Module = PresentedModule<R>;
  using Map = ModuleMap<R>;

  Precosheaf(CategoryPtr category, R ring, std::vector<Module> values, std::vector<Matrix<R>> matrices)
      : category_(std::move(category)), ring_(std::move(ring)), values_(std::move(values)), matrices_(std::move(matrices)) {
    if (values_.size() != category_->object_count()) throw DimensionError("one module per object expected");
    if (matrices_.size() != category_->morphism_count()) throw DimensionError("one matrix per morphism expected");
    for (const auto& v : values_) {
      if (!(v.ring() == ring_)) throw RingMismatchError("precosheaf values over different rings");
    }
    for (MorphismId m = 0; m < matrices_.size(); ++m) {
      const auto& mat = matrices_[m];
      if (mat.rows() != values_[category_->dom(m)].generators() ||
          mat.cols() != values_[category_->cod(m)].generators()) {
        throw DimensionError("matrix of " + category_->morphism_name(m) + " has the wrong shape");
      }
    }
  }

  static Precosheaf zero(CategoryPtr category, const R& ring) {
    std::vector<Module> values(category->object_count(), Module::zero(ring));
    std::vector<Matrix<R>> mats(category->morphism_count(), Matrix<R>(ring, 0, 0));
    return Precosheaf(std::move(category), ring, std::move(values), std::move(mats));
  }

  // M at every object, identities everywhere.
  static Precosheaf constant(CategoryPtr category, const Module& m) {
    std::vector<Module> values(category->object_count(), m);
    std::vector<Matrix<R>> mats(category->morphism_count(), Matrix<R>::identity(m.ring(), m.generators()));
    return Precosheaf(std::move(category), m.ring(), std::move(values), std::move(mats));
  }

  const FinCategory& category() const noexcept { return *category_; }
  const CategoryPtr& category_ptr() const noexcept { return category_; }
  const R& ring() const noexcept { return ring_; }
  const Module& value(ObjectId o) const { return values_.at(o); }
  const std::vector<Module>& values() const noexcept { return values_; }
  const Matrix<R>& matrix(MorphismId m) const { return matrices_.at(m); }
  const std::vector<Matrix<R>>& matrices() const noexcept { return matrices_; }
  Map action(MorphismId m) const { return Map(values_[category_->dom(m)], values_[category_->cod(m)], matrices_[m]); }

  std::optional<std::string> functoriality_violation() const {
    const auto& c = *category_;
    for (MorphismId m = 0; m < c.morphism_count(); ++m) {
      if (auto bad = well_definedness_violation(action(m))) {
        return "action of " + c.morphism_name(m) + " is not well defined (relation " + std::to_string(*bad) + ")";
      }
    }
    for (ObjectId o = 0; o < c.object_count(); ++o) {
      if (!maps_equal(action(c.identity(o)), Map::identity(values_[o]))) {
        return "identity of " + c.object_name(o) + " does not act as the identity";
      }
    }
    for (MorphismId g = 0; g < c.morphism_count(); ++g) {
      if (c.is_identity(g)) continue;
      for (MorphismId f : c.morphisms_into(c.dom(g))) {
        if (c.is_identity(f)) continue;
        if (!maps_equal(action(c.compose(g, f)), compose(action(g), action(f)))) {
          return "composite " + c.morphism_name(g) + " o " + c.morphism_name(f) + " is not preserved";
        }
      }
    }
    return std::nullopt;
  }

  void validate() const {
    if (auto v = functoriality_violation()) throw InvariantError("not a functor: " + *v);
  }

 private:
  CategoryPtr category_;
  R ring_;
  std::vector<Module> values_;
  std::vector<Matrix<R>> matrices_;
};

template <class R>
bool same_category(const FinCategory& a, const FinCategory& b) {
  return &a == &b || a == b;
}

// Contravariant functor; stored as a covariant functor on the opposite category, which
// shares morphism ids with the original.
template <class R>
class Presheaf {
 public:
  using Module = PresentedModule<R>;
  using Map = ModuleMap<R>;

  // matrices[m] represents the map value(cod m) -> value(dom m).
  Presheaf(CategoryPtr category, R ring, std::vector<Module> values, std::vector<Matrix<R>> matrices)
      : category_(std::move(category)),
        functor_(std::make_shared<const FinCategory>(category_->opposite()), std::move(ring), std::move(values),
                 std::move(matrices)) {}

  Presheaf(CategoryPtr category, Precosheaf<R> on_opposite)
      : category_(std::move(category)), functor_(std::move(on_opposite)) {
    if (!same_category<R>(functor_.category(), category_->opposite())) {
      throw CategoryError("presheaf functor is not defined on the opposite category");
    }
  }

  static Presheaf zero(CategoryPtr category, const R& ring) {
    auto op = std::make_shared<const FinCategory>(category->opposite());
    return Presheaf(std::move(category), Precosheaf<R>::zero(op, ring));
  }
  static Presheaf constant(CategoryPtr category, const Module& m) {
    auto op = std::make_shared<const FinCategory>(category->opposite());
    return Presheaf(std::move(category), Precosheaf<R>::constant(op, m));
  }

  const FinCategory& category() const noexcept { return *category_; }
  const CategoryPtr& category_ptr() const noexcept { return category_; }
  const R& ring() const noexcept { return functor_.ring(); }
  const Module& value(ObjectId o) const { return functor_.value(o); }
  const Matrix<R>& matrix(MorphismId m) const { return functor_.matrix(m); }
  // value(cod m) -> value(dom m).
  Map action(MorphismId m) const { return functor_.action(m); }
  const Precosheaf<R>& as_functor() const noexcept { return functor_; }
  std::optional<std::string> functoriality_violation() const { return functor_.functoriality_violation(); }
  void validate() const { functor_.validate(); }

 private:
  CategoryPtr category_;
  Precosheaf<R> functor_;
};

// Morphism of covariant functors on the same category.
template <class R>
struct NaturalTransformation {
  Precosheaf<R> source;
  Precosheaf<R> target;
  std::vector<Matrix<R>> components;

  ModuleMap<R> component(ObjectId o) const { return ModuleMap<R>(source.value(o), target.value(o), components.at(o)); }

  std::optional<std::string> naturality_violation() const {
    const auto& c = source.category();
    if (!same_category<R>(c, target.category())) return "source and target live on different categories";
    if (components.size() != c.object_count()) return "one component per object expected";
    for (ObjectId o = 0; o < c.object_count(); ++o) {
      if (auto bad = well_definedness_violation(component(o))) {
        return "component at " + c.object_name(o) + " is not well defined (relation " + std::to_string(*bad) + ")";
      }
    }
    for (MorphismId m = 0; m < c.morphism_count(); ++m) {
      if (c.is_identity(m)) continue;
      auto lhs = compose(target.action(m), component(c.dom(m)));
      auto rhs = compose(component(c.cod(m)), source.action(m));
      if (!maps_equal(lhs, rhs)) return "square at " + c.morphism_name(m) + " does not commute";
    }
    return std::nullopt;
  }

  void validate() const {
    if (auto v = naturality_violation()) throw InvariantError("not natural: " + *v);
  }

  static NaturalTransformation identity(const Precosheaf<R>& a) {
    std::vector<Matrix<R>> comps;
    for (ObjectId o = 0; o < a.category().object_count(); ++o) {
      comps.push_back(Matrix<R>::identity(a.ring(), a.value(o).generators()));
    }
    return {a, a, std::move(comps)};
  }
};

template <class R>
using PrecosheafMorphism = NaturalTransformation<R>;

// g after f.
template <class R>
NaturalTransformation<R> compose(const NaturalTransformation<R>& g, const NaturalTransformation<R>& f) {
  std::vector<Matrix<R>> comps;
  for (std::size_t o = 0; o < f.components.size(); ++o) comps.push_back(f.components[o] * g.components[o]);
  return {f.source, g.target, std::move(comps)};
}

template <class R>
bool is_objectwise_iso(const NaturalTransformation<R>& t) {
  for (ObjectId o = 0; o < t.components.size(); ++o) {
    if (!is_isomorphism(t.component(o))) return false;
  }
  return true;
}

template <class R>
std::optional<ObjectId> first_non_epi(const NaturalTransformation<R>& t) {
  for (ObjectId o = 0; o < t.components.size(); ++o) {
    if (!is_surjective(t.component(o))) return o;
  }
  return std::nullopt;
}

template <class R>
std::optional<ObjectId> first_non_mono(const NaturalTransformation<R>& t) {
  for (ObjectId o = 0; o < t.components.size(); ++o) {
    if (!is_injective(t.component(o))) return o;
  }
  return std::nullopt;
}

template <class R>
struct ObjectwiseKernel {
  Precosheaf<R> kernel;
  NaturalTransformation<R> inclusion;
};

template <class R>
ObjectwiseKernel<R> kernel(const NaturalTransformation<R>& t) {
  const auto& c = t.source.category();
  std::vector<KernelResult<R>> ks;
  std::vector<PresentedModule<R>> values;
  for (ObjectId o = 0; o < c.object_count(); ++o) {
    ks.push_back(kernel(t.component(o)));
    values.push_back(ks.back().module());
  }
  std::vector<Matrix<R>> mats;
  for (MorphismId m = 0; m < c.morphism_count(); ++m) {
    mats.push_back(induced_map(ks[c.dom(m)].data, ks[c.cod(m)].data, t.source.matrix(m)).matrix());
  }
  Precosheaf<R> k(t.source.category_ptr(), t.source.ring(), std::move(values), std::move(mats));
  std::vector<Matrix<R>> incl;
  for (auto& kr : ks) incl.push_back(kr.inclusion.matrix());
  return {k, {k, t.source, std::move(incl)}};
}

template <class R>
struct PrecosheafSum {
  Precosheaf<R> sum;
  std::vector<NaturalTransformation<R>> injections;
  std::vector<NaturalTransformation<R>> projections;
};

template <class R>
PrecosheafSum<R> direct_sum(const std::vector<Precosheaf<R>>& parts) {
  if (parts.empty()) throw DimensionError("direct sum of no precosheaves needs a category");
  const auto& c = parts[0].category();
  const R& ring = parts[0].ring();
  std::vector<DirectSum<R>> sums;
  std::vector<PresentedModule<R>> values;
  for (ObjectId o = 0; o < c.object_count(); ++o) {
    std::vector<PresentedModule<R>> ms;
    for (const auto& p : parts) ms.push_back(p.value(o));
    sums.push_back(direct_sum(ring, ms));
    values.push_back(sums.back().module);
  }
  std::vector<Matrix<R>> mats;
  for (MorphismId m = 0; m < c.morphism_count(); ++m) {
    std::vector<const Matrix<R>*> blocks;
    for (const auto& p : parts) blocks.push_back(&p.matrix(m));
    mats.push_back(block_diagonal(ring, blocks));
  }
  Precosheaf<R> s(parts[0].category_ptr(), ring, std::move(values), std::move(mats));
  PrecosheafSum<R> out{s, {}, {}};
  for (std::size_t k = 0; k < parts.size(); ++k) {
    std::vector<Matrix<R>> inj, proj;
    for (ObjectId o = 0; o < c.object_count(); ++o) {
      inj.push_back(sums[o].injections[k].matrix());
      proj.push_back(sums[o].projections[k].matrix());
    }
    out.injections.push_back({parts[k], s, std::move(inj)});
    out.projections.push_back({s, parts[k], std::move(proj)});
  }
  return out;
}

// One arrow of a diagram given by blocks: the map from block source to block target.
template <class R>
struct DiagramArrow {
  std::size_t source;
  std::size_t target;
  Matrix<R> matrix;
};

template <class R>
struct Colimit {
  PresentedModule<R> module;
  std::vector<std::size_t> offsets;
  std::vector<ModuleMap<R>> cocone;

  // The map out of the colimit determined by compatible maps out of each block.
  ModuleMap<R> universal(const PresentedModule<R>& target, const std::vector<Matrix<R>>& maps) const {
    Matrix<R> m(module.ring(), module.generators(), target.generators());
    for (std::size_t b = 0; b < maps.size(); ++b) m.set_block(offsets[b], 0, maps[b]);
    return ModuleMap<R>(module, target, std::move(m));
  }
};

template <class R>
Colimit<R> colimit_of(const R& ring, const std::vector<PresentedModule<R>>& blocks,
                      const std::vector<DiagramArrow<R>>& arrows) {
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  std::size_t rel_rows = 0;
  for (const auto& b : blocks) {
    offsets.push_back(total);
    total += b.generators();
    rel_rows += b.relation_count();
  }
  for (const auto& a : arrows) rel_rows += blocks[a.source].generators();
  Matrix<R> rel(ring, rel_rows, total);
  std::size_t row = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    rel.set_block(row, offsets[b], blocks[b].relations());
    row += blocks[b].relation_count();
  }
  for (const auto& a : arrows) {
    for (std::size_t i = 0; i < blocks[a.source].generators(); ++i) {
      for (std::size_t j = 0; j < blocks[a.target].generators(); ++j) {
        rel(row, offsets[a.target] + j) = a.matrix(i, j);
      }
      rel(row, offsets[a.source] + i) = ring.sub(rel(row, offsets[a.source] + i), ring.one());
      ++row;
    }
  }
  PresentedModule<R> module(ring, total, std::move(rel));
  std::vector<ModuleMap<R>> cocone;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    Matrix<R> inj(ring, blocks[b].generators(), total);
    for (std::size_t i = 0; i < blocks[b].generators(); ++i) inj(i, offsets[b] + i) = ring.one();
    cocone.emplace_back(blocks[b], module, std::move(inj));
  }
  return {std::move(module), std::move(offsets), std::move(cocone)};
}

template <class R>
struct Limit {
  Subquotient<R> data;
  std::vector<std::size_t> offsets;
  std::vector<ModuleMap<R>> cone;

  const PresentedModule<R>& module() const { return data.module(); }

  // The map into the limit determined by a compatible family of maps into each block.
  ModuleMap<R> universal(const PresentedModule<R>& source, const std::vector<Matrix<R>>& maps) const {
    const R& ring = source.ring();
    Matrix<R> ambient(ring, source.generators(), data.ambient_rank());
    for (std::size_t b = 0; b < maps.size(); ++b) ambient.set_block(0, offsets[b], maps[b]);
    Matrix<R> m(ring, source.generators(), module().generators());
    for (std::size_t i = 0; i < source.generators(); ++i) {
      auto c = data.coordinates(ambient.row(i));
      if (!c) throw InvariantError("maps into the limit are not compatible");
      for (std::size_t j = 0; j < c->size(); ++j) m(i, j) = (*c)[j];
    }
    return ModuleMap<R>(source, module(), std::move(m));
  }
};

template <class R>
Limit<R> limit_of(const R& ring, const std::vector<PresentedModule<R>>& blocks,
                  const std::vector<DiagramArrow<R>>& arrows) {
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  for (const auto& b : blocks) {
    offsets.push_back(total);
    total += b.generators();
  }
  std::vector<std::size_t> arrow_offsets;
  std::size_t cols = 0;
  for (const auto& a : arrows) {
    arrow_offsets.push_back(cols);
    cols += blocks[a.target].generators();
  }
  // x -> (x_source * M - x_target) per arrow.
  Matrix<R> constraint(ring, total, cols);
  std::vector<const Matrix<R>*> target_rels;
  for (std::size_t k = 0; k < arrows.size(); ++k) {
    const auto& a = arrows[k];
    constraint.set_block(offsets[a.source], arrow_offsets[k], a.matrix);
    for (std::size_t j = 0; j < blocks[a.target].generators(); ++j) {
      auto& e = constraint(offsets[a.target] + j, arrow_offsets[k] + j);
      e = ring.sub(e, ring.one());
    }
    target_rels.push_back(&blocks[a.target].relations());
  }
  std::vector<const Matrix<R>*> block_rels;
  for (const auto& b : blocks) block_rels.push_back(&b.relations());
  Matrix<R> ambient_rel = block_diagonal(ring, block_rels);
  Subquotient<R> data(detail::preimage_lift(constraint, block_diagonal(ring, target_rels)), ambient_rel);
  std::vector<ModuleMap<R>> cone;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    cone.emplace_back(data.module(), blocks[b], data.basis().block(0, offsets[b], data.basis().rows(), blocks[b].generators()));
  }
  return {std::move(data), std::move(offsets), std::move(cone)};
}

template <class R>
std::vector<DiagramArrow<R>> diagram_arrows(const Precosheaf<R>& d) {
  std::vector<DiagramArrow<R>> arrows;
  const auto& c = d.category();
  for (MorphismId m = 0; m < c.morphism_count(); ++m) {
    if (!c.is_identity(m)) arrows.push_back({c.dom(m), c.cod(m), d.matrix(m)});
  }
  return arrows;
}

template <class R>
Colimit<R> colim(const Precosheaf<R>& d) {
  return colimit_of(d.ring(), d.values(), diagram_arrows(d));
}

template <class R>
Limit<R> lim(const Precosheaf<R>& d) {
  return limit_of(d.ring(), d.values(), diagram_arrows(d));
}

// f_* A = A o f.
template <class R>
Precosheaf<R> restrict(const FinFunctor& f, const Precosheaf<R>& a) {
  if (!same_category<R>(*f.target, a.category())) throw CategoryError("restrict: functor target differs from the category");
  std::vector<PresentedModule<R>> values;
  for (auto o : f.on_objects) values.push_back(a.value(o));
  std::vector<Matrix<R>> mats;
  for (auto m : f.on_morphisms) mats.push_back(a.matrix(m));
  return Precosheaf<R>(f.source, a.ring(), std::move(values), std::move(mats));
}

template <class R>
struct SieveColimit {
  Colimit<R> colimit;
  ModuleMap<R> comparison;  // to A(U)
  const PresentedModule<R>& module() const { return colimit.module; }
};

// Arrows of the comma category of a sieve: (f -> f') for h with f' o h = f, identities skipped.
inline std::vector<std::tuple<std::size_t, std::size_t, MorphismId>> comma_arrows(const FinCategory& c, const Sieve& r) {
  std::vector<std::tuple<std::size_t, std::size_t, MorphismId>> out;
  for (std::size_t a = 0; a < r.members.size(); ++a) {
    for (std::size_t b = 0; b < r.members.size(); ++b) {
      auto f = r.members[a], f2 = r.members[b];
      for (auto h : c.hom(c.dom(f), c.dom(f2))) {
        if (a == b && c.is_identity(h)) continue;
        if (c.compose(f2, h) == f) out.emplace_back(a, b, h);
      }
    }
  }
  return out;
}

// H_0(R, A): the colimit of A over the comma category of R, with its map to A(U).
template <class R>
SieveColimit<R> h0_sieve(const Precosheaf<R>& a, const Sieve& r) {
  const auto& c = a.category();
  if (r.target >= c.object_count()) throw CategoryError("h0_sieve: sieve target is not an object of the site");
  std::vector<PresentedModule<R>> blocks;
  for (auto f : r.members) blocks.push_back(a.value(c.dom(f)));
  std::vector<DiagramArrow<R>> arrows;
  for (auto [s, t, h] : comma_arrows(c, r)) arrows.push_back({s, t, a.matrix(h)});
  auto col = colimit_of(a.ring(), blocks, arrows);
  std::vector<Matrix<R>> legs;
  for (auto f : r.members) legs.push_back(a.matrix(f));
  auto cmp = col.universal(a.value(r.target), legs);
  return {std::move(col), std::move(cmp)};
}

template <class R>
struct SieveLimit {
  Limit<R> limit;
  ModuleMap<R> comparison;  // from B(U)
  const PresentedModule<R>& module() const { return limit.module(); }
};

// H^0(R, B): the limit of B over the comma category of R, with the map from B(U).
template <class R>
SieveLimit<R> h0_presheaf(const Presheaf<R>& b, const Sieve& r) {
  const auto& c = b.category();
  if (r.target >= c.object_count()) throw CategoryError("h0_presheaf: sieve target is not an object of the site");
  std::vector<PresentedModule<R>> blocks;
  for (auto f : r.members) blocks.push_back(b.value(c.dom(f)));
  std::vector<DiagramArrow<R>> arrows;
  for (auto [s, t, h] : comma_arrows(c, r)) arrows.push_back({t, s, b.matrix(h)});
  auto l = limit_of(b.ring(), blocks, arrows);
  std::vector<Matrix<R>> legs;
  for (auto f : r.members) legs.push_back(b.matrix(f));
  auto cmp = l.universal(b.value(r.target), legs);
  return {std::move(l), std::move(cmp)};
}

// Left Kan extension along f: value at d is the colimit over f / d.
template <class R>
Precosheaf<R> left_kan(const FinFunctor& f, const Precosheaf<R>& a) {
  if (!same_category<R>(*f.source, a.category())) throw CategoryError("left_kan: functor source differs");
  const auto& e = *f.source;
  const auto& d = *f.target;
  const R& ring = a.ring();
  std::vector<std::map<std::pair<ObjectId, MorphismId>, std::size_t>> index(d.object_count());
  std::vector<Colimit<R>> cols;
  std::vector<PresentedModule<R>> values;
  for (ObjectId x = 0; x < d.object_count(); ++x) {
    std::vector<PresentedModule<R>> blocks;
    std::vector<std::pair<ObjectId, MorphismId>> pairs;
    for (ObjectId j = 0; j < e.object_count(); ++j) {
      for (auto phi : d.hom(f.on_objects[j], x)) {
        index[x][{j, phi}] = pairs.size();
        pairs.push_back({j, phi});
        blocks.push_back(a.value(j));
      }
    }
    std::vector<DiagramArrow<R>> arrows;
    for (const auto& [j, phi] : pairs) {
      for (auto u : e.morphisms_from(j)) {
        if (e.is_identity(u)) continue;
        ObjectId j2 = e.cod(u);
        for (auto phi2 : d.hom(f.on_objects[j2], x)) {
          if (d.compose(phi2, f.on_morphisms[u]) == phi) {
            arrows.push_back({index[x][{j, phi}], index[x][{j2, phi2}], a.matrix(u)});
          }
        }
      }
    }
    cols.push_back(colimit_of(ring, blocks, arrows));
    values.push_back(cols.back().module);
  }
  std::vector<Matrix<R>> mats;
  for (MorphismId alpha = 0; alpha < d.morphism_count(); ++alpha) {
    ObjectId x = d.dom(alpha), y = d.cod(alpha);
    Matrix<R> m(ring, values[x].generators(), values[y].generators());
    for (const auto& [key, k] : index[x]) {
      auto [j, phi] = key;
      std::size_t k2 = index[y].at({j, d.compose(alpha, phi)});
      for (std::size_t i = 0; i < a.value(j).generators(); ++i) m(cols[x].offsets[k] + i, cols[y].offsets[k2] + i) = ring.one();
    }
    mats.push_back(std::move(m));
  }
  return Precosheaf<R>(f.target, ring, std::move(values), std::move(mats));
}

// Right Kan extension along f: value at d is the limit over d / f.
template <class R>
Precosheaf<R> right_kan(const FinFunctor& f, const Precosheaf<R>& a) {
  if (!same_category<R>(*f.source, a.category())) throw CategoryError("right_kan: functor source differs");
  const auto& e = *f.source;
  const auto& d = *f.target;
  const R& ring = a.ring();
  std::vector<std::map<std::pair<ObjectId, MorphismId>, std::size_t>> index(d.object_count());
  std::vector<Limit<R>> lims;
  std::vector<PresentedModule<R>> values;
  for (ObjectId x = 0; x < d.object_count(); ++x) {
    std::vector<PresentedModule<R>> blocks;
    std::vector<std::pair<ObjectId, MorphismId>> pairs;
    for (ObjectId j = 0; j < e.object_count(); ++j) {
      for (auto psi : d.hom(x, f.on_objects[j])) {
        index[x][{j, psi}] = pairs.size();
        pairs.push_back({j, psi});
        blocks.push_back(a.value(j));
      }
    }
    std::vector<DiagramArrow<R>> arrows;
    for (const auto& [j, psi] : pairs) {
      for (auto u : e.morphisms_from(j)) {
        if (e.is_identity(u)) continue;
        arrows.push_back({index[x][{j, psi}], index[x][{e.cod(u), d.compose(f.on_morphisms[u], psi)}], a.matrix(u)});
      }
    }
    lims.push_back(limit_of(ring, blocks, arrows));
    values.push_back(lims.back().module());
  }
  std::vector<Matrix<R>> mats;
  for (MorphismId alpha = 0; alpha < d.morphism_count(); ++alpha) {
    ObjectId x = d.dom(alpha), y = d.cod(alpha);
    std::vector<Matrix<R>> comps(index[y].size(), Matrix<R>(ring, 0, 0));
    for (const auto& [key, k2] : index[y]) {
      auto [j, psi2] = key;
      comps[k2] = lims[x].cone[index[x].at({j, d.compose(psi2, alpha)})].matrix();
    }
    mats.push_back(lims[y].universal(values[x], comps).matrix());
  }
  return Precosheaf<R>(f.target, ring, std::move(values), std::move(mats));
}

// A_V: direct sum of copies of M indexed by Hom(V, U).
template <class R>
Precosheaf<R> lower_generator(const CategoryPtr& c, ObjectId v, const PresentedModule<R>& m) {
  auto incl = FinFunctor::object_inclusion(c, v);
  return left_kan(incl, Precosheaf<R>::constant(incl.source, m));
}

// A^V: product of copies of M indexed by Hom(U, V).
template <class R>
Precosheaf<R> upper_generator(const CategoryPtr& c, ObjectId v, const PresentedModule<R>& m) {
  auto incl = FinFunctor::object_inclusion(c, v);
  return right_kan(incl, Precosheaf<R>::constant(incl.source, m));
}

// The presheaf U -> Hom(A(U), T), with the Hom modules used for its values.
template <class R>
struct Pairing {
  Presheaf<R> presheaf;
  std::vector<HomModule<R>> homs;
};

template <class R>
Pairing<R> pairing(const Precosheaf<R>& a, const PresentedModule<R>& t) {
  if (!(a.ring() == t.ring())) throw RingMismatchError("pairing across different rings");
  const auto& c = a.category();
  std::vector<HomModule<R>> homs;
  std::vector<PresentedModule<R>> values;
  for (ObjectId o = 0; o < c.object_count(); ++o) {
    homs.emplace_back(a.value(o), t);
    values.push_back(homs.back().module());
  }
  std::vector<Matrix<R>> mats;
  for (MorphismId m = 0; m < c.morphism_count(); ++m) {
    mats.push_back(hom_precompose(a.action(m), homs[c.cod(m)], homs[c.dom(m)]).matrix());
  }
  return {Presheaf<R>(a.category_ptr(), a.ring(), std::move(values), std::move(mats)), std::move(homs)};
}

// The presheaf map <B, T> -> <A, T> induced by t: A -> B.
template <class R>
NaturalTransformation<R> pairing_map(const NaturalTransformation<R>& t, const Pairing<R>& pa, const Pairing<R>& pb) {
  std::vector<Matrix<R>> comps;
  for (ObjectId o = 0; o < t.components.size(); ++o) {
    comps.push_back(hom_precompose(t.component(o), pb.homs[o], pa.homs[o]).matrix());
  }
  return {pb.presheaf.as_functor(), pa.presheaf.as_functor(), std::move(comps)};
}

enum class CoverStrategy { kStandard, kDoubled };

template <class R>
struct QuasiProjectiveCover {
  Precosheaf<R> cover;
  NaturalTransformation<R> epi;
};

// P(B)(U) = sum over arrows f: V -> U of the free module on the generators of B(V).
// kDoubled uses two copies of every summand, mapping (x, y) to x + y.
template <class R>
QuasiProjectiveCover<R> quasiprojective_cover(const Precosheaf<R>& b, CoverStrategy strategy = CoverStrategy::kStandard) {
  const auto& c = b.category();
  const R& ring = b.ring();
  const std::size_t copies = strategy == CoverStrategy::kDoubled ? 2 : 1;
  std::vector<std::map<MorphismId, std::size_t>> offset(c.object_count());
  std::vector<PresentedModule<R>> values;
  for (ObjectId u = 0; u < c.object_count(); ++u) {
    std::size_t total = 0;
    for (auto f : c.morphisms_into(u)) {
      offset[u][f] = total;
      total += copies * b.value(c.dom(f)).generators();
    }
    values.push_back(PresentedModule<R>::free(ring, total));
  }
  std::vector<Matrix<R>> mats;
  for (MorphismId g = 0; g < c.morphism_count(); ++g) {
    ObjectId u = c.dom(g), u2 = c.cod(g);
    Matrix<R> m(ring, values[u].generators(), values[u2].generators());
    for (auto f : c.morphisms_into(u)) {
      std::size_t n = copies * b.value(c.dom(f)).generators();
      std::size_t from = offset[u][f], to = offset[u2].at(c.compose(g, f));
      for (std::size_t i = 0; i < n; ++i) m(from + i, to + i) = ring.one();
    }
    mats.push_back(std::move(m));
  }
  Precosheaf<R> p(b.category_ptr(), ring, values, std::move(mats));
  std::vector<Matrix<R>> epi;
  for (ObjectId u = 0; u < c.object_count(); ++u) {
    Matrix<R> m(ring, values[u].generators(), b.value(u).generators());
    for (auto f : c.morphisms_into(u)) {
      const auto& bf = b.matrix(f);
      for (std::size_t k = 0; k < copies; ++k) m.set_block(offset[u][f] + k * bf.rows(), 0, bf);
    }
    epi.push_back(std::move(m));
  }
  return {p, {p, b, std::move(epi)}};
}

// The module of natural transformations A -> B, as a submodule of the product of objectwise Hom modules.
template <class R>
class NaturalTransformationModule {
 public:
  NaturalTransformationModule(const Precosheaf<R>& a, const Precosheaf<R>& b)
      : source_(a), target_(b), data_(build()) {}

  const PresentedModule<R>& module() const { return data_->module(); }

  NaturalTransformation<R> element(const std::vector<typename R::Scalar>& coords) const {
    auto flat = data_->basis().apply(coords);
    std::vector<Matrix<R>> comps;
    for (ObjectId o = 0; o < homs_.size(); ++o) {
      std::vector<typename R::Scalar> part(flat.begin() + offsets_[o],
                                           flat.begin() + offsets_[o] + homs_[o].module().generators());
      comps.push_back(homs_[o].element(part).matrix());
    }
    return {source_, target_, std::move(comps)};
  }

  std::vector<typename R::Scalar> coordinates(const NaturalTransformation<R>& t) const {
    std::vector<typename R::Scalar> flat;
    for (ObjectId o = 0; o < homs_.size(); ++o) {
      auto part = homs_[o].coordinates_of_matrix(t.components.at(o));
      flat.insert(flat.end(), part.begin(), part.end());
    }
    auto c = data_->coordinates(flat);
    if (!c) throw InvariantError("not a natural transformation between these precosheaves");
    return *c;
  }

 private:
  std::shared_ptr<Subquotient<R>> build() {
    const auto& c = source_.category();
    const R& ring = source_.ring();
    std::vector<PresentedModule<R>> blocks;
    for (ObjectId o = 0; o < c.object_count(); ++o) {
      homs_.emplace_back(source_.value(o), target_.value(o));
      blocks.push_back(homs_.back().module());
    }
    std::vector<HomModule<R>> arrow_homs;
    std::vector<MorphismId> arrows;
    for (MorphismId m = 0; m < c.morphism_count(); ++m) {
      if (c.is_identity(m)) continue;
      arrows.push_back(m);
      arrow_homs.emplace_back(source_.value(c.dom(m)), target_.value(c.cod(m)));
    }
    auto sum = direct_sum(ring, blocks);
    offsets_ = sum.offsets;
    std::vector<PresentedModule<R>> arrow_mods;
    for (const auto& h : arrow_homs) arrow_mods.push_back(h.module());
    auto target_sum = direct_sum(ring, arrow_mods);
    Matrix<R> f(ring, sum.module.generators(), target_sum.module.generators());
    for (ObjectId o = 0; o < c.object_count(); ++o) {
      for (std::size_t k = 0; k < blocks[o].generators(); ++k) {
        auto phi = homs_[o].generator_map(k);
        for (std::size_t a = 0; a < arrows.size(); ++a) {
          MorphismId m = arrows[a];
          Matrix<R> contrib(ring, source_.value(c.dom(m)).generators(), target_.value(c.cod(m)).generators());
          if (c.dom(m) == o) contrib = contrib + phi.matrix() * target_.matrix(m);
          if (c.cod(m) == o) contrib = contrib - source_.matrix(m) * phi.matrix();
          auto coords = arrow_homs[a].coordinates_of_matrix(contrib);
          for (std::size_t j = 0; j < coords.size(); ++j) f(sum.offsets[o] + k, target_sum.offsets[a] + j) = coords[j];
        }
      }
    }
    ModuleMap<R> map(sum.module, target_sum.module, std::move(f));
    auto k = kernel(map);
    return std::make_shared<Subquotient<R>>(k.data);
  }

  Precosheaf<R> source_;
  Precosheaf<R> target_;
  std::vector<HomModule<R>> homs_;
  std::vector<std::size_t> offsets_;
  std::shared_ptr<Subquotient<R>> data_;
};

template <class R>
struct PrecosheafSimplification {
  Precosheaf<R> precosheaf;
  NaturalTransformation<R> to;
  NaturalTransformation<R> from;
};

// Objectwise simplified presentations, with the natural isomorphisms both ways.
template <class R>
PrecosheafSimplification<R> simplify(const Precosheaf<R>& a) {
  const auto& c = a.category();
  std::vector<Simplification<R>> parts;
  for (ObjectId o = 0; o < c.object_count(); ++o) parts.push_back(simplify(a.value(o)));
  std::vector<PresentedModule<R>> values;
  std::vector<Matrix<R>> to, from;
  for (const auto& p : parts) {
    values.push_back(p.module);
    to.push_back(p.to.matrix());
    from.push_back(p.from.matrix());
  }
  std::vector<Matrix<R>> mats;
  for (MorphismId m = 0; m < c.morphism_count(); ++m) {
    mats.push_back(parts[c.dom(m)].from.matrix() * a.matrix(m) * parts[c.cod(m)].to.matrix());
  }
  Precosheaf<R> s(a.category_ptr(), a.ring(), std::move(values), std::move(mats));
  NaturalTransformation<R> t{a, s, std::move(to)};
  NaturalTransformation<R> f{s, a, std::move(from)};
  return {std::move(s), std::move(t), std::move(f)};
}

}  // namespace cosheaf
