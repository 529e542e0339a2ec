#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cosheaf/errors.hpp"

namespace cosheaf {

using ObjectId = std::size_t;
using MorphismId = std::size_t;

struct MorphismInfo {
  std::string name;
  ObjectId dom;
  ObjectId cod;
  friend bool operator==(const MorphismInfo&, const MorphismInfo&) = default;
};

// Finite category with an explicit composition table.
class FinCategory {
 public:
  class Builder;

  std::size_t object_count() const noexcept { return objects_.size(); }
  std::size_t morphism_count() const noexcept { return morphisms_.size(); }
  const std::string& object_name(ObjectId o) const { return objects_.at(o); }
  const std::vector<std::string>& object_names() const noexcept { return objects_; }
  const MorphismInfo& morphism(MorphismId m) const { return morphisms_.at(m); }
  const std::string& morphism_name(MorphismId m) const { return morphisms_.at(m).name; }
  ObjectId dom(MorphismId m) const { return morphisms_.at(m).dom; }
  ObjectId cod(MorphismId m) const { return morphisms_.at(m).cod; }
  MorphismId identity(ObjectId o) const { return identities_.at(o); }
  bool is_identity(MorphismId m) const { return identities_.at(dom(m)) == m; }

  // g after f; requires cod(f) == dom(g).
  MorphismId compose(MorphismId g, MorphismId f) const {
    const auto c = table_[g * morphisms_.size() + f];
    if (c < 0) {
      throw CategoryError("composite " + morphism_name(g) + " o " + morphism_name(f) + " is undefined");
    }
    return static_cast<MorphismId>(c);
  }

  const std::vector<MorphismId>& hom(ObjectId a, ObjectId b) const { return hom_[a * objects_.size() + b]; }
  const std::vector<MorphismId>& morphisms_into(ObjectId b) const { return into_.at(b); }
  const std::vector<MorphismId>& morphisms_from(ObjectId a) const { return from_.at(a); }

  std::optional<ObjectId> find_object(const std::string& name) const {
    auto it = object_index_.find(name);
    if (it == object_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<MorphismId> find_morphism(const std::string& name) const {
    auto it = morphism_index_.find(name);
    if (it == morphism_index_.end()) return std::nullopt;
    return it->second;
  }
  ObjectId object(const std::string& name) const {
    auto o = find_object(name);
    if (!o) throw CategoryError("unknown object '" + name + "'");
    return *o;
  }
  MorphismId morphism_named(const std::string& name) const {
    auto m = find_morphism(name);
    if (!m) throw CategoryError("unknown morphism '" + name + "'");
    return *m;
  }

  // At most one morphism between any two objects.
  bool is_thin() const {
    for (const auto& h : hom_) {
      if (h.size() > 1) return false;
    }
    return true;
  }
  // Thin and without distinct isomorphic objects.
  bool is_poset() const {
    if (!is_thin()) return false;
    for (ObjectId a = 0; a < object_count(); ++a) {
      for (ObjectId b = a + 1; b < object_count(); ++b) {
        if (!hom(a, b).empty() && !hom(b, a).empty()) return false;
      }
    }
    return true;
  }

  FinCategory opposite() const {
    FinCategory op = *this;
    for (auto& m : op.morphisms_) std::swap(m.dom, m.cod);
    const std::size_t n = morphisms_.size();
    for (std::size_t g = 0; g < n; ++g) {
      for (std::size_t f = 0; f < n; ++f) op.table_[g * n + f] = table_[f * n + g];
    }
    op.index();
    return op;
  }

  friend bool operator==(const FinCategory& a, const FinCategory& b) {
    return a.objects_ == b.objects_ && a.morphisms_ == b.morphisms_ && a.identities_ == b.identities_ &&
           a.table_ == b.table_;
  }

 private:
  void index() {
    const std::size_t no = objects_.size();
    hom_.assign(no * no, {});
    into_.assign(no, {});
    from_.assign(no, {});
    object_index_.clear();
    morphism_index_.clear();
    for (ObjectId o = 0; o < no; ++o) object_index_[objects_[o]] = o;
    for (MorphismId m = 0; m < morphisms_.size(); ++m) {
      const auto& info = morphisms_[m];
      hom_[info.dom * no + info.cod].push_back(m);
      into_[info.cod].push_back(m);
      from_[info.dom].push_back(m);
      morphism_index_[info.name] = m;
    }
  }

  std::vector<std::string> objects_;
  std::vector<MorphismInfo> morphisms_;
  std::vector<MorphismId> identities_;
  std::vector<std::int64_t> table_;
  std::vector<std::vector<MorphismId>> hom_;
  std::vector<std::vector<MorphismId>> into_;
  std::vector<std::vector<MorphismId>> from_;
  std::unordered_map<std::string, ObjectId> object_index_;
  std::unordered_map<std::string, MorphismId> morphism_index_;
};

// Violation of the category axioms found while building.
struct CategoryViolation {
  std::string kind;
  std::string witness;
};

class FinCategory::Builder {
 public:
  ObjectId add_object(const std::string& name) {
    if (object_ids_.count(name)) throw CategoryError("duplicate object '" + name + "'");
    ObjectId o = cat_.objects_.size();
    cat_.objects_.push_back(name);
    object_ids_[name] = o;
    MorphismId id = add_raw("id_" + name, o, o);
    cat_.identities_.push_back(id);
    return o;
  }

  MorphismId add_morphism(const std::string& name, ObjectId dom, ObjectId cod) {
    if (dom >= cat_.objects_.size() || cod >= cat_.objects_.size()) {
      throw CategoryError("morphism '" + name + "' has an unknown endpoint");
    }
    return add_raw(name, dom, cod);
  }

  ObjectId object(const std::string& name) const {
    auto it = object_ids_.find(name);
    if (it == object_ids_.end()) throw CategoryError("unknown object '" + name + "'");
    return it->second;
  }
  MorphismId morphism(const std::string& name) const {
    auto it = morphism_ids_.find(name);
    if (it == morphism_ids_.end()) throw CategoryError("unknown morphism '" + name + "'");
    return it->second;
  }
  MorphismId identity(ObjectId o) const { return cat_.identities_.at(o); }

  // Records g o f = gf.
  void set_composite(MorphismId g, MorphismId f, MorphismId gf) { composites_[{g, f}] = gf; }

  std::optional<CategoryViolation> check() const {
    std::optional<CategoryViolation> bad;
    assemble(&bad);
    return bad;
  }

  FinCategory build() const {
    std::optional<CategoryViolation> bad;
    FinCategory c = assemble(&bad);
    if (bad) throw CategoryError("invalid category: " + bad->kind + " (" + bad->witness + ")", bad->witness);
    return c;
  }

 private:
  MorphismId add_raw(const std::string& name, ObjectId dom, ObjectId cod) {
    if (morphism_ids_.count(name)) throw CategoryError("duplicate morphism '" + name + "'");
    MorphismId m = cat_.morphisms_.size();
    cat_.morphisms_.push_back({name, dom, cod});
    morphism_ids_[name] = m;
    return m;
  }

  FinCategory assemble(std::optional<CategoryViolation>* bad) const {
    FinCategory c = cat_;
    const std::size_t n = c.morphisms_.size();
    c.table_.assign(n * n, -1);
    auto name = [&](MorphismId m) { return c.morphisms_[m].name; };
    auto fail = [&](std::string kind, std::string witness) {
      if (!*bad) *bad = CategoryViolation{std::move(kind), std::move(witness)};
    };
    for (const auto& [gf, h] : composites_) {
      auto [g, f] = gf;
      if (g >= n || f >= n || h >= n) {
        fail("composition", "entry refers to an unknown morphism");
        continue;
      }
      if (c.morphisms_[f].cod != c.morphisms_[g].dom) {
        fail("composition", name(g) + " o " + name(f) + " is not composable");
        continue;
      }
      if (c.morphisms_[h].dom != c.morphisms_[f].dom || c.morphisms_[h].cod != c.morphisms_[g].cod) {
        fail("composition", name(g) + " o " + name(f) + " = " + name(h) + " has the wrong endpoints");
        continue;
      }
      c.table_[g * n + f] = static_cast<std::int64_t>(h);
    }
    for (MorphismId m = 0; m < n; ++m) {
      const auto& info = c.morphisms_[m];
      MorphismId idd = c.identities_[info.dom], idc = c.identities_[info.cod];
      auto set_id = [&](MorphismId g, MorphismId f) {
        auto& slot = c.table_[g * n + f];
        if (slot >= 0 && slot != static_cast<std::int64_t>(m)) {
          fail("identity", name(g) + " o " + name(f) + " should be " + name(m));
        }
        slot = static_cast<std::int64_t>(m);
      };
      set_id(m, idd);
      set_id(idc, m);
    }
    for (MorphismId g = 0; g < n; ++g) {
      for (MorphismId f = 0; f < n; ++f) {
        if (c.morphisms_[f].cod == c.morphisms_[g].dom && c.table_[g * n + f] < 0) {
          fail("totality", name(g) + " o " + name(f) + " is missing");
        }
      }
    }
    if (!*bad) {
      for (MorphismId h = 0; h < n; ++h) {
        for (MorphismId g = 0; g < n; ++g) {
          if (c.morphisms_[g].cod != c.morphisms_[h].dom) continue;
          for (MorphismId f = 0; f < n; ++f) {
            if (c.morphisms_[f].cod != c.morphisms_[g].dom) continue;
            auto hg = c.table_[h * n + g];
            auto gf = c.table_[g * n + f];
            auto left = c.table_[hg * n + f];
            auto right = c.table_[h * n + gf];
            if (left != right) {
              fail("associativity", "(" + name(h) + " o " + name(g) + ") o " + name(f) + " = " +
                                        name(static_cast<MorphismId>(left)) + " but " + name(h) + " o (" +
                                        name(g) + " o " + name(f) + ") = " +
                                        name(static_cast<MorphismId>(right)));
            }
          }
        }
      }
    }
    c.index();
    return c;
  }

  FinCategory cat_;
  std::unordered_map<std::string, ObjectId> object_ids_;
  std::unordered_map<std::string, MorphismId> morphism_ids_;
  std::map<std::pair<MorphismId, MorphismId>, MorphismId> composites_;
};

using CategoryPtr = std::shared_ptr<const FinCategory>;

// Poset on the given names with i -> j iff leq(i, j); leq must be a partial order.
inline FinCategory poset_category(const std::vector<std::string>& names,
                                  const std::function<bool(std::size_t, std::size_t)>& leq) {
  FinCategory::Builder b;
  for (const auto& n : names) b.add_object(n);
  const std::size_t k = names.size();
  std::vector<std::vector<std::optional<MorphismId>>> arrow(k, std::vector<std::optional<MorphismId>>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) {
        arrow[i][j] = b.identity(i);
      } else if (leq(i, j)) {
        if (leq(j, i)) throw CategoryError("poset relation is not antisymmetric", names[i] + ", " + names[j]);
        arrow[i][j] = b.add_morphism(names[i] + "->" + names[j], i, j);
      }
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (!arrow[i][j]) continue;
      for (std::size_t l = 0; l < k; ++l) {
        if (!arrow[j][l]) continue;
        if (!arrow[i][l]) throw CategoryError("poset relation is not transitive", names[i] + ", " + names[l]);
        b.set_composite(*arrow[j][l], *arrow[i][j], *arrow[i][l]);
      }
    }
  }
  return b.build();
}

inline FinCategory point_category(const std::string& name = "*") {
  FinCategory::Builder b;
  b.add_object(name);
  return b.build();
}

// Functor between finite categories.
struct FinFunctor {
  CategoryPtr source;
  CategoryPtr target;
  std::vector<ObjectId> on_objects;
  std::vector<MorphismId> on_morphisms;

  std::optional<std::string> violation() const {
    const auto& s = *source;
    const auto& t = *target;
    if (on_objects.size() != s.object_count() || on_morphisms.size() != s.morphism_count()) {
      return "assignment sizes do not match the source category";
    }
    for (MorphismId m = 0; m < s.morphism_count(); ++m) {
      MorphismId fm = on_morphisms[m];
      if (fm >= t.morphism_count()) return "morphism " + s.morphism_name(m) + " maps outside the target";
      if (t.dom(fm) != on_objects[s.dom(m)] || t.cod(fm) != on_objects[s.cod(m)]) {
        return "morphism " + s.morphism_name(m) + " is not sent to a morphism between the image objects";
      }
    }
    for (ObjectId o = 0; o < s.object_count(); ++o) {
      if (on_morphisms[s.identity(o)] != t.identity(on_objects[o])) {
        return "identity of " + s.object_name(o) + " is not preserved";
      }
    }
    for (MorphismId g = 0; g < s.morphism_count(); ++g) {
      for (MorphismId f : s.morphisms_into(s.dom(g))) {
        if (on_morphisms[s.compose(g, f)] != t.compose(on_morphisms[g], on_morphisms[f])) {
          return "composite " + s.morphism_name(g) + " o " + s.morphism_name(f) + " is not preserved";
        }
      }
    }
    return std::nullopt;
  }

  void validate() const {
    if (auto v = violation()) throw CategoryError("invalid functor: " + *v);
  }

  static FinFunctor identity(const CategoryPtr& c) {
    FinFunctor f{c, c, {}, {}};
    for (ObjectId o = 0; o < c->object_count(); ++o) f.on_objects.push_back(o);
    for (MorphismId m = 0; m < c->morphism_count(); ++m) f.on_morphisms.push_back(m);
    return f;
  }

  // The one-object category sent to v.
  static FinFunctor object_inclusion(const CategoryPtr& c, ObjectId v) {
    auto pt = std::make_shared<const FinCategory>(point_category(c->object_name(v)));
    return FinFunctor{pt, c, {v}, {c->identity(v)}};
  }
};

// The same assignments between opposite categories.
inline FinFunctor opposite(const FinFunctor& f) {
  return FinFunctor{std::make_shared<const FinCategory>(f.source->opposite()),
                    std::make_shared<const FinCategory>(f.target->opposite()), f.on_objects, f.on_morphisms};
}

inline FinCategory discrete_category(const std::vector<std::string>& names) {
  FinCategory::Builder b;
  for (const auto& n : names) b.add_object(n);
  return b.build();
}

// g after f.
inline FinFunctor compose(const FinFunctor& g, const FinFunctor& f) {
  if (!(*f.target == *g.source)) throw CategoryError("functor composition: categories do not match");
  FinFunctor h{f.source, g.target, {}, {}};
  for (auto o : f.on_objects) h.on_objects.push_back(g.on_objects[o]);
  for (auto m : f.on_morphisms) h.on_morphisms.push_back(g.on_morphisms[m]);
  return h;
}

// A set of morphisms into target closed under precomposition; members sorted.
struct Sieve {
  ObjectId target = 0;
  std::vector<MorphismId> members;

  bool contains(MorphismId m) const { return std::binary_search(members.begin(), members.end(), m); }
  std::size_t size() const { return members.size(); }
  bool empty() const { return members.empty(); }
  bool subset_of(const Sieve& o) const {
    return target == o.target && std::includes(o.members.begin(), o.members.end(), members.begin(), members.end());
  }
  friend bool operator==(const Sieve&, const Sieve&) = default;
  friend auto operator<=>(const Sieve& a, const Sieve& b) {
    if (auto c = a.target <=> b.target; c != 0) return c;
    if (auto c = a.members.size() <=> b.members.size(); c != 0) return c;
    return a.members <=> b.members;
  }
};

struct Cover {
  ObjectId target = 0;
  std::vector<MorphismId> legs;
  friend bool operator==(const Cover&, const Cover&) = default;
};

inline std::string describe_sieve(const FinCategory& c, const Sieve& s) {
  std::string out = "sieve on " + c.object_name(s.target) + " {";
  for (std::size_t i = 0; i < s.members.size(); ++i) out += (i ? ", " : "") + c.morphism_name(s.members[i]);
  return out + "}";
}

inline std::string describe_cover(const FinCategory& c, const Cover& cv) {
  std::string out = "cover of " + c.object_name(cv.target) + " {";
  for (std::size_t i = 0; i < cv.legs.size(); ++i) out += (i ? ", " : "") + c.morphism_name(cv.legs[i]);
  return out + "}";
}

inline Sieve make_sieve(ObjectId target, std::vector<MorphismId> members) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  return Sieve{target, std::move(members)};
}

// First member whose precomposite leaves the set, if any.
inline std::optional<std::string> sieve_violation(const FinCategory& c, const Sieve& s) {
  for (auto f : s.members) {
    if (c.cod(f) != s.target) return c.morphism_name(f) + " does not end at " + c.object_name(s.target);
    for (auto g : c.morphisms_into(c.dom(f))) {
      if (!s.contains(c.compose(f, g))) {
        return c.morphism_name(f) + " o " + c.morphism_name(g) + " is missing";
      }
    }
  }
  return std::nullopt;
}

inline Sieve maximal_sieve(const FinCategory& c, ObjectId u) {
  if (u >= c.object_count()) throw CategoryError("unknown object");
  return make_sieve(u, c.morphisms_into(u));
}

inline Sieve sieve_generated_by(const FinCategory& c, const Cover& cover) {
  std::vector<MorphismId> members;
  for (auto leg : cover.legs) {
    if (c.cod(leg) != cover.target) throw CategoryError("cover leg does not end at the cover target");
    for (auto h : c.morphisms_into(c.dom(leg))) members.push_back(c.compose(leg, h));
  }
  return make_sieve(cover.target, std::move(members));
}

// g^* S = {h : g o h in S} on dom(g).
inline Sieve pullback_sieve(const FinCategory& c, const Sieve& s, MorphismId g) {
  if (c.cod(g) != s.target) throw CategoryError("pullback_sieve: morphism does not end at the sieve target");
  std::vector<MorphismId> members;
  for (auto h : c.morphisms_into(c.dom(g))) {
    if (s.contains(c.compose(g, h))) members.push_back(h);
  }
  return make_sieve(c.dom(g), std::move(members));
}

inline Sieve intersect(const Sieve& a, const Sieve& b) {
  Sieve s{a.target, {}};
  std::set_intersection(a.members.begin(), a.members.end(), b.members.begin(), b.members.end(),
                        std::back_inserter(s.members));
  return s;
}

// All sieves on u, in a deterministic order.
inline std::vector<Sieve> all_sieves(const FinCategory& c, ObjectId u) {
  const auto& into = c.morphisms_into(u);
  const std::size_t k = into.size();
  std::unordered_map<MorphismId, std::size_t> pos;
  for (std::size_t i = 0; i < k; ++i) pos[into[i]] = i;
  // below[i]: members forced by including into[i]; above[i]: members excluded with it.
  std::vector<std::vector<std::size_t>> below(k), above(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (auto h : c.morphisms_into(c.dom(into[i]))) {
      std::size_t j = pos.at(c.compose(into[i], h));
      below[i].push_back(j);
      above[j].push_back(i);
    }
  }
  std::vector<Sieve> out;
  std::vector<int> state(k, 0);  // 0 undecided, 1 in, -1 out
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    while (i < k && state[i] != 0) ++i;
    if (i == k) {
      std::vector<MorphismId> members;
      for (std::size_t j = 0; j < k; ++j) {
        if (state[j] == 1) members.push_back(into[j]);
      }
      out.push_back(make_sieve(u, std::move(members)));
      return;
    }
    auto saved = state;
    bool ok = true;
    for (auto j : below[i]) {
      if (state[j] == -1) ok = false;
      state[j] = 1;
    }
    if (ok) rec(i + 1);
    state = saved;
    ok = true;
    for (auto j : above[i]) {
      if (state[j] == 1) ok = false;
      state[j] = -1;
    }
    if (ok) rec(i + 1);
    state = saved;
  };
  rec(0);
  std::sort(out.begin(), out.end());
  return out;
}

struct Pullback {
  ObjectId object;
  MorphismId p1;  // to dom of the first morphism
  MorphismId p2;  // to dom of the second morphism
};

// Searches for a pullback of f and g (common codomain) by checking the universal property.
inline std::optional<Pullback> find_pullback(const FinCategory& c, MorphismId f, MorphismId g) {
  if (c.cod(f) != c.cod(g)) throw CategoryError("pullback of morphisms with different codomains");
  const ObjectId a = c.dom(f), b = c.dom(g);
  std::vector<Pullback> cones;
  for (ObjectId p = 0; p < c.object_count(); ++p) {
    for (auto p1 : c.hom(p, a)) {
      for (auto p2 : c.hom(p, b)) {
        if (c.compose(f, p1) == c.compose(g, p2)) cones.push_back({p, p1, p2});
      }
    }
  }
  for (const auto& cand : cones) {
    bool universal = true;
    for (const auto& other : cones) {
      int factorizations = 0;
      for (auto u : c.hom(other.object, cand.object)) {
        if (c.compose(cand.p1, u) == other.p1 && c.compose(cand.p2, u) == other.p2) ++factorizations;
      }
      if (factorizations != 1) {
        universal = false;
        break;
      }
    }
    if (universal) return cand;
  }
  return std::nullopt;
}

inline bool is_pullback(const FinCategory& c, MorphismId f, MorphismId g, const Pullback& w) {
  if (c.dom(w.p1) != w.object || c.dom(w.p2) != w.object || c.cod(w.p1) != c.dom(f) || c.cod(w.p2) != c.dom(g)) {
    return false;
  }
  if (c.compose(f, w.p1) != c.compose(g, w.p2)) return false;
  for (ObjectId q = 0; q < c.object_count(); ++q) {
    for (auto q1 : c.hom(q, c.dom(f))) {
      for (auto q2 : c.hom(q, c.dom(g))) {
        if (c.compose(f, q1) != c.compose(g, q2)) continue;
        int n = 0;
        for (auto u : c.hom(q, w.object)) {
          if (c.compose(w.p1, u) == q1 && c.compose(w.p2, u) == q2) ++n;
        }
        if (n != 1) return false;
      }
    }
  }
  return true;
}

// Finite topological space on at most 64 points; opens stored as bitmasks.
class FinSpace {
 public:
  using Mask = std::uint64_t;

  FinSpace(std::vector<std::string> points, const std::vector<std::vector<std::string>>& opens)
      : points_(std::move(points)) {
    if (points_.size() > 64) throw Error("finite spaces are limited to 64 points");
    std::map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (!idx.emplace(points_[i], i).second) throw Error("duplicate point '" + points_[i] + "'");
    }
    std::set<Mask> seen;
    for (const auto& o : opens) {
      Mask m = 0;
      for (const auto& p : o) {
        auto it = idx.find(p);
        if (it == idx.end()) throw Error("open set mentions unknown point '" + p + "'");
        m |= Mask{1} << it->second;
      }
      seen.insert(m);
    }
    opens_.assign(seen.begin(), seen.end());
    std::sort(opens_.begin(), opens_.end(), open_less);
    validate();
  }

  const std::vector<std::string>& points() const noexcept { return points_; }
  const std::vector<Mask>& opens() const noexcept { return opens_; }
  Mask whole() const { return points_.size() == 64 ? ~Mask{0} : (Mask{1} << points_.size()) - 1; }
  bool is_open(Mask m) const { return std::binary_search(opens_.begin(), opens_.end(), m, open_less); }
  std::size_t open_index(Mask m) const {
    auto it = std::lower_bound(opens_.begin(), opens_.end(), m, open_less);
    if (it == opens_.end() || *it != m) throw Error("not an open set");
    return static_cast<std::size_t>(it - opens_.begin());
  }

  // Smallest open set containing point x.
  Mask minimal_open(std::size_t x) const {
    Mask m = whole();
    for (auto o : opens_) {
      if (o >> x & 1) m &= o;
    }
    return m;
  }

  std::string name_of(Mask m) const {
    std::string s = "{";
    bool first = true;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (m >> i & 1) {
        s += (first ? "" : ",") + points_[i];
        first = false;
      }
    }
    return s + "}";
  }

  std::vector<std::string> point_list(Mask m) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (m >> i & 1) out.push_back(points_[i]);
    }
    return out;
  }

  Mask mask_of(const std::vector<std::string>& pts) const {
    Mask m = 0;
    for (const auto& p : pts) {
      auto it = std::find(points_.begin(), points_.end(), p);
      if (it == points_.end()) throw Error("unknown point '" + p + "'");
      m |= Mask{1} << (it - points_.begin());
    }
    return m;
  }

  friend bool operator==(const FinSpace&, const FinSpace&) = default;

 private:
  static bool open_less(Mask a, Mask b) {
    int pa = std::popcount(a), pb = std::popcount(b);
    if (pa != pb) return pa < pb;
    return a < b;
  }

  void validate() const {
    if (!is_open(0)) throw Error("topology must contain the empty set");
    if (!is_open(whole())) throw Error("topology must contain the whole space");
    for (auto a : opens_) {
      for (auto b : opens_) {
        if (!is_open(a | b)) throw Error("topology is not closed under union: " + name_of(a) + ", " + name_of(b));
        if (!is_open(a & b)) {
          throw Error("topology is not closed under intersection: " + name_of(a) + ", " + name_of(b));
        }
      }
    }
  }

  std::vector<std::string> points_;
  std::vector<Mask> opens_;
};

// Connected components of the open subspace u, as bitmasks in increasing order.
inline std::vector<FinSpace::Mask> connected_components(const FinSpace& x, FinSpace::Mask u) {
  if (!x.is_open(u)) throw Error("connected_components expects an open set");
  const std::size_t n = x.points().size();
  std::vector<FinSpace::Mask> nbhd(n);
  for (std::size_t i = 0; i < n; ++i) nbhd[i] = x.minimal_open(i);
  std::vector<FinSpace::Mask> comps;
  FinSpace::Mask seen = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(u >> i & 1) || (seen >> i & 1)) continue;
    FinSpace::Mask comp = FinSpace::Mask{1} << i;
    bool grew = true;
    while (grew) {
      grew = false;
      for (std::size_t j = 0; j < n; ++j) {
        if (!(u >> j & 1) || (comp >> j & 1)) continue;
        // j is adjacent to the component if one lies in the other's minimal neighbourhood.
        bool adj = (nbhd[j] & comp) != 0;
        for (std::size_t k = 0; k < n && !adj; ++k) {
          if ((comp >> k & 1) && (nbhd[k] >> j & 1)) adj = true;
        }
        if (adj) {
          comp |= FinSpace::Mask{1} << j;
          grew = true;
        }
      }
    }
    seen |= comp;
    comps.push_back(comp);
  }
  std::sort(comps.begin(), comps.end());
  return comps;
}

struct AxiomViolation {
  std::string axiom;
  ObjectId object;
  Sieve sieve;
  std::string detail;
};

using Topology = std::vector<std::vector<Sieve>>;

// Exhaustive check of the Grothendieck topology axioms GT1-GT4 (and sieve closure).
inline std::optional<AxiomViolation> check_gt(const FinCategory& c, const Topology& cov) {
  if (cov.size() != c.object_count()) return AxiomViolation{"shape", 0, {}, "one sieve list per object expected"};
  std::vector<std::set<Sieve>> covering(c.object_count());
  for (ObjectId u = 0; u < c.object_count(); ++u) {
    for (const auto& s : cov[u]) {
      if (s.target != u) return AxiomViolation{"shape", u, s, "sieve listed under the wrong object"};
      if (auto v = sieve_violation(c, s)) return AxiomViolation{"sieve", u, s, *v};
      covering[u].insert(s);
    }
  }
  for (ObjectId u = 0; u < c.object_count(); ++u) {
    Sieve h = maximal_sieve(c, u);
    if (!covering[u].count(h)) return AxiomViolation{"GT1", u, h, "maximal sieve does not cover"};
  }
  std::vector<std::vector<Sieve>> sieves(c.object_count());
  for (ObjectId u = 0; u < c.object_count(); ++u) sieves[u] = all_sieves(c, u);
  for (ObjectId u = 0; u < c.object_count(); ++u) {
    for (const auto& s : covering[u]) {
      for (const auto& t : sieves[u]) {
        if (s.subset_of(t) && !covering[u].count(t)) {
          return AxiomViolation{"GT2", u, t, "contains the covering " + describe_sieve(c, s) + " but does not cover"};
        }
      }
      for (auto g : c.morphisms_into(u)) {
        Sieve p = pullback_sieve(c, s, g);
        if (!covering[c.dom(g)].count(p)) {
          return AxiomViolation{"GT3", c.dom(g), p,
                                "pullback of " + describe_sieve(c, s) + " along " + c.morphism_name(g)};
        }
      }
    }
  }
  for (ObjectId u = 0; u < c.object_count(); ++u) {
    for (const auto& t : sieves[u]) {
      if (covering[u].count(t)) continue;
      for (const auto& s : covering[u]) {
        bool local = true;
        for (auto f : s.members) {
          if (!covering[c.dom(f)].count(pullback_sieve(c, t, f))) {
            local = false;
            break;
          }
        }
        if (local) {
          return AxiomViolation{"GT4", u, t, "locally covering along " + describe_sieve(c, s) + " but not covering"};
        }
      }
    }
  }
  return std::nullopt;
}

// Finite site: a category with an extensional Grothendieck topology, optionally a generating pretopology.
class Site {
 public:
  Site(CategoryPtr category, Topology covering, std::optional<std::vector<std::vector<Cover>>> pretopology = {},
       std::optional<FinSpace> space = {})
      : category_(std::move(category)),
        covering_(std::move(covering)),
        pretopology_(std::move(pretopology)),
        space_(std::move(space)) {
    for (auto& list : covering_) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    if (auto v = check_gt(*category_, covering_)) {
      throw SiteAxiomError(v->axiom, describe_sieve(*category_, v->sieve) + ": " + v->detail);
    }
    pretopology_generated_ = compute_generated();
    minimal_.reserve(covering_.size());
    for (ObjectId u = 0; u < covering_.size(); ++u) {
      Sieve m = maximal_sieve(*category_, u);
      for (const auto& s : covering_[u]) m = intersect(m, s);
      minimal_.push_back(m);
    }
  }

  const FinCategory& category() const noexcept { return *category_; }
  const CategoryPtr& category_ptr() const noexcept { return category_; }
  const std::vector<Sieve>& covering_sieves(ObjectId u) const { return covering_.at(u); }
  const Topology& topology() const noexcept { return covering_; }
  bool is_covering(const Sieve& s) const {
    const auto& l = covering_.at(s.target);
    return std::binary_search(l.begin(), l.end(), s);
  }
  bool has_pretopology() const noexcept { return pretopology_.has_value(); }
  const std::vector<Cover>& covers(ObjectId u) const {
    if (!pretopology_) throw PretopologyRequiredError("site has no pretopology");
    return pretopology_->at(u);
  }
  // True when every covering sieve contains one generated by a cover.
  bool pretopology_generated() const noexcept { return pretopology_generated_; }
  // Intersection of all covering sieves on u; covering by GT2-GT4.
  const Sieve& minimal_covering_sieve(ObjectId u) const { return minimal_.at(u); }
  const std::optional<FinSpace>& space() const noexcept { return space_; }

  // Pullback of legs over a common target, using supplied witnesses first, then search.
  std::optional<Pullback> pullback(MorphismId f, MorphismId g) const {
    auto key = std::make_pair(f, g);
    auto it = witnesses_.find(key);
    if (it != witnesses_.end()) return it->second;
    return find_pullback(*category_, f, g);
  }

  void add_pullback_witness(MorphismId f, MorphismId g, const Pullback& w) {
    if (!is_pullback(*category_, f, g, w)) {
      throw MissingPullbackError("supplied pullback witness for " + category_->morphism_name(f) + ", " +
                                 category_->morphism_name(g) + " fails the universal property");
    }
    witnesses_[{f, g}] = w;
  }
  const std::map<std::pair<MorphismId, MorphismId>, Pullback>& pullback_witnesses() const { return witnesses_; }

 private:
  bool compute_generated() const {
    if (!pretopology_) return false;
    for (ObjectId u = 0; u < covering_.size(); ++u) {
      std::vector<Sieve> gen;
      for (const auto& cv : pretopology_->at(u)) gen.push_back(sieve_generated_by(*category_, cv));
      for (const auto& s : covering_[u]) {
        bool found = false;
        for (const auto& g : gen) {
          if (g.subset_of(s)) {
            found = true;
            break;
          }
        }
        if (!found) return false;
      }
      for (const auto& g : gen) {
        if (!is_covering(g)) return false;
      }
    }
    return true;
  }

  CategoryPtr category_;
  Topology covering_;
  std::optional<std::vector<std::vector<Cover>>> pretopology_;
  std::optional<FinSpace> space_;
  bool pretopology_generated_ = false;
  std::vector<Sieve> minimal_;
  std::map<std::pair<MorphismId, MorphismId>, Pullback> witnesses_;
};

// Smallest Grothendieck topology in which every cover generates a covering sieve.
inline Topology gt_closure(const FinCategory& c, Topology seed) {
  const std::size_t n = c.object_count();
  std::vector<std::vector<Sieve>> sieves(n);
  std::vector<std::set<Sieve>> cov(n);
  for (ObjectId u = 0; u < n; ++u) {
    sieves[u] = all_sieves(c, u);
    cov[u].insert(maximal_sieve(c, u));
    for (auto& s : seed.at(u)) cov[u].insert(s);
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (ObjectId u = 0; u < n; ++u) {
      std::vector<Sieve> current(cov[u].begin(), cov[u].end());
      for (const auto& s : current) {
        for (const auto& t : sieves[u]) {
          if (s.subset_of(t) && cov[u].insert(t).second) changed = true;
        }
        for (auto g : c.morphisms_into(u)) {
          if (cov[c.dom(g)].insert(pullback_sieve(c, s, g)).second) changed = true;
        }
      }
    }
    for (ObjectId u = 0; u < n; ++u) {
      for (const auto& t : sieves[u]) {
        if (cov[u].count(t)) continue;
        for (const auto& s : cov[u]) {
          bool local = std::all_of(s.members.begin(), s.members.end(), [&](MorphismId f) {
            return cov[c.dom(f)].count(pullback_sieve(c, t, f)) > 0;
          });
          if (local) {
            cov[u].insert(t);
            changed = true;
            break;
          }
        }
      }
    }
  }
  Topology out(n);
  for (ObjectId u = 0; u < n; ++u) out[u].assign(cov[u].begin(), cov[u].end());
  return out;
}

inline Site topology_from_pretopology(CategoryPtr c, std::vector<std::vector<Cover>> covers,
                                      std::optional<FinSpace> space = {}) {
  if (covers.size() != c->object_count()) throw CategoryError("one cover list per object expected");
  Topology seed(c->object_count());
  for (ObjectId u = 0; u < c->object_count(); ++u) {
    for (const auto& cv : covers[u]) {
      if (cv.target != u) throw CategoryError("cover listed under the wrong object");
      for (auto leg : cv.legs) {
        if (c->cod(leg) != u) throw CategoryError("cover leg " + c->morphism_name(leg) + " does not end at target");
      }
      seed[u].push_back(sieve_generated_by(*c, cv));
    }
  }
  Topology top = gt_closure(*c, std::move(seed));
  return Site(std::move(c), std::move(top), std::move(covers), std::move(space));
}

// Every sieve covers.
inline Site discrete_site(CategoryPtr c) {
  Topology top(c->object_count());
  for (ObjectId u = 0; u < c->object_count(); ++u) top[u] = all_sieves(*c, u);
  return Site(std::move(c), std::move(top));
}

// Only maximal sieves cover.
inline Site trivial_site(CategoryPtr c) {
  Topology top(c->object_count());
  for (ObjectId u = 0; u < c->object_count(); ++u) top[u] = {maximal_sieve(*c, u)};
  return Site(std::move(c), std::move(top));
}

// Inclusion poset of opens, open coverings as the pretopology.
inline Site open_site(const FinSpace& x) {
  const auto& opens = x.opens();
  std::vector<std::string> names;
  for (auto o : opens) names.push_back(x.name_of(o));
  auto cat = std::make_shared<const FinCategory>(
      poset_category(names, [&](std::size_t i, std::size_t j) { return (opens[i] & ~opens[j]) == 0; }));
  std::vector<std::vector<Cover>> covers(opens.size());
  Topology top(opens.size());
  for (ObjectId u = 0; u < opens.size(); ++u) {
    std::vector<ObjectId> subs;
    for (ObjectId v = 0; v < opens.size(); ++v) {
      if ((opens[v] & ~opens[u]) == 0) subs.push_back(v);
    }
    if (subs.size() > 20) throw Error("open_site: too many opens inside " + names[u]);
    for (std::uint64_t pick = 0; pick < (std::uint64_t{1} << subs.size()); ++pick) {
      FinSpace::Mask uni = 0;
      Cover cv{u, {}};
      for (std::size_t k = 0; k < subs.size(); ++k) {
        if (pick >> k & 1) {
          uni |= opens[subs[k]];
          cv.legs.push_back(cat->hom(subs[k], u).front());
        }
      }
      if (uni == opens[u]) covers[u].push_back(std::move(cv));
    }
    for (const auto& s : all_sieves(*cat, u)) {
      FinSpace::Mask uni = 0;
      for (auto f : s.members) uni |= opens[cat->dom(f)];
      if (uni == opens[u]) top[u].push_back(s);
    }
  }
  return Site(cat, std::move(top), std::move(covers), x);
}

// Comma category over U (all arrows into U) or over a sieve R (arrows in R).
struct CommaCategory {
  CategoryPtr category;
  std::vector<MorphismId> structure;      // per object: its arrow into the base object
  std::vector<MorphismId> base_morphism;  // per morphism: underlying arrow of the base category
  CategoryPtr base;

  ObjectId base_object(ObjectId o) const { return base->dom(structure.at(o)); }

  FinFunctor projection() const {
    FinFunctor f{category, base, {}, base_morphism};
    for (auto s : structure) f.on_objects.push_back(base->dom(s));
    return f;
  }
};

inline CommaCategory comma_sieve(const CategoryPtr& c, const Sieve& r) {
  FinCategory::Builder b;
  CommaCategory out{nullptr, r.members, {}, c};
  std::map<MorphismId, ObjectId> obj;
  for (auto f : r.members) obj[f] = b.add_object(c->morphism_name(f));
  out.base_morphism.assign(r.members.size(), 0);
  for (std::size_t i = 0; i < r.members.size(); ++i) out.base_morphism[i] = c->identity(c->dom(r.members[i]));
  std::map<std::tuple<MorphismId, MorphismId, MorphismId>, MorphismId> arrows;  // (h, f, f') -> id
  for (auto f : r.members) {
    for (auto f2 : r.members) {
      for (auto h : c->hom(c->dom(f), c->dom(f2))) {
        if (c->compose(f2, h) != f) continue;
        MorphismId id;
        if (f == f2 && c->is_identity(h)) {
          id = b.identity(obj[f]);
        } else {
          id = b.add_morphism(c->morphism_name(h) + "[" + c->morphism_name(f) + "," + c->morphism_name(f2) + "]",
                              obj[f], obj[f2]);
          out.base_morphism.push_back(h);
        }
        arrows[{h, f, f2}] = id;
      }
    }
  }
  for (const auto& [k1, m1] : arrows) {
    auto [h1, f, f2] = k1;
    for (const auto& [k2, m2] : arrows) {
      auto [h2, g, g2] = k2;
      if (g != f2) continue;
      b.set_composite(m2, m1, arrows.at({c->compose(h2, h1), f, g2}));
    }
  }
  out.category = std::make_shared<const FinCategory>(b.build());
  return out;
}

inline CommaCategory comma_over(const CategoryPtr& c, ObjectId u) { return comma_sieve(c, maximal_sieve(*c, u)); }

// A composable chain x_0 -> x_1 -> ... -> x_n.
struct Chain {
  ObjectId start;
  std::vector<MorphismId> arrows;
  friend auto operator<=>(const Chain&, const Chain&) = default;
};

// All chains of n composable arrows; identities skipped when nondegenerate is set.
inline std::vector<Chain> nerve_chains(const FinCategory& c, std::size_t n, bool nondegenerate) {
  std::vector<Chain> out;
  Chain cur{0, {}};
  std::function<void(ObjectId)> rec = [&](ObjectId at) {
    if (cur.arrows.size() == n) {
      out.push_back(cur);
      return;
    }
    for (auto m : c.morphisms_from(at)) {
      if (nondegenerate && c.is_identity(m)) continue;
      cur.arrows.push_back(m);
      rec(c.cod(m));
      cur.arrows.pop_back();
    }
  };
  for (ObjectId o = 0; o < c.object_count(); ++o) {
    cur.start = o;
    rec(o);
  }
  return out;
}

}  // namespace cosheaf
