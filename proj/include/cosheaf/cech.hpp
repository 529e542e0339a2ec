#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cosheaf/complex.hpp"
#include "cosheaf/diagram.hpp"
#include "cosheaf/errors.hpp"
#include "cosheaf/fincat.hpp"
#include "cosheaf/kmod.hpp"

namespace cosheaf {

enum class Normalization { kUnnormalized, kNormalized };

// A semi-simplicial indexing of a complex: each cell carries an object of the site, and its k-th
// face a morphism from that object to the face's object. Faces landing on degenerate cells of a
// normalized complex are marked kDegenerate and contribute nothing.
inline constexpr std::size_t kDegenerate = SIZE_MAX;

struct Face {
  std::size_t cell;
  MorphismId morphism;
};

struct Cell {
  ObjectId object;
  std::vector<Face> faces;
};

struct CellComplex {
  std::vector<std::vector<Cell>> cells;  // per degree 0..top
};

// Per degree, the image cell and the morphism from the source cell's object to it.
struct CellMap {
  std::vector<std::vector<Face>> images;
};

namespace detail {

template <class R>
std::vector<std::size_t> block_offsets(const std::vector<Cell>& cells, const std::vector<PresentedModule<R>>& values,
                                       std::size_t* total) {
  std::vector<std::size_t> off;
  std::size_t t = 0;
  for (const auto& c : cells) {
    off.push_back(t);
    t += values[c.object].generators();
  }
  *total = t;
  return off;
}

template <class R>
PresentedModule<R> cell_sum(const R& ring, const std::vector<Cell>& cells, const std::vector<PresentedModule<R>>& values) {
  std::vector<const Matrix<R>*> rels;
  std::size_t g = 0;
  for (const auto& c : cells) {
    rels.push_back(&values[c.object].relations());
    g += values[c.object].generators();
  }
  return PresentedModule<R>(ring, g, block_diagonal(ring, rels));
}

template <class R>
void add_block(Matrix<R>& m, std::size_t r0, std::size_t c0, const Matrix<R>& b, bool negative) {
  const R& ring = m.ring();
  for (std::size_t i = 0; i < b.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      auto& e = m(r0 + i, c0 + j);
      e = negative ? ring.sub(e, b(i, j)) : ring.add(e, b(i, j));
    }
  }
}

}  // namespace detail

// C_n = sum over cells of A(object), d = sum_k (-1)^k A(face morphism).
template <class R>
ChainComplex<R> chain_complex(const CellComplex& cx, const Precosheaf<R>& a) {
  const R& ring = a.ring();
  const auto& values = a.values();
  std::vector<PresentedModule<R>> modules;
  std::vector<std::vector<std::size_t>> offsets;
  std::vector<std::size_t> totals;
  for (const auto& deg : cx.cells) {
    std::size_t t = 0;
    offsets.push_back(detail::block_offsets(deg, values, &t));
    totals.push_back(t);
    modules.push_back(detail::cell_sum(ring, deg, values));
  }
  std::vector<Matrix<R>> bd;
  for (std::size_t n = 1; n < cx.cells.size(); ++n) {
    Matrix<R> d(ring, totals[n], totals[n - 1]);
    for (std::size_t i = 0; i < cx.cells[n].size(); ++i) {
      const auto& cell = cx.cells[n][i];
      for (std::size_t k = 0; k < cell.faces.size(); ++k) {
        const auto& f = cell.faces[k];
        if (f.cell == kDegenerate) continue;
        detail::add_block(d, offsets[n][i], offsets[n - 1][f.cell], a.matrix(f.morphism), k % 2 == 1);
      }
    }
    bd.push_back(std::move(d));
  }
  return ChainComplex<R>(ring, std::move(modules), std::move(bd), true);
}

// C^n = product over cells of B(object), delta = sum_k (-1)^k B(face morphism).
template <class R>
CochainComplex<R> cochain_complex(const CellComplex& cx, const Presheaf<R>& b) {
  const R& ring = b.as_functor().ring();
  const auto& values = b.as_functor().values();
  std::vector<PresentedModule<R>> modules;
  std::vector<std::vector<std::size_t>> offsets;
  std::vector<std::size_t> totals;
  for (const auto& deg : cx.cells) {
    std::size_t t = 0;
    offsets.push_back(detail::block_offsets(deg, values, &t));
    totals.push_back(t);
    modules.push_back(detail::cell_sum(ring, deg, values));
  }
  std::vector<Matrix<R>> cbd;
  for (std::size_t n = 1; n < cx.cells.size(); ++n) {
    Matrix<R> d(ring, totals[n - 1], totals[n]);
    for (std::size_t i = 0; i < cx.cells[n].size(); ++i) {
      const auto& cell = cx.cells[n][i];
      for (std::size_t k = 0; k < cell.faces.size(); ++k) {
        const auto& f = cell.faces[k];
        if (f.cell == kDegenerate) continue;
        detail::add_block(d, offsets[n - 1][f.cell], offsets[n][i], b.matrix(f.morphism), k % 2 == 1);
      }
    }
    cbd.push_back(std::move(d));
  }
  return CochainComplex<R>(ring, std::move(modules), std::move(cbd), true);
}

template <class R>
ChainMap<R> chain_map(const CellMap& map, const CellComplex& source, const CellComplex& target, const Precosheaf<R>& a) {
  const R& ring = a.ring();
  ChainMap<R> out;
  for (std::size_t n = 0; n < source.cells.size(); ++n) {
    std::size_t ts = 0, tt = 0;
    auto os = detail::block_offsets(source.cells[n], a.values(), &ts);
    auto ot = detail::block_offsets(target.cells.at(n), a.values(), &tt);
    Matrix<R> m(ring, ts, tt);
    for (std::size_t i = 0; i < source.cells[n].size(); ++i) {
      const auto& img = map.images.at(n).at(i);
      if (img.cell == kDegenerate) continue;
      detail::add_block(m, os[i], ot[img.cell], a.matrix(img.morphism), false);
    }
    out.components.push_back(std::move(m));
  }
  return out;
}

// Chains i_0 -> ... -> i_n in the comma category of a sieve. Cell object is dom of i_0; face 0 drops
// i_0 along the first arrow, inner faces compose, the last face drops i_n.
inline CellComplex roos_cells(const FinCategory& c, const Sieve& r, std::size_t n_max,
                              Normalization norm = Normalization::kUnnormalized) {
  const std::size_t k = r.members.size();
  std::vector<std::vector<std::pair<MorphismId, std::size_t>>> out(k);
  for (auto [s, t, h] : comma_arrows(c, r)) out[s].emplace_back(h, t);
  if (norm == Normalization::kUnnormalized) {
    for (std::size_t s = 0; s < k; ++s) out[s].emplace_back(c.identity(c.dom(r.members[s])), s);
    for (auto& v : out) std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.second != y.second ? x.second < y.second : x.first < y.first; });
  }
  auto object_of = [&](std::size_t s) { return c.dom(r.members[s]); };
  CellComplex cx;
  // Keys alternate member index and arrow: (a_0, h_1, a_1, ..., h_n, a_n).
  std::vector<std::vector<std::vector<std::size_t>>> keys(n_max + 1);
  std::vector<std::map<std::vector<std::size_t>, std::size_t>> index(n_max + 1);
  cx.cells.resize(n_max + 1);
  for (std::size_t s = 0; s < k; ++s) {
    keys[0].push_back({s});
    index[0][{s}] = s;
    cx.cells[0].push_back({object_of(s), {}});
  }
  auto lookup = [&](std::size_t n, const std::vector<std::size_t>& key) {
    auto it = index[n].find(key);
    if (it != index[n].end()) return it->second;
    if (norm == Normalization::kUnnormalized) throw InvariantError("roos complex: missing face chain");
    return kDegenerate;
  };
  for (std::size_t n = 1; n <= n_max; ++n) {
    for (const auto& prev : keys[n - 1]) {
      for (auto [h, t] : out[prev.back()]) {
        auto key = prev;
        key.push_back(h);
        key.push_back(t);
        index[n][key] = keys[n].size();
        keys[n].push_back(std::move(key));
      }
    }
    for (const auto& key : keys[n]) {
      Cell cell{object_of(key[0]), {}};
      const MorphismId id = c.identity(cell.object);
      for (std::size_t f = 0; f <= n; ++f) {
        std::vector<std::size_t> fk;
        MorphismId mor = id;
        if (f == 0) {
          fk.assign(key.begin() + 2, key.end());
          mor = key[1];
        } else if (f == n) {
          fk.assign(key.begin(), key.end() - 2);
        } else {
          // Replace h_f, a_f, h_{f+1} by h_{f+1} o h_f.
          const std::size_t pos = 2 * f - 1;
          fk.assign(key.begin(), key.begin() + pos);
          fk.push_back(c.compose(key[pos + 2], key[pos]));
          fk.insert(fk.end(), key.begin() + pos + 3, key.end());
          if (norm == Normalization::kNormalized && fk[pos - 1] == fk[pos + 1] && c.is_identity(fk[pos])) {
            cell.faces.push_back({kDegenerate, mor});
            continue;
          }
        }
        cell.faces.push_back({lookup(n - 1, fk), mor});
      }
      cx.cells[n].push_back(std::move(cell));
    }
  }
  return cx;
}

// Iterated fiber products of cover legs, indexed by tuples of leg indices.
class CechNerve {
 public:
  CechNerve(const Site& site, const Cover& cover, std::size_t n_max, Normalization norm)
      : site_(&site), cover_(cover), norm_(norm) {
    const auto& c = site.category();
    for (auto leg : cover_.legs) {
      if (c.cod(leg) != cover_.target) throw CategoryError("cover leg does not end at the cover target");
    }
    const std::size_t k = cover_.legs.size();
    tuples_.resize(n_max + 1);
    for (std::size_t i = 0; i < k; ++i) add({i});
    for (std::size_t n = 1; n <= n_max; ++n) {
      for (std::size_t t = 0; t < tuples_[n - 1].size(); ++t) {
        auto base = tuples_[n - 1][t];
        for (std::size_t i = 0; i < k; ++i) {
          if (norm_ == Normalization::kNormalized && base.back() == i) continue;
          auto next = base;
          next.push_back(i);
          add(std::move(next));
        }
      }
    }
    cells_.cells.resize(n_max + 1);
    for (std::size_t n = 0; n <= n_max; ++n) {
      for (const auto& t : tuples_[n]) {
        const auto& w = nodes_.at(t);
        Cell cell{w.object, {}};
        for (std::size_t f = 0; f < t.size() && n > 0; ++f) {
          auto ft = t;
          ft.erase(ft.begin() + static_cast<std::ptrdiff_t>(f));
          if (!present(ft)) {
            cell.faces.push_back({kDegenerate, c.identity(w.object)});
            continue;
          }
          std::vector<MorphismId> along;
          for (std::size_t j = 0; j < t.size(); ++j) {
            if (j != f) along.push_back(w.projections[j]);
          }
          cell.faces.push_back({cell_index(ft), factor(w.object, ft, along)});
        }
        cells_.cells[n].push_back(std::move(cell));
      }
    }
  }

  const CellComplex& cells() const noexcept { return cells_; }
  const Cover& cover() const noexcept { return cover_; }
  const std::vector<std::size_t>& tuple(std::size_t n, std::size_t i) const { return tuples_.at(n).at(i); }
  bool present(const std::vector<std::size_t>& t) const {
    return degree_index_.count(t) > 0;
  }
  std::size_t cell_index(const std::vector<std::size_t>& t) const { return degree_index_.at(t); }
  ObjectId object(const std::vector<std::size_t>& t) const { return nodes_.at(t).object; }
  const std::vector<MorphismId>& projections(const std::vector<std::size_t>& t) const { return nodes_.at(t).projections; }

  // The unique morphism x -> W(t) whose composites with the projections are the given maps.
  MorphismId factor(ObjectId x, const std::vector<std::size_t>& t, const std::vector<MorphismId>& maps) const {
    const auto& c = site_->category();
    const auto& w = nodes_.at(t);
    for (auto m : c.hom(x, w.object)) {
      bool ok = true;
      for (std::size_t j = 0; j < t.size() && ok; ++j) ok = c.compose(w.projections[j], m) == maps[j];
      if (ok) return m;
    }
    throw InvariantError("no factorization through the fiber product");
  }

 private:
  struct Node {
    ObjectId object;
    std::vector<MorphismId> projections;  // W -> dom(leg_{t_j})
    MorphismId structure;                 // W -> target
  };

  void add(std::vector<std::size_t> t) {
    const auto& c = site_->category();
    if (t.size() == 1) {
      auto leg = cover_.legs[t[0]];
      nodes_[t] = {c.dom(leg), {c.identity(c.dom(leg))}, leg};
    } else {
      std::vector<std::size_t> prefix(t.begin(), t.end() - 1);
      const auto& p = nodes_.at(prefix);
      auto leg = cover_.legs[t.back()];
      auto pb = site_->pullback(p.structure, leg);
      if (!pb) {
        throw MissingPullbackError("no pullback of " + c.morphism_name(p.structure) + " and " + c.morphism_name(leg));
      }
      Node node{pb->object, {}, c.compose(p.structure, pb->p1)};
      for (auto pr : p.projections) node.projections.push_back(c.compose(pr, pb->p1));
      node.projections.push_back(pb->p2);
      nodes_[t] = std::move(node);
    }
    const std::size_t n = t.size() - 1;
    degree_index_[t] = tuples_[n].size();
    tuples_[n].push_back(std::move(t));
  }

  const Site* site_;
  Cover cover_;
  Normalization norm_;
  std::vector<std::vector<std::vector<std::size_t>>> tuples_;
  std::map<std::vector<std::size_t>, Node> nodes_;
  std::map<std::vector<std::size_t>, std::size_t> degree_index_;
  CellComplex cells_;
};

template <class R>
void require_site_of(const Site& site, const Precosheaf<R>& a) {
  if (!same_category<R>(site.category(), a.category())) throw CategoryError("precosheaf lives on a different category");
}

inline void require_sieve_on(const FinCategory& c, const Sieve& r) {
  if (r.target >= c.object_count()) throw CategoryError("sieve target is not an object of the site");
  if (auto v = sieve_violation(c, r)) throw CategoryError("not a sieve: " + *v);
}

template <class R>
ChainComplex<R> roos_chain_complex(const Sieve& r, const Precosheaf<R>& a, std::size_t n_max,
                                   Normalization norm = Normalization::kUnnormalized) {
  require_sieve_on(a.category(), r);
  return chain_complex(roos_cells(a.category(), r, n_max, norm), a);
}

template <class R>
CochainComplex<R> roos_cochain_complex(const Sieve& r, const Presheaf<R>& b, std::size_t n_max,
                                       Normalization norm = Normalization::kUnnormalized) {
  require_sieve_on(b.category(), r);
  return cochain_complex(roos_cells(b.category(), r, n_max, norm), b);
}

template <class R>
ChainComplex<R> cech_chain_complex(const Site& site, const Cover& cover, const Precosheaf<R>& a, std::size_t n_max,
                                   Normalization norm = Normalization::kUnnormalized) {
  require_site_of(site, a);
  return chain_complex(CechNerve(site, cover, n_max, norm).cells(), a);
}

template <class R>
CochainComplex<R> cech_cochain_complex(const Site& site, const Cover& cover, const Presheaf<R>& b, std::size_t n_max,
                                       Normalization norm = Normalization::kUnnormalized) {
  if (!same_category<R>(site.category(), b.category())) throw CategoryError("presheaf lives on a different category");
  return cochain_complex(CechNerve(site, cover, n_max, norm).cells(), b);
}

// Homology entry points use the normalized complexes, which have the same homology.
template <class R>
PresentedModule<R> h_n_sieve(const Sieve& r, const Precosheaf<R>& a, std::size_t n,
                             Normalization norm = Normalization::kNormalized) {
  return roos_chain_complex(r, a, n + 1, norm).homology(n);
}

template <class R>
PresentedModule<R> h_n_cover(const Site& site, const Cover& cover, const Precosheaf<R>& a, std::size_t n,
                             Normalization norm = Normalization::kNormalized) {
  return cech_chain_complex(site, cover, a, n + 1, norm).homology(n);
}

template <class R>
PresentedModule<R> h_upper_n_sieve(const Sieve& r, const Presheaf<R>& b, std::size_t n,
                                   Normalization norm = Normalization::kNormalized) {
  return roos_cochain_complex(r, b, n + 1, norm).cohomology(n);
}

template <class R>
PresentedModule<R> h_upper_n_cover(const Site& site, const Cover& cover, const Presheaf<R>& b, std::size_t n,
                                   Normalization norm = Normalization::kNormalized) {
  return cech_cochain_complex(site, cover, b, n + 1, norm).cohomology(n);
}

enum class CechRoute { kCovers, kSieves };

// A cover refines another when each leg factors through some leg of the other.
struct Refinement {
  std::vector<std::size_t> leg;            // per leg of the finer cover
  std::vector<MorphismId> factorization;  // dom(fine leg) -> dom(coarse leg)
};

inline std::optional<Refinement> refinement(const FinCategory& c, const Cover& fine, const Cover& coarse) {
  Refinement out;
  for (auto f : fine.legs) {
    bool found = false;
    for (std::size_t j = 0; j < coarse.legs.size() && !found; ++j) {
      for (auto h : c.hom(c.dom(f), c.dom(coarse.legs[j]))) {
        if (c.compose(coarse.legs[j], h) == f) {
          out.leg.push_back(j);
          out.factorization.push_back(h);
          found = true;
          break;
        }
      }
    }
    if (!found) return std::nullopt;
  }
  return out;
}

// Cover of u refining every cover of u, fewest legs first.
inline std::optional<Cover> initial_cover(const Site& site, ObjectId u) {
  const auto& covers = site.covers(u);
  std::vector<std::size_t> order(covers.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return covers[x].legs.size() < covers[y].legs.size(); });
  for (auto i : order) {
    bool all = true;
    for (const auto& other : covers) {
      if (!refinement(site.category(), covers[i], other)) {
        all = false;
        break;
      }
    }
    if (all) return covers[i];
  }
  return std::nullopt;
}

// Chain-level map of Cech nerves induced by a refinement.
inline CellMap refinement_cell_map(const FinCategory& c, const CechNerve& fine, const CechNerve& coarse,
                                   const Refinement& ref) {
  CellMap m;
  for (std::size_t n = 0; n < fine.cells().cells.size(); ++n) {
    std::vector<Face> imgs;
    for (std::size_t i = 0; i < fine.cells().cells[n].size(); ++i) {
      const auto& t = fine.tuple(n, i);
      std::vector<std::size_t> img;
      std::vector<MorphismId> maps;
      const auto& pr = fine.projections(t);
      for (std::size_t j = 0; j < t.size(); ++j) {
        img.push_back(ref.leg[t[j]]);
        maps.push_back(c.compose(ref.factorization[t[j]], pr[j]));
      }
      if (!coarse.present(img)) {
        imgs.push_back({kDegenerate, c.identity(fine.object(t))});
        continue;
      }
      imgs.push_back({coarse.cell_index(img), coarse.factor(fine.object(t), img, maps)});
    }
    m.images.push_back(std::move(imgs));
  }
  return m;
}

// Chain-level inclusion of Roos complexes for sieves small inside large.
inline CellMap sieve_inclusion_cell_map(const FinCategory& c, const Sieve& small, const CellComplex& small_cells,
                                        const Sieve& large, const CellComplex& large_cells,
                                        std::size_t n_max, Normalization norm) {
  // Rebuild keys by re-running the enumeration on both sides and matching through member ids.
  auto keys_of = [&](const Sieve& r) {
    std::vector<std::vector<std::vector<MorphismId>>> keys(n_max + 1);
    std::vector<std::vector<std::pair<MorphismId, std::size_t>>> out(r.members.size());
    for (auto [s, t, h] : comma_arrows(c, r)) out[s].emplace_back(h, t);
    if (norm == Normalization::kUnnormalized) {
      for (std::size_t s = 0; s < r.members.size(); ++s) out[s].emplace_back(c.identity(c.dom(r.members[s])), s);
      for (auto& v : out) std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.second != y.second ? x.second < y.second : x.first < y.first; });
    }
    std::vector<std::vector<std::vector<std::size_t>>> raw(n_max + 1);
    for (std::size_t s = 0; s < r.members.size(); ++s) raw[0].push_back({s});
    for (std::size_t n = 1; n <= n_max; ++n) {
      for (const auto& prev : raw[n - 1]) {
        for (auto [h, t] : out[prev.back()]) {
          auto key = prev;
          key.push_back(h);
          key.push_back(t);
          raw[n].push_back(std::move(key));
        }
      }
    }
    for (std::size_t n = 0; n <= n_max; ++n) {
      for (const auto& key : raw[n]) {
        std::vector<MorphismId> k2;
        for (std::size_t i = 0; i < key.size(); ++i) k2.push_back(i % 2 == 0 ? r.members[key[i]] : key[i]);
        keys[n].push_back(std::move(k2));
      }
    }
    return keys;
  };
  auto ks = keys_of(small), kl = keys_of(large);
  CellMap m;
  for (std::size_t n = 0; n <= n_max; ++n) {
    std::map<std::vector<MorphismId>, std::size_t> where;
    for (std::size_t i = 0; i < kl[n].size(); ++i) where[kl[n][i]] = i;
    std::vector<Face> imgs;
    for (std::size_t i = 0; i < ks[n].size(); ++i) {
      auto it = where.find(ks[n][i]);
      if (it == where.end()) throw InvariantError("sieve inclusion: chain missing from the larger sieve");
      imgs.push_back({it->second, c.identity(small_cells.cells[n][i].object)});
    }
    m.images.push_back(std::move(imgs));
  }
  (void)large_cells;
  return m;
}

template <class R>
struct CechHomology {
  PresentedModule<R> module;
  std::string method;  // "initial sieve", "initial cover" or "full limit"
};

// Limit of H_n over all covers (or covering sieves) with refinement transition maps.
template <class R>
CechHomology<R> cech_homology_full_limit(const Site& site, const Precosheaf<R>& a, ObjectId u, std::size_t n,
                                         CechRoute via, Normalization norm = Normalization::kNormalized) {
  require_site_of(site, a);
  const auto& c = site.category();
  std::vector<ChainComplex<R>> complexes;
  std::vector<Subquotient<R>> hom;
  std::vector<DiagramArrow<R>> arrows;
  if (via == CechRoute::kCovers) {
    const auto& covers = site.covers(u);
    std::vector<CechNerve> nerves;
    for (const auto& cv : covers) nerves.emplace_back(site, cv, n + 1, norm);
    for (const auto& nv : nerves) {
      complexes.push_back(chain_complex(nv.cells(), a));
      hom.push_back(complexes.back().homology_data(n));
    }
    for (std::size_t i = 0; i < covers.size(); ++i) {
      for (std::size_t j = 0; j < covers.size(); ++j) {
        if (i == j) continue;
        auto ref = refinement(c, covers[i], covers[j]);
        if (!ref) continue;
        auto cm = chain_map(refinement_cell_map(c, nerves[i], nerves[j], *ref), nerves[i].cells(), nerves[j].cells(), a);
        arrows.push_back({i, j, induced_map(hom[i], hom[j], cm.components.at(n)).matrix()});
      }
    }
  } else {
    const auto& sieves = site.covering_sieves(u);
    std::vector<CellComplex> cells;
    for (const auto& s : sieves) cells.push_back(roos_cells(c, s, n + 1, norm));
    for (const auto& cx : cells) {
      complexes.push_back(chain_complex(cx, a));
      hom.push_back(complexes.back().homology_data(n));
    }
    for (std::size_t i = 0; i < sieves.size(); ++i) {
      for (std::size_t j = 0; j < sieves.size(); ++j) {
        if (i == j || !sieves[i].subset_of(sieves[j])) continue;
        auto cm = chain_map(sieve_inclusion_cell_map(c, sieves[i], cells[i], sieves[j], cells[j], n + 1, norm),
                            cells[i], cells[j], a);
        arrows.push_back({i, j, induced_map(hom[i], hom[j], cm.components.at(n)).matrix()});
      }
    }
  }
  std::vector<PresentedModule<R>> blocks;
  for (const auto& h : hom) blocks.push_back(h.module());
  return {limit_of(a.ring(), blocks, arrows).module(), "full limit"};
}

// Cech homology at u, evaluated at an initial object of the index family when one exists.
template <class R>
CechHomology<R> cech_homology(const Site& site, const Precosheaf<R>& a, ObjectId u, std::size_t n, CechRoute via,
                              Normalization norm = Normalization::kNormalized) {
  require_site_of(site, a);
  if (via == CechRoute::kSieves) {
    return {h_n_sieve(site.minimal_covering_sieve(u), a, n, norm), "initial sieve"};
  }
  if (!site.has_pretopology()) throw PretopologyRequiredError("Cech homology via covers needs a pretopology");
  if (auto cv = initial_cover(site, u)) return {h_n_cover(site, *cv, a, n, norm), "initial cover"};
  return cech_homology_full_limit(site, a, u, n, via, norm);
}

template <class R>
PresentedModule<R> cech_H_n(const Site& site, ObjectId u, const Precosheaf<R>& a, std::size_t n, CechRoute via) {
  return cech_homology(site, a, u, n, via).module;
}

template <class R>
struct PlusResult {
  Precosheaf<R> result;
  NaturalTransformation<R> lambda;  // result -> input
};

// Objectwise H_0 over the minimal covering sieve, with blocks moved along g o h.
template <class R>
PlusResult<R> plus(const Site& site, const Precosheaf<R>& a) {
  require_site_of(site, a);
  const auto& c = site.category();
  std::vector<SieveColimit<R>> cols;
  for (ObjectId u = 0; u < c.object_count(); ++u) cols.push_back(h0_sieve(a, site.minimal_covering_sieve(u)));
  std::vector<PresentedModule<R>> values;
  std::vector<Matrix<R>> lambda;
  for (const auto& col : cols) {
    values.push_back(col.module());
    lambda.push_back(col.comparison.matrix());
  }
  std::vector<Matrix<R>> mats;
  for (MorphismId g = 0; g < c.morphism_count(); ++g) {
    const ObjectId v = c.dom(g), u = c.cod(g);
    const auto& rv = site.minimal_covering_sieve(v);
    const auto& ru = site.minimal_covering_sieve(u);
    Matrix<R> m(a.ring(), values[v].generators(), values[u].generators());
    for (std::size_t i = 0; i < rv.members.size(); ++i) {
      auto gh = c.compose(g, rv.members[i]);
      auto it = std::lower_bound(ru.members.begin(), ru.members.end(), gh);
      if (it == ru.members.end() || *it != gh) throw InvariantError("plus: minimal covering sieves are not compatible");
      const std::size_t j = static_cast<std::size_t>(it - ru.members.begin());
      const std::size_t g0 = cols[v].colimit.offsets[i], g1 = cols[u].colimit.offsets[j];
      for (std::size_t x = 0; x < a.value(c.dom(rv.members[i])).generators(); ++x) m(g0 + x, g1 + x) = a.ring().one();
    }
    mats.push_back(std::move(m));
  }
  Precosheaf<R> p(a.category_ptr(), a.ring(), std::move(values), std::move(mats));
  NaturalTransformation<R> l{p, a, std::move(lambda)};
  return {std::move(p), std::move(l)};
}

template <class R>
PlusResult<R> sharp(const Site& site, const Precosheaf<R>& a) {
  auto p1 = plus(site, a);
  auto p2 = plus(site, p1.result);
  return {p2.result, compose(p1.lambda, p2.lambda)};
}

template <class R>
struct PresheafPlusResult {
  Presheaf<R> result;
  NaturalTransformation<R> lambda;  // input -> result, on the underlying functors of the opposite category
};

template <class R>
PresheafPlusResult<R> plus_presheaf(const Site& site, const Presheaf<R>& b) {
  if (!same_category<R>(site.category(), b.category())) throw CategoryError("presheaf lives on a different category");
  const auto& c = site.category();
  std::vector<SieveLimit<R>> lims;
  for (ObjectId u = 0; u < c.object_count(); ++u) lims.push_back(h0_presheaf(b, site.minimal_covering_sieve(u)));
  std::vector<PresentedModule<R>> values;
  std::vector<Matrix<R>> lambda;
  for (const auto& l : lims) {
    values.push_back(l.module());
    lambda.push_back(l.comparison.matrix());
  }
  std::vector<Matrix<R>> mats;
  for (MorphismId g = 0; g < c.morphism_count(); ++g) {
    const ObjectId v = c.dom(g), u = c.cod(g);
    const auto& rv = site.minimal_covering_sieve(v);
    const auto& ru = site.minimal_covering_sieve(u);
    std::vector<Matrix<R>> parts;
    for (auto h : rv.members) {
      auto gh = c.compose(g, h);
      auto it = std::lower_bound(ru.members.begin(), ru.members.end(), gh);
      if (it == ru.members.end() || *it != gh) throw InvariantError("plus: minimal covering sieves are not compatible");
      parts.push_back(lims[u].limit.cone[static_cast<std::size_t>(it - ru.members.begin())].matrix());
    }
    mats.push_back(lims[v].limit.universal(values[u], parts).matrix());
  }
  Presheaf<R> p(b.category_ptr(), b.as_functor().ring(), std::move(values), std::move(mats));
  NaturalTransformation<R> l{b.as_functor(), p.as_functor(), std::move(lambda)};
  return {std::move(p), std::move(l)};
}

template <class R>
PresheafPlusResult<R> sharp_presheaf(const Site& site, const Presheaf<R>& b) {
  auto p1 = plus_presheaf(site, b);
  auto p2 = plus_presheaf(site, p1.result);
  return {p2.result, compose(p2.lambda, p1.lambda)};
}

struct SieveWitness {
  ObjectId object = 0;
  Sieve sieve;
  std::size_t degree = 0;
  std::string detail;
};

enum class ComparisonCheck { kIso, kEpi, kMono };

namespace detail {

inline bool comparison_ok(bool injective_needed, bool surjective_needed, bool inj, bool surj) {
  return (!injective_needed || inj) && (!surjective_needed || surj);
}

template <class R>
std::optional<SieveWitness> copresheaf_comparison(const Site& site, const Precosheaf<R>& a, bool need_mono, bool need_epi) {
  require_site_of(site, a);
  const auto& c = site.category();
  for (ObjectId u = 0; u < c.object_count(); ++u) {
    for (const auto& r : site.covering_sieves(u)) {
      auto cmp = h0_sieve(a, r).comparison;
      bool inj = !need_mono || is_injective(cmp);
      bool surj = !need_epi || is_surjective(cmp);
      if (!comparison_ok(need_mono, need_epi, inj, surj)) {
        std::string what = !surj ? "not surjective" : "not injective";
        return SieveWitness{u, r, 0, "H_0 of " + describe_sieve(c, r) + " -> value at " + c.object_name(u) + " is " + what};
      }
    }
  }
  return std::nullopt;
}

template <class R>
std::optional<SieveWitness> presheaf_comparison(const Site& site, const Presheaf<R>& b, bool need_mono, bool need_epi) {
  if (!same_category<R>(site.category(), b.category())) throw CategoryError("presheaf lives on a different category");
  const auto& c = site.category();
  for (ObjectId u = 0; u < c.object_count(); ++u) {
    for (const auto& r : site.covering_sieves(u)) {
      auto cmp = h0_presheaf(b, r).comparison;
      bool inj = !need_mono || is_injective(cmp);
      bool surj = !need_epi || is_surjective(cmp);
      if (!comparison_ok(need_mono, need_epi, inj, surj)) {
        std::string what = !inj ? "not injective" : "not surjective";
        return SieveWitness{u, r, 0, "value at " + c.object_name(u) + " -> H^0 of " + describe_sieve(c, r) + " is " + what};
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

template <class R>
std::optional<SieveWitness> cosheaf_violation(const Site& site, const Precosheaf<R>& a) {
  return detail::copresheaf_comparison(site, a, true, true);
}
template <class R>
bool is_cosheaf(const Site& site, const Precosheaf<R>& a) {
  return !cosheaf_violation(site, a);
}

template <class R>
std::optional<SieveWitness> coseparated_violation(const Site& site, const Precosheaf<R>& a) {
  return detail::copresheaf_comparison(site, a, false, true);
}
template <class R>
bool is_coseparated(const Site& site, const Precosheaf<R>& a) {
  return !coseparated_violation(site, a);
}

template <class R>
std::optional<SieveWitness> sheaf_violation(const Site& site, const Presheaf<R>& b) {
  return detail::presheaf_comparison(site, b, true, true);
}
template <class R>
bool is_sheaf(const Site& site, const Presheaf<R>& b) {
  return !sheaf_violation(site, b);
}

template <class R>
std::optional<SieveWitness> separated_violation(const Site& site, const Presheaf<R>& b) {
  return detail::presheaf_comparison(site, b, true, false);
}
template <class R>
bool is_separated(const Site& site, const Presheaf<R>& b) {
  return !separated_violation(site, b);
}

// First morphism whose action is not injective; poset sites only.
template <class R>
std::optional<MorphismId> flabby_violation(const Site& site, const Precosheaf<R>& a) {
  require_site_of(site, a);
  const auto& c = site.category();
  if (!c.is_poset()) throw PosetRequiredError("flabbiness is defined on poset sites only");
  for (MorphismId m = 0; m < c.morphism_count(); ++m) {
    if (!c.is_identity(m) && !is_injective(a.action(m))) return m;
  }
  return std::nullopt;
}
template <class R>
bool is_flabby(const Site& site, const Precosheaf<R>& a) {
  return !flabby_violation(site, a);
}

// First covering sieve with nonzero H_s, 0 < s <= n_max.
template <class R>
std::optional<SieveWitness> flask_violation(const Site& site, const Precosheaf<R>& a, std::size_t n_max) {
  require_site_of(site, a);
  const auto& c = site.category();
  for (ObjectId u = 0; u < c.object_count(); ++u) {
    for (const auto& r : site.covering_sieves(u)) {
      auto cx = roos_chain_complex(r, a, n_max + 1, Normalization::kNormalized);
      for (std::size_t s = 1; s <= n_max; ++s) {
        auto h = canonicalize(cx.homology(s));
        if (!h.is_zero()) {
          return SieveWitness{u, r, s, "H_" + std::to_string(s) + " of " + describe_sieve(c, r) + " is " + h.to_string()};
        }
      }
    }
  }
  return std::nullopt;
}
template <class R>
bool is_flask(const Site& site, const Precosheaf<R>& a, std::size_t n_max) {
  return !flask_violation(site, a, n_max);
}

// M^{components(U)} on the open site of a finite space, blocks moved by component inclusion.
template <class R>
Precosheaf<R> constant_cosheaf(const Site& site, const PresentedModule<R>& m) {
  if (!site.space()) throw CategoryError("constant_cosheaf needs the open site of a finite space");
  const auto& x = *site.space();
  const auto& c = site.category();
  const auto& opens = x.opens();
  if (opens.size() != c.object_count()) throw CategoryError("site objects do not match the opens of its space");
  const R& ring = m.ring();
  std::vector<std::vector<FinSpace::Mask>> comps;
  std::vector<PresentedModule<R>> values;
  for (ObjectId u = 0; u < opens.size(); ++u) {
    comps.push_back(connected_components(x, opens[u]));
    values.push_back(direct_sum_module(ring, std::vector<PresentedModule<R>>(comps.back().size(), m)));
  }
  const std::size_t g = m.generators();
  std::vector<Matrix<R>> mats;
  for (MorphismId f = 0; f < c.morphism_count(); ++f) {
    const ObjectId v = c.dom(f), u = c.cod(f);
    Matrix<R> mat(ring, values[v].generators(), values[u].generators());
    for (std::size_t i = 0; i < comps[v].size(); ++i) {
      std::size_t j = 0;
      while (j < comps[u].size() && (comps[v][i] & ~comps[u][j]) != 0) ++j;
      if (j == comps[u].size()) throw InvariantError("component not contained in a component of the larger open");
      for (std::size_t k = 0; k < g; ++k) mat(i * g + k, j * g + k) = ring.one();
    }
    mats.push_back(std::move(mat));
  }
  return Precosheaf<R>(site.category_ptr(), ring, std::move(values), std::move(mats));
}

}  // namespace cosheaf
