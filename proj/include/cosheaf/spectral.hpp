#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "cosheaf/cech.hpp"
#include "cosheaf/complex.hpp"
#include "cosheaf/errors.hpp"
#include "cosheaf/kmod.hpp"
#include "cosheaf/linalg.hpp"
#include "cosheaf/satellite.hpp"

namespace cosheaf {

// First-quadrant bicomplex on the grid 0 <= s <= s_max, 0 <= t <= t_max, zero elsewhere.
// horizontal(s, t) : X_{s,t} -> X_{s-1,t} and vertical(s, t) : X_{s,t} -> X_{s,t-1}; squares commute.
template <class R>
class Bicomplex {
 public:
  // entries[s][t]; every map starts out zero.
  Bicomplex(R ring, std::vector<std::vector<PresentedModule<R>>> entries)
      : ring_(std::move(ring)), entries_(std::move(entries)) {
    if (entries_.empty() || entries_[0].empty()) throw DimensionError("a bicomplex needs at least one entry");
    for (const auto& col : entries_) {
      if (col.size() != entries_[0].size()) throw DimensionError("bicomplex entries must form a rectangle");
    }
    for (std::size_t s = 0; s < entries_.size(); ++s) {
      horizontal_.emplace_back();
      vertical_.emplace_back();
      for (std::size_t t = 0; t < entries_[s].size(); ++t) {
        horizontal_[s].emplace_back(ring_, entry(s, t).generators(), s == 0 ? 0 : entry(s - 1, t).generators());
        vertical_[s].emplace_back(ring_, entry(s, t).generators(), t == 0 ? 0 : entry(s, t - 1).generators());
      }
    }
  }

  const R& ring() const noexcept { return ring_; }
  std::size_t s_max() const noexcept { return entries_.size() - 1; }
  std::size_t t_max() const noexcept { return entries_[0].size() - 1; }
  bool in_grid(long s, long t) const {
    return s >= 0 && t >= 0 && s <= static_cast<long>(s_max()) && t <= static_cast<long>(t_max());
  }

  PresentedModule<R> entry(long s, long t) const {
    if (!in_grid(s, t)) return PresentedModule<R>::zero(ring_);
    return entries_[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)];
  }

  void set_horizontal(std::size_t s, std::size_t t, Matrix<R> m) {
    if (s == 0 || !in_grid(static_cast<long>(s), static_cast<long>(t))) throw DimensionError("no horizontal map there");
    require_shape(m, entry(s, t), entry(s - 1, t));
    horizontal_[s][t] = std::move(m);
  }
  void set_vertical(std::size_t s, std::size_t t, Matrix<R> m) {
    if (t == 0 || !in_grid(static_cast<long>(s), static_cast<long>(t))) throw DimensionError("no vertical map there");
    require_shape(m, entry(s, t), entry(s, t - 1));
    vertical_[s][t] = std::move(m);
  }

  ModuleMap<R> horizontal(long s, long t) const {
    Matrix<R> m = in_grid(s, t) && s > 0 ? horizontal_[s][t]
                                         : Matrix<R>(ring_, entry(s, t).generators(), entry(s - 1, t).generators());
    return ModuleMap<R>(entry(s, t), entry(s - 1, t), std::move(m));
  }
  ModuleMap<R> vertical(long s, long t) const {
    Matrix<R> m = in_grid(s, t) && t > 0 ? vertical_[s][t]
                                         : Matrix<R>(ring_, entry(s, t).generators(), entry(s, t - 1).generators());
    return ModuleMap<R>(entry(s, t), entry(s, t - 1), std::move(m));
  }

  // A description of the first failing axiom, if any.
  std::optional<std::string> violation() const {
    for (long s = 0; s <= static_cast<long>(s_max()); ++s) {
      for (long t = 0; t <= static_cast<long>(t_max()); ++t) {
        auto at = " at (" + std::to_string(s) + "," + std::to_string(t) + ")";
        auto d = horizontal(s, t);
        auto v = vertical(s, t);
        if (!is_well_defined(d)) return "horizontal map is not well defined" + at;
        if (!is_well_defined(v)) return "vertical map is not well defined" + at;
        if (!is_zero_map(compose(horizontal(s - 1, t), d))) return "d o d is nonzero" + at;
        if (!is_zero_map(compose(vertical(s, t - 1), v))) return "delta o delta is nonzero" + at;
        if (!maps_equal(compose(vertical(s - 1, t), d), compose(horizontal(s, t - 1), v))) {
          return "square does not commute" + at;
        }
      }
    }
    return std::nullopt;
  }
  void validate() const {
    if (auto v = violation()) throw InvariantError("bicomplex: " + *v);
  }

  // Swaps the roles of s and t.
  Bicomplex transpose() const {
    std::vector<std::vector<PresentedModule<R>>> e(t_max() + 1);
    for (std::size_t t = 0; t <= t_max(); ++t) {
      for (std::size_t s = 0; s <= s_max(); ++s) e[t].push_back(entries_[s][t]);
    }
    Bicomplex out(ring_, std::move(e));
    for (std::size_t s = 0; s <= s_max(); ++s) {
      for (std::size_t t = 0; t <= t_max(); ++t) {
        if (s > 0) out.vertical_[t][s] = horizontal_[s][t];
        if (t > 0) out.horizontal_[t][s] = vertical_[s][t];
      }
    }
    return out;
  }

 private:
  static void require_shape(const Matrix<R>& m, const PresentedModule<R>& src, const PresentedModule<R>& dst) {
    if (m.rows() != src.generators() || m.cols() != dst.generators()) throw DimensionError("bicomplex map has the wrong shape");
  }

  R ring_;
  std::vector<std::vector<PresentedModule<R>>> entries_;
  std::vector<std::vector<Matrix<R>>> horizontal_;
  std::vector<std::vector<Matrix<R>>> vertical_;
};

namespace detail {

// Blocks (s, offset) of Tot_n in increasing s.
template <class R>
std::vector<std::pair<long, std::size_t>> tot_blocks(const Bicomplex<R>& x, long n, std::size_t* total) {
  std::vector<std::pair<long, std::size_t>> out;
  std::size_t off = 0;
  for (long s = 0; s <= n; ++s) {
    if (!x.in_grid(s, n - s)) continue;
    out.emplace_back(s, off);
    off += x.entry(s, n - s).generators();
  }
  *total = off;
  return out;
}

}  // namespace detail

// Tot_n = sum_{s+t=n} X_{s,t}, with the boundary d + (-1)^s delta on X_{s,t}.
template <class R>
ChainComplex<R> total_complex(const Bicomplex<R>& x) {
  const R& ring = x.ring();
  const long top = static_cast<long>(x.s_max() + x.t_max());
  std::vector<PresentedModule<R>> mods;
  std::vector<std::vector<std::pair<long, std::size_t>>> blocks;
  std::vector<std::size_t> sizes;
  for (long n = 0; n <= top; ++n) {
    std::size_t total = 0;
    blocks.push_back(detail::tot_blocks(x, n, &total));
    sizes.push_back(total);
    std::vector<const Matrix<R>*> rels;
    std::vector<PresentedModule<R>> parts;
    for (auto [s, off] : blocks.back()) parts.push_back(x.entry(s, n - s));
    for (const auto& p : parts) rels.push_back(&p.relations());
    mods.emplace_back(ring, total, block_diagonal(ring, rels));
  }
  std::vector<Matrix<R>> bd;
  for (long n = 1; n <= top; ++n) {
    Matrix<R> d(ring, sizes[n], sizes[n - 1]);
    auto offset_of = [&](long s) -> std::optional<std::size_t> {
      for (auto [s2, off] : blocks[n - 1]) {
        if (s2 == s) return off;
      }
      return std::nullopt;
    };
    for (auto [s, off] : blocks[n]) {
      const long t = n - s;
      if (auto o = offset_of(s - 1)) detail::add_block(d, off, *o, x.horizontal(s, t).matrix(), false);
      if (auto o = offset_of(s)) detail::add_block(d, off, *o, x.vertical(s, t).matrix(), s % 2 == 1);
    }
    bd.push_back(std::move(d));
  }
  ChainComplex<R> out(ring, std::move(mods), std::move(bd), false);
  out.validate();
  return out;
}

// ver: filtration by columns, d^r : (s,t) -> (s-r, t+r-1). hor: by rows, d^r : (s,t) -> (s+r-1, t-r).
enum class Orientation { kVertical, kHorizontal };

inline std::string to_string(Orientation o) { return o == Orientation::kVertical ? "vertical" : "horizontal"; }

template <class R>
struct SpectralPage {
  std::size_t r = 0;
  Orientation orientation = Orientation::kVertical;
  // entries[s][t] as subquotients of Tot_{s+t}; differentials[s][t] leaves (s,t).
  std::vector<std::vector<Subquotient<R>>> entries;
  std::vector<std::vector<ModuleMap<R>>> differentials;
  // Page index from which each entry no longer changes; set by e_infinity only.
  std::vector<std::vector<std::size_t>> stable_from;

  const PresentedModule<R>& entry(std::size_t s, std::size_t t) const { return entries.at(s).at(t).module(); }
  const ModuleMap<R>& differential(std::size_t s, std::size_t t) const { return differentials.at(s).at(t); }
};

// Bidegree of the target of d^r from (s,t).
inline std::pair<long, long> differential_target(Orientation o, std::size_t r, long s, long t) {
  const long rr = static_cast<long>(r);
  return o == Orientation::kVertical ? std::make_pair(s - rr, t + rr - 1) : std::make_pair(s + rr - 1, t - rr);
}

// The pages of one of the two spectral sequences, computed as explicit subquotients of the total
// complex: E^r_p = Z^r_p / (Z^{r-1}_{p-1} + boundary(Z^{r-1}_{p+r-1})), Z^r_p = F_p meet preimage(F_{p-r}).
// Everything lives in the free lift of Tot_n, where F_p is the preimage of the filtration stage.
template <class R>
class SpectralSequence {
 public:
  SpectralSequence(const Bicomplex<R>& x, Orientation o) : x_(x), orientation_(o), tot_(total_complex(x)) {
    top_ = static_cast<long>(x.s_max() + x.t_max());
    for (long n = 0; n <= top_; ++n) {
      std::size_t total = 0;
      blocks_.push_back(detail::tot_blocks(x_, n, &total));
    }
  }

  const Bicomplex<R>& bicomplex() const noexcept { return x_; }
  Orientation orientation() const noexcept { return orientation_; }
  const ChainComplex<R>& total() const noexcept { return tot_; }
  // E^r is constant from this page on, everywhere on the grid.
  std::size_t infinity_page() const { return std::max(x_.s_max(), x_.t_max()) + 2; }

  Subquotient<R> entry(std::size_t r, long s, long t) const {
    const long n = s + t;
    const long p = filtration_index(s, t);
    const long rr = static_cast<long>(r);
    if (!x_.in_grid(s, t)) return Subquotient<R>(Matrix<R>(x_.ring(), 0, lift_rank(n)), Matrix<R>(x_.ring(), 0, lift_rank(n)));
    Matrix<R> den = z(rr - 1, p - 1, n);
    den.append_rows(image_of(z(rr - 1, p + rr - 1, n + 1), n + 1));
    return Subquotient<R>(z(rr, p, n), den);
  }

  // d^r out of an entry of total degree n, induced by the boundary of Tot.
  ModuleMap<R> differential(long n, const Subquotient<R>& source, const Subquotient<R>& target) const {
    if (n == 0 || target.module().generators() == 0) {
      return ModuleMap<R>(source.module(), target.module(),
                          Matrix<R>(x_.ring(), source.module().generators(), target.module().generators()));
    }
    return induced_map(source, target, tot_.boundary(static_cast<std::size_t>(n)).matrix());
  }

  // Cycles of Tot_n lying in the filtration stage p (lifted).
  Matrix<R> stage_cycles(long p, long n) const { return z(p + 1, p, n); }

  SpectralPage<R> page(std::size_t r) const {
    SpectralPage<R> pg;
    pg.r = r;
    pg.orientation = orientation_;
    for (long s = 0; s <= static_cast<long>(x_.s_max()); ++s) {
      pg.entries.emplace_back();
      for (long t = 0; t <= static_cast<long>(x_.t_max()); ++t) pg.entries.back().push_back(entry(r, s, t));
    }
    for (long s = 0; s <= static_cast<long>(x_.s_max()); ++s) {
      pg.differentials.emplace_back();
      for (long t = 0; t <= static_cast<long>(x_.t_max()); ++t) {
        auto [s2, t2] = differential_target(orientation_, r, s, t);
        const auto& src = pg.entries[s][t];
        if (x_.in_grid(s2, t2)) {
          pg.differentials.back().push_back(differential(s + t, src, pg.entries[s2][t2]));
        } else {
          pg.differentials.back().push_back(differential(s + t, src, entry(r, s2, t2)));
        }
      }
    }
    return pg;
  }

 private:
  long filtration_index(long s, long t) const { return orientation_ == Orientation::kVertical ? s : t; }

  std::size_t lift_rank(long n) const {
    if (n < 0 || n > top_) return 0;
    return tot_.module(static_cast<std::size_t>(n)).generators();
  }

  // Generators of F_p in the lift of Tot_n: whole blocks at filtration <= p, relations elsewhere.
  Matrix<R> stage(long p, long n) const {
    const std::size_t g = lift_rank(n);
    Matrix<R> out(x_.ring(), 0, g);
    if (n < 0 || n > top_) return out;
    for (auto [s, off] : blocks_[n]) {
      auto e = x_.entry(s, n - s);
      if (filtration_index(s, n - s) <= p) {
        for (std::size_t i = 0; i < e.generators(); ++i) {
          std::vector<typename R::Scalar> row(g, x_.ring().zero());
          row[off + i] = x_.ring().one();
          out.append_row(row);
        }
      } else {
        const auto& rel = e.relations();
        for (std::size_t i = 0; i < rel.rows(); ++i) {
          std::vector<typename R::Scalar> row(g, x_.ring().zero());
          for (std::size_t j = 0; j < rel.cols(); ++j) row[off + j] = rel(i, j);
          out.append_row(row);
        }
      }
    }
    return out;
  }

  // F_p meet preimage of F_{p-r} under the boundary out of degree n.
  Matrix<R> z(long r, long p, long n) const {
    Matrix<R> fp = stage(p, n);
    if (n <= 0 || n > top_) return fp;
    Matrix<R> pushed = fp * tot_.boundary(static_cast<std::size_t>(n)).matrix();
    Matrix<R> coeffs = detail::preimage_lift(pushed, stage(p - r, n - 1));
    return row_space_basis(coeffs * fp);
  }

  // Rows of gens (in degree n) pushed into degree n - 1.
  Matrix<R> image_of(const Matrix<R>& gens, long n) const {
    if (n <= 0 || n > top_) return Matrix<R>(x_.ring(), 0, lift_rank(n - 1));
    return gens * tot_.boundary(static_cast<std::size_t>(n)).matrix();
  }

  Bicomplex<R> x_;
  Orientation orientation_;
  ChainComplex<R> tot_;
  long top_ = 0;
  std::vector<std::vector<std::pair<long, std::size_t>>> blocks_;
};

// Pages E^0 .. E^{r_max}.
template <class R>
std::vector<SpectralPage<R>> pages(const Bicomplex<R>& x, Orientation o, std::size_t r_max) {
  if (r_max < 2) throw DimensionError("pages needs r_max >= 2");
  SpectralSequence<R> ss(x, o);
  std::vector<SpectralPage<R>> out;
  for (std::size_t r = 0; r <= r_max; ++r) out.push_back(ss.page(r));
  return out;
}

// First (r, s, t) where E^{r+1}_{s,t} is not the homology of d^r at (s,t).
template <class R>
std::optional<std::tuple<std::size_t, std::size_t, std::size_t>> page_recursion_violation(
    const std::vector<SpectralPage<R>>& pgs) {
  for (std::size_t r = 0; r + 1 < pgs.size(); ++r) {
    const auto& pg = pgs[r];
    for (std::size_t s = 0; s < pg.entries.size(); ++s) {
      for (std::size_t t = 0; t < pg.entries[s].size(); ++t) {
        // The differential arriving at (s,t) leaves the bidegree that d^r sends to (s,t).
        auto [s0, t0] = differential_target(pg.orientation, r, 0, 0);
        const long from_s = static_cast<long>(s) - s0;
        const long from_t = static_cast<long>(t) - t0;
        ModuleMap<R> in = (from_s >= 0 && from_t >= 0 && from_s < static_cast<long>(pg.entries.size()) &&
                           from_t < static_cast<long>(pg.entries[s].size()))
                              ? pg.differentials[from_s][from_t]
                              : ModuleMap<R>(PresentedModule<R>::zero(pg.entry(s, t).ring()), pg.entry(s, t),
                                             Matrix<R>(pg.entry(s, t).ring(), 0, pg.entry(s, t).generators()));
        auto h = homology_at(in, pg.differentials[s][t]);
        if (!(canonicalize(h) == canonicalize(pgs[r + 1].entry(s, t)))) return std::make_tuple(r, s, t);
      }
    }
  }
  return std::nullopt;
}

// E^infinity with, per entry, the first page index r >= 1 after which no differential touches it.
template <class R>
SpectralPage<R> e_infinity(const Bicomplex<R>& x, Orientation o) {
  SpectralSequence<R> ss(x, o);
  const std::size_t last = ss.infinity_page();
  std::vector<std::vector<std::size_t>> stable(x.s_max() + 1, std::vector<std::size_t>(x.t_max() + 1, 1));
  for (std::size_t r = 1; r < last; ++r) {
    auto pg = ss.page(r);
    for (std::size_t s = 0; s <= x.s_max(); ++s) {
      for (std::size_t t = 0; t <= x.t_max(); ++t) {
        if (is_zero_map(pg.differentials[s][t])) continue;
        stable[s][t] = std::max(stable[s][t], r + 1);
        auto [s2, t2] = differential_target(o, r, static_cast<long>(s), static_cast<long>(t));
        if (x.in_grid(s2, t2)) stable[s2][t2] = std::max(stable[s2][t2], r + 1);
      }
    }
  }
  auto out = ss.page(last);
  out.stable_from = std::move(stable);
  return out;
}

template <class R>
struct ConvergenceReport {
  Orientation orientation = Orientation::kVertical;
  bool ok = true;
  std::optional<std::size_t> offending_degree;
  std::string detail;
  std::vector<PresentedModule<R>> homology;  // H_n(Tot)
  // stages[n][p] = image of the filtration stage p in H_n(Tot); graded[n][p] = stages[n][p] / stages[n][p-1].
  std::vector<std::vector<PresentedModule<R>>> stages;
  std::vector<std::vector<PresentedModule<R>>> graded;
};

// Filters H_n(Tot) by the orientation's filtration and checks the graded pieces against E^infinity;
// over a field also the dimension count.
template <class R>
ConvergenceReport<R> verify_convergence(const Bicomplex<R>& x, Orientation o) {
  SpectralSequence<R> ss(x, o);
  const auto& tot = ss.total();
  auto inf = ss.page(ss.infinity_page());
  ConvergenceReport<R> rep;
  rep.orientation = o;
  const long top = static_cast<long>(x.s_max() + x.t_max());
  auto fail = [&](long n, std::string why) {
    if (rep.ok) {
      rep.ok = false;
      rep.offending_degree = static_cast<std::size_t>(n);
      rep.detail = std::move(why);
    }
  };
  // Filtration index of (s, n - s) runs over 0..n; p is the filtration index, s the column.
  auto column_of = [&](long p, long n) { return o == Orientation::kVertical ? p : n - p; };
  for (long n = 0; n <= top; ++n) {
    const auto nn = static_cast<std::size_t>(n);
    auto h = tot.homology_data(nn);
    rep.homology.push_back(h.module());
    Matrix<R> bounds = tot.boundary(nn + 1).matrix();
    bounds.append_rows(tot.module(nn).relations());
    rep.stages.emplace_back();
    rep.graded.emplace_back();
    Matrix<R> prev = bounds;
    std::size_t dim_sum = 0;
    for (long p = 0; p <= n; ++p) {
      Matrix<R> num = ss.stage_cycles(p, n);
      num.append_rows(bounds);
      rep.stages.back().push_back(Subquotient<R>(num, bounds).module());
      auto gr = Subquotient<R>(num, prev).module();
      rep.graded.back().push_back(gr);
      prev = num;
      const long s = column_of(p, n);
      if (x.in_grid(s, n - s)) {
        if (!(canonicalize(gr) == canonicalize(inf.entry(static_cast<std::size_t>(s), static_cast<std::size_t>(n - s))))) {
          fail(n, "graded piece " + std::to_string(p) + " differs from E^infinity at (" + std::to_string(s) + "," +
                      std::to_string(n - s) + ")");
        }
        dim_sum += canonicalize(inf.entry(static_cast<std::size_t>(s), static_cast<std::size_t>(n - s))).free_rank;
      } else if (!canonicalize(gr).is_zero()) {
        fail(n, "nonzero graded piece outside the grid");
      }
    }
    if (!(canonicalize(rep.stages.back().back()) == canonicalize(h.module()))) fail(n, "top filtration stage is not H_n");
    if constexpr (R::kIsField) {
      if (dim_sum != canonicalize(h.module()).free_rank) fail(n, "dimensions of E^infinity do not add up to H_n");
    }
  }
  return rep;
}

// Both orientations, which must also agree on H_*(Tot).
template <class R>
std::pair<ConvergenceReport<R>, ConvergenceReport<R>> verify_convergence(const Bicomplex<R>& x) {
  return {verify_convergence(x, Orientation::kVertical), verify_convergence(x, Orientation::kHorizontal)};
}

// The horizontal edge maps in degree n: E^1_{n,0} onto E^infinity_{n,0}, then into H_n(Tot).
template <class R>
std::pair<ModuleMap<R>, ModuleMap<R>> horizontal_edge_maps(const Bicomplex<R>& x, std::size_t n) {
  SpectralSequence<R> ss(x, Orientation::kHorizontal);
  const long s = static_cast<long>(n);
  auto e1 = ss.entry(1, s, 0);
  auto einf = ss.entry(ss.infinity_page(), s, 0);
  auto h = ss.total().homology_data(n);
  const std::size_t g = ss.total().module(n).generators();
  auto id = Matrix<R>::identity(x.ring(), g);
  return {induced_map(e1, einf, id), induced_map(einf, h, id)};
}

// C_{s,t} = Cech chains of P_t in degree s, for a resolution P of a precosheaf: horizontal maps are
// Cech boundaries, vertical maps the resolution differentials applied cellwise.
template <class R>
Bicomplex<R> cech_resolution_bicomplex(const Site& site, const Cover& cover, const Resolution<R>& res, std::size_t s_max,
                                       Normalization norm = Normalization::kNormalized) {
  require_site_of(site, res.target);
  CechNerve nerve(site, cover, s_max + 1, norm);
  const auto& cells = nerve.cells();
  const std::size_t t_max = res.levels.size() - 1;
  std::vector<ChainComplex<R>> rows;
  for (const auto& p : res.levels) rows.push_back(chain_complex(cells, p));
  std::vector<std::vector<PresentedModule<R>>> entries(s_max + 1);
  for (std::size_t s = 0; s <= s_max; ++s) {
    for (std::size_t t = 0; t <= t_max; ++t) entries[s].push_back(rows[t].module(s));
  }
  Bicomplex<R> x(res.target.ring(), std::move(entries));
  for (std::size_t s = 0; s <= s_max; ++s) {
    for (std::size_t t = 0; t <= t_max; ++t) {
      if (s > 0) x.set_horizontal(s, t, rows[t].boundary(s).matrix());
      if (t > 0) {
        std::vector<const Matrix<R>*> blocks;
        for (const auto& cell : cells.cells[s]) blocks.push_back(&res.differentials[t - 1].components.at(cell.object));
        x.set_vertical(s, t, block_diagonal(res.target.ring(), blocks));
      }
    }
  }
  x.validate();
  return x;
}

}  // namespace cosheaf
