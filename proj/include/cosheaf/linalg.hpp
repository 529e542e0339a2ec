#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "cosheaf/matrix.hpp"

namespace cosheaf {

// Row echelon form over a PID (Hermite style) or a field (reduced).
// Pivots are searched in columns [0, pivot_limit); later columns are carried along,
// which is how transforms are tracked. Returns the pivot column of each leading row.
template <class R>
std::vector<std::size_t> echelonize(Matrix<R>& a, std::size_t pivot_limit, bool reduce_above = false) {
  using Scalar = typename R::Scalar;
  const R& ring = a.ring();
  std::vector<std::size_t> pivots;
  std::size_t lead = 0;
  for (std::size_t col = 0; col < pivot_limit && lead < a.rows(); ++col) {
    std::size_t best = a.rows();
    Integer best_norm;
    for (std::size_t r = lead; r < a.rows(); ++r) {
      if (ring.is_zero(a(r, col))) continue;
      if constexpr (R::kIsField) {
        best = r;
        break;
      } else {
        Integer n = ring.norm(a(r, col));
        if (best == a.rows() || n < best_norm) {
          best = r;
          best_norm = std::move(n);
          if (best_norm.is_one()) break;
        }
      }
    }
    if (best == a.rows()) continue;
    a.swap_rows(lead, best);
    if constexpr (R::kIsField) {
      a.scale_row(lead, ring.unit_inverse(a(lead, col)), col);
      for (std::size_t r = lead + 1; r < a.rows(); ++r) {
        if (!ring.is_zero(a(r, col))) a.add_row_multiple(r, lead, ring.neg(a(r, col)), col);
      }
    } else {
      for (std::size_t r = lead + 1; r < a.rows(); ++r) {
        if (ring.is_zero(a(r, col))) continue;
        const Scalar p = a(lead, col);
        const Scalar b = a(r, col);
        if (ring.divides(p, b)) {
          a.add_row_multiple(r, lead, ring.neg(ring.exact_quotient(b, p)), col);
        } else {
          auto [g, s, t] = ring.gcdext(p, b);
          a.combine_rows(lead, r, s, t, ring.neg(ring.exact_quotient(b, g)), ring.exact_quotient(p, g), col);
        }
      }
      Scalar u = ring.normalizer(a(lead, col));
      if (!(u == ring.one())) a.scale_row(lead, u, col);
    }
    if (reduce_above) {
      for (std::size_t r = 0; r < lead; ++r) {
        if (ring.is_zero(a(r, col))) continue;
        Scalar q = ring.euclid_quotient(a(r, col), a(lead, col));
        a.add_row_multiple(r, lead, ring.neg(q), col);
      }
    }
    pivots.push_back(col);
    ++lead;
  }
  return pivots;
}

// Basis (rows) of the row space of a.
template <class R>
Matrix<R> row_space_basis(Matrix<R> a) {
  auto pivots = echelonize(a, a.cols(), true);
  a.resize_rows(pivots.size());
  return a;
}

template <class R>
std::size_t rank(Matrix<R> a) {
  return echelonize(a, a.cols()).size();
}

// Basis of {x : x * a = 0}, as rows.
template <class R>
Matrix<R> left_kernel(const Matrix<R>& a) {
  const std::size_t m = a.rows();
  Matrix<R> aug = Matrix<R>::hstack(a, Matrix<R>::identity(a.ring(), m));
  auto pivots = echelonize(aug, a.cols());
  return aug.block(pivots.size(), a.cols(), m - pivots.size(), m);
}

// Membership and coordinates with respect to the row space of a generating matrix.
template <class R>
class RowSpaceSolver {
 public:
  using Scalar = typename R::Scalar;

  RowSpaceSolver(const Matrix<R>& generators, bool track_coefficients = true)
      : width_(generators.cols()),
        count_(generators.rows()),
        echelon_(generators.ring(), 0, generators.cols()),
        transform_(generators.ring(), 0, generators.rows()) {
    if (track_coefficients) {
      Matrix<R> aug = Matrix<R>::hstack(generators, Matrix<R>::identity(generators.ring(), count_));
      pivots_ = echelonize(aug, width_);
      echelon_ = aug.block(0, 0, pivots_.size(), width_);
      transform_ = aug.block(0, width_, pivots_.size(), count_);
      tracked_ = true;
    } else {
      Matrix<R> h = generators;
      pivots_ = echelonize(h, width_);
      h.resize_rows(pivots_.size());
      echelon_ = std::move(h);
    }
  }

  std::size_t rank() const noexcept { return pivots_.size(); }
  std::size_t width() const noexcept { return width_; }
  const Matrix<R>& echelon() const noexcept { return echelon_; }

  bool contains(const Scalar* v) const { return reduce(v).has_value(); }
  bool contains(const std::vector<Scalar>& v) const { return contains(v.data()); }

  // Coefficients c (one per generator row) with c * generators = v.
  std::optional<std::vector<Scalar>> solve(const Scalar* v) const {
    auto ch = reduce(v);
    if (!ch) return std::nullopt;
    if (!tracked_) throw Error("solver built without coefficient tracking");
    return transform_.apply(*ch);
  }
  std::optional<std::vector<Scalar>> solve(const std::vector<Scalar>& v) const { return solve(v.data()); }

 private:
  // Coefficients against the echelon rows, or nullopt if v is outside the row space.
  std::optional<std::vector<Scalar>> reduce(const Scalar* v) const {
    const R& ring = echelon_.ring();
    std::vector<Scalar> w(v, v + width_);
    std::vector<Scalar> c(pivots_.size(), ring.zero());
    for (std::size_t i = 0; i < pivots_.size(); ++i) {
      const std::size_t col = pivots_[i];
      if (ring.is_zero(w[col])) continue;
      const Scalar& p = echelon_(i, col);
      if (!ring.divides(p, w[col])) return std::nullopt;
      Scalar q = ring.exact_quotient(w[col], p);
      const Scalar* h = echelon_.row(i);
      Scalar mq = ring.neg(q);
      for (std::size_t j = col; j < width_; ++j) {
        if (!ring.is_zero(h[j])) ring.add_mul(w[j], mq, h[j]);
      }
      c[i] = std::move(q);
    }
    for (const auto& x : w) {
      if (!ring.is_zero(x)) return std::nullopt;
    }
    return c;
  }

  std::size_t width_;
  std::size_t count_;
  Matrix<R> echelon_;
  Matrix<R> transform_;
  std::vector<std::size_t> pivots_;
  bool tracked_ = false;
};

template <class R>
struct SmithForm {
  Matrix<R> u;
  Matrix<R> d;
  Matrix<R> v;
};

namespace detail {

// Smith reduction in place; u and v (if non-null) accumulate the row and column operations.
template <class R>
void smith_reduce(Matrix<R>& a, Matrix<R>* u, Matrix<R>* v) {
  using Scalar = typename R::Scalar;
  const R& ring = a.ring();
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  auto row_swap = [&](std::size_t i, std::size_t j) {
    a.swap_rows(i, j);
    if (u) u->swap_rows(i, j);
  };
  auto col_swap = [&](std::size_t i, std::size_t j) {
    a.swap_cols(i, j);
    if (v) v->swap_cols(i, j);
  };
  auto row_add = [&](std::size_t dst, std::size_t src, const Scalar& c) {
    a.add_row_multiple(dst, src, c);
    if (u) u->add_row_multiple(dst, src, c);
  };
  auto col_add = [&](std::size_t dst, std::size_t src, const Scalar& c) {
    a.add_col_multiple(dst, src, c);
    if (v) v->add_col_multiple(dst, src, c);
  };
  auto row_combine = [&](std::size_t i, std::size_t j, const Scalar& p, const Scalar& q, const Scalar& r,
                         const Scalar& s) {
    a.combine_rows(i, j, p, q, r, s);
    if (u) u->combine_rows(i, j, p, q, r, s);
  };
  auto col_combine = [&](std::size_t i, std::size_t j, const Scalar& p, const Scalar& q, const Scalar& r,
                         const Scalar& s) {
    a.combine_cols(i, j, p, q, r, s);
    if (v) v->combine_cols(i, j, p, q, r, s);
  };

  for (std::size_t t = 0; t < std::min(m, n); ++t) {
    std::size_t bi = m, bj = n;
    Integer best;
    for (std::size_t i = t; i < m; ++i) {
      for (std::size_t j = t; j < n; ++j) {
        if (ring.is_zero(a(i, j))) continue;
        Integer nn = ring.norm(a(i, j));
        if (bi == m || nn < best) {
          bi = i;
          bj = j;
          best = std::move(nn);
        }
      }
    }
    if (bi == m) break;
    row_swap(t, bi);
    col_swap(t, bj);
    for (;;) {
      bool changed = false;
      for (std::size_t i = t + 1; i < m; ++i) {
        if (ring.is_zero(a(i, t))) continue;
        const Scalar p = a(t, t);
        const Scalar b = a(i, t);
        if (ring.divides(p, b)) {
          row_add(i, t, ring.neg(ring.exact_quotient(b, p)));
        } else {
          auto [g, s, x] = ring.gcdext(p, b);
          row_combine(t, i, s, x, ring.neg(ring.exact_quotient(b, g)), ring.exact_quotient(p, g));
          changed = true;
        }
      }
      for (std::size_t j = t + 1; j < n; ++j) {
        if (ring.is_zero(a(t, j))) continue;
        const Scalar p = a(t, t);
        const Scalar b = a(t, j);
        if (ring.divides(p, b)) {
          col_add(j, t, ring.neg(ring.exact_quotient(b, p)));
        } else {
          auto [g, s, x] = ring.gcdext(p, b);
          col_combine(t, j, s, x, ring.neg(ring.exact_quotient(b, g)), ring.exact_quotient(p, g));
          changed = true;
        }
      }
      if (changed) continue;
      bool column_clear = true;
      for (std::size_t i = t + 1; i < m && column_clear; ++i) column_clear = ring.is_zero(a(i, t));
      if (!column_clear) continue;
      std::size_t bad = m;
      if constexpr (!R::kIsField) {
        for (std::size_t i = t + 1; i < m && bad == m; ++i) {
          for (std::size_t j = t + 1; j < n; ++j) {
            if (!ring.divides(a(t, t), a(i, j))) {
              bad = i;
              break;
            }
          }
        }
      }
      if (bad == m) break;
      row_add(t, bad, ring.one());
    }
    Scalar unit = ring.normalizer(a(t, t));
    if (!(unit == ring.one())) {
      a.scale_row(t, unit);
      if (u) u->scale_row(t, unit);
    }
  }
}

}  // namespace detail

// U * m * V = D with D diagonal, d_1 | d_2 | ..., d_i canonical (non-negative over Z, 0/1 over fields).
template <class R>
SmithForm<R> smith_normal_form(const Matrix<R>& m) {
  SmithForm<R> f{Matrix<R>::identity(m.ring(), m.rows()), m, Matrix<R>::identity(m.ring(), m.cols())};
  detail::smith_reduce(f.d, &f.u, &f.v);
  return f;
}

// Diagonal entries of the Smith form, without transforms.
template <class R>
std::vector<typename R::Scalar> smith_diagonal(const Matrix<R>& m) {
  Matrix<R> a = m;
  auto pivots = echelonize(a, a.cols());
  a.resize_rows(pivots.size());
  detail::smith_reduce<R>(a, nullptr, nullptr);
  std::vector<typename R::Scalar> diag;
  for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) {
    if (!a.ring().is_zero(a(i, i))) diag.push_back(a(i, i));
  }
  return diag;
}

}  // namespace cosheaf
