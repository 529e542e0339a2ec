#pragma once

// Brute-force reference computations used by the tests. Nothing here calls the
// library's elimination code.

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <vector>

namespace oracle {

using Vec = std::vector<long long>;
using Mat = std::vector<Vec>;

inline long long mod(long long a, long long n) {
  if (n == 0) return a;
  long long r = a % n;
  return r < 0 ? r + n : r;
}

// Z/n_1 x ... x Z/n_k, every n_i >= 1.
struct FiniteGroup {
  Vec orders;

  long long size() const {
    long long s = 1;
    for (auto n : orders) s *= n;
    return s;
  }
  Vec zero() const { return Vec(orders.size(), 0); }
  Vec normalize(Vec x) const {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = mod(x[i], orders[i]);
    return x;
  }
  Vec add(const Vec& a, const Vec& b) const {
    Vec c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = mod(a[i] + b[i], orders[i]);
    return c;
  }
  Vec scale(const Vec& a, long long k) const {
    Vec c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = mod(a[i] * k, orders[i]);
    return c;
  }
  bool is_zero(const Vec& a) const {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (mod(a[i], orders[i]) != 0) return false;
    }
    return true;
  }
  std::vector<Vec> elements() const {
    std::vector<Vec> out;
    Vec x = zero();
    for (;;) {
      out.push_back(x);
      std::size_t i = 0;
      while (i < x.size()) {
        if (++x[i] < orders[i]) break;
        x[i] = 0;
        ++i;
      }
      if (i == x.size()) break;
    }
    return out;
  }
  long long order_of(const Vec& a) const {
    long long k = 1;
    Vec x = normalize(a);
    Vec y = x;
    while (!is_zero(y)) {
      y = add(y, x);
      ++k;
    }
    return k;
  }
};

// Number of elements of each order; determines a finite abelian group up to isomorphism.
inline std::map<long long, long long> order_histogram(const FiniteGroup& g) {
  std::map<long long, long long> h;
  for (const auto& x : g.elements()) ++h[g.order_of(x)];
  return h;
}

// Image of x under the map whose rows are the images of the source generators.
inline Vec apply(const FiniteGroup& target, const Mat& rows, const Vec& x) {
  Vec y = target.zero();
  for (std::size_t i = 0; i < rows.size(); ++i) y = target.add(y, target.scale(rows[i], x[i]));
  return y;
}

// Homomorphisms from <g generators | integer relations> into target.
inline long long count_homs(std::size_t g, const Mat& relations, const FiniteGroup& target) {
  auto elems = target.elements();
  std::vector<std::size_t> choice(g, 0);
  long long count = 0;
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == g) {
      for (const auto& rel : relations) {
        Vec s = target.zero();
        for (std::size_t i = 0; i < g; ++i) s = target.add(s, target.scale(elems[choice[i]], rel[i]));
        if (!target.is_zero(s)) return;
      }
      ++count;
      return;
    }
    for (std::size_t e = 0; e < elems.size(); ++e) {
      choice[k] = e;
      rec(k + 1);
    }
  };
  rec(0);
  return count;
}

// Order histogram of ker(f_out)/im(f_in) for L -> M -> N, computed set-wise.
inline std::map<long long, long long> homology_histogram(const FiniteGroup& l, const FiniteGroup& m,
                                                         const FiniteGroup& n, const Mat& f_in,
                                                         const Mat& f_out) {
  std::set<Vec> im;
  for (const auto& y : l.elements()) im.insert(apply(m, f_in, y));
  std::vector<Vec> ker;
  for (const auto& x : m.elements()) {
    if (n.is_zero(apply(n, f_out, x))) ker.push_back(x);
  }
  std::map<long long, long long> h;
  for (const auto& x : ker) {
    long long k = 1;
    Vec y = x;
    while (!im.count(m.normalize(y))) {
      y = m.add(y, x);
      ++k;
    }
    ++h[k];
  }
  for (auto& [k, c] : h) c /= static_cast<long long>(im.size());
  return h;
}

// Histogram of Z/d_1 x ... x Z/d_k.
inline std::map<long long, long long> histogram_of_factors(const Vec& factors) {
  FiniteGroup g{factors.empty() ? Vec{} : factors};
  return order_histogram(g);
}

// Fraction-free Gaussian elimination (Bareiss): every division is exact.
inline mpz_class determinant(std::vector<std::vector<mpz_class>> a) {
  const std::size_t n = a.size();
  if (n == 0) return 1;
  mpz_class sign = 1, prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      std::size_t p = k + 1;
      while (p < n && a[p][k] == 0) ++p;
      if (p == n) return 0;
      std::swap(a[k], a[p]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]);
        mpz_divexact(a[i][j].get_mpz_t(), a[i][j].get_mpz_t(), prev.get_mpz_t());
      }
    }
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

// Invariant factors via determinantal divisors: d_k = D_k / D_{k-1}, D_k = gcd of k x k minors.
inline std::vector<mpz_class> invariant_factors_by_minors(const Mat& m) {
  const std::size_t rows = m.size();
  const std::size_t cols = rows ? m[0].size() : 0;
  std::vector<mpz_class> result;
  mpz_class prev = 1;
  for (std::size_t k = 1; k <= std::min(rows, cols); ++k) {
    mpz_class g = 0;
    std::vector<std::size_t> ri(k), ci(k);
    std::function<void(std::size_t, std::size_t)> pick_rows;
    std::function<void(std::size_t, std::size_t)> pick_cols = [&](std::size_t start, std::size_t depth) {
      if (g == prev) return;  // every k x k minor is a multiple of D_{k-1}
      if (depth == k) {
        std::vector<std::vector<mpz_class>> sub(k, std::vector<mpz_class>(k));
        for (std::size_t a = 0; a < k; ++a) {
          for (std::size_t b = 0; b < k; ++b) sub[a][b] = mpz_class(static_cast<long>(m[ri[a]][ci[b]]));
        }
        mpz_class d = determinant(sub);
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), d.get_mpz_t());
        return;
      }
      for (std::size_t c = start; c < cols; ++c) {
        ci[depth] = c;
        pick_cols(c + 1, depth + 1);
      }
    };
    pick_rows = [&](std::size_t start, std::size_t depth) {
      if (g == prev) return;
      if (depth == k) {
        pick_cols(0, 0);
        return;
      }
      for (std::size_t r = start; r < rows; ++r) {
        ri[depth] = r;
        pick_rows(r + 1, depth + 1);
      }
    };
    pick_rows(0, 0);
    if (g == 0) break;
    result.push_back(g / prev);
    prev = g;
  }
  return result;
}

}  // namespace oracle
