#pragma once

// Explicit element-level models of finite presented modules and precosheaves, for
// brute-force counting. Only the oracle determinant code is used to bound exponents.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "support/oracles.hpp"

namespace oracle {

// Z^g / rowspan(rel), assumed finite, realised as cosets in (Z/N)^g with N the exponent.
class FiniteModule {
 public:
  FiniteModule(std::size_t g, const Mat& rel) : g_(g) {
    if (g_ == 0) {
      n_ = 1;
      class_of_.assign(1, 0);
      classes_ = 1;
      return;
    }
    auto factors = invariant_factors_by_minors(rel);
    if (factors.size() < g_) throw std::invalid_argument("module is infinite");
    n_ = factors.back().get_si();
    std::size_t total = 1;
    for (std::size_t i = 0; i < g_; ++i) {
      total *= static_cast<std::size_t>(n_);
      if (total > (std::size_t{1} << 22)) throw std::invalid_argument("module too large for enumeration");
    }
    // Subgroup generated by the relations mod N, by closure.
    std::vector<char> in_sub(total, 0);
    std::vector<std::size_t> sub{0};
    in_sub[0] = 1;
    for (const auto& r : rel) {
      Vec v(g_);
      for (std::size_t i = 0; i < g_; ++i) v[i] = mod(r[i], n_);
      std::size_t code = encode(v);
      std::vector<std::size_t> frontier = sub;
      for (std::size_t k = 0; k < frontier.size(); ++k) {
        std::size_t y = add_codes(frontier[k], code);
        if (!in_sub[y]) {
          in_sub[y] = 1;
          sub.push_back(y);
          frontier.push_back(y);
        }
      }
    }
    class_of_.assign(total, SIZE_MAX);
    classes_ = 0;
    for (std::size_t x = 0; x < total; ++x) {
      if (class_of_[x] != SIZE_MAX) continue;
      for (auto s : sub) class_of_[add_codes(x, s)] = classes_;
      representatives_.push_back(x);
      ++classes_;
    }
    if (representatives_.empty()) representatives_.push_back(0);
  }

  std::size_t size() const { return classes_; }
  std::size_t generators() const { return g_; }
  // Class of an integer vector.
  std::size_t cls(const Vec& v) const {
    if (g_ == 0) return 0;
    Vec w(g_);
    for (std::size_t i = 0; i < g_; ++i) w[i] = mod(v[i], n_);
    return class_of_[encode(w)];
  }
  Vec representative(std::size_t c) const { return decode(g_ == 0 ? 0 : representatives_.at(c)); }
  std::size_t add(std::size_t a, std::size_t b) const {
    if (g_ == 0) return 0;
    return class_of_[add_codes(representatives_[a], representatives_[b])];
  }
  std::size_t scale(std::size_t a, long long k) const {
    Vec v = representative(a);
    for (auto& x : v) x *= k;
    return cls(v);
  }

 private:
  std::size_t encode(const Vec& v) const {
    std::size_t c = 0;
    for (std::size_t i = g_; i-- > 0;) c = c * static_cast<std::size_t>(n_) + static_cast<std::size_t>(v[i]);
    return c;
  }
  Vec decode(std::size_t c) const {
    Vec v(g_);
    for (std::size_t i = 0; i < g_; ++i) {
      v[i] = static_cast<long long>(c % static_cast<std::size_t>(n_));
      c /= static_cast<std::size_t>(n_);
    }
    return v;
  }
  std::size_t add_codes(std::size_t a, std::size_t b) const {
    Vec x = decode(a), y = decode(b);
    for (std::size_t i = 0; i < g_; ++i) x[i] = (x[i] + y[i]) % n_;
    return encode(x);
  }

  std::size_t g_;
  long long n_ = 1;
  std::vector<std::size_t> class_of_;
  std::vector<std::size_t> representatives_;
  std::size_t classes_ = 0;
};

// Value of a generator-image assignment on an integer combination.
inline std::size_t evaluate(const FiniteModule& target, const std::vector<std::size_t>& images, const Vec& coeffs) {
  std::size_t acc = 0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] != 0) acc = target.add(acc, target.scale(images[i], coeffs[i]));
  }
  return acc;
}

// All homomorphisms from <g | rel> to target, as generator images.
inline std::vector<std::vector<std::size_t>> all_homs(std::size_t g, const Mat& rel, const FiniteModule& target) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> img(g, 0);
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == g) {
      for (const auto& r : rel) {
        if (evaluate(target, img, r) != 0) return;
      }
      out.push_back(img);
      return;
    }
    for (std::size_t e = 0; e < target.size(); ++e) {
      img[k] = e;
      rec(k + 1);
    }
  };
  rec(0);
  return out;
}

// A functor on a category given by dom/cod lists; values as presentations, actions as matrices.
struct FiniteFunctor {
  std::vector<std::size_t> dom;
  std::vector<std::size_t> cod;
  std::vector<std::size_t> gens;
  std::vector<Mat> relations;
  std::vector<Mat> action;  // per morphism, gens(dom) x gens(cod)
};

// Number of natural transformations a -> b by backtracking over objects.
inline long long count_natural(const FiniteFunctor& a, const FiniteFunctor& b) {
  const std::size_t n = a.gens.size();
  std::vector<FiniteModule> targets;
  for (std::size_t o = 0; o < n; ++o) targets.emplace_back(b.gens[o], b.relations[o]);
  std::vector<std::vector<std::vector<std::size_t>>> options(n);
  for (std::size_t o = 0; o < n; ++o) options[o] = all_homs(a.gens[o], a.relations[o], targets[o]);
  std::vector<const std::vector<std::size_t>*> chosen(n, nullptr);
  // phi_cod(A(m) x) == B(m)(phi_dom(x)) on generators x.
  auto square_ok = [&](std::size_t m) {
    std::size_t i = a.dom[m], j = a.cod[m];
    const auto& ti = targets[i];
    const auto& tj = targets[j];
    for (std::size_t x = 0; x < a.gens[i]; ++x) {
      std::size_t lhs = evaluate(tj, *chosen[j], a.action[m][x]);
      Vec img = ti.representative((*chosen[i])[x]);
      Vec pushed(b.gens[j], 0);
      for (std::size_t k = 0; k < img.size(); ++k) {
        for (std::size_t l = 0; l < b.gens[j]; ++l) pushed[l] += img[k] * b.action[m][k][l];
      }
      if (tj.cls(pushed) != lhs) return false;
    }
    return true;
  };
  long long count = 0;
  std::function<void(std::size_t)> rec = [&](std::size_t o) {
    if (o == n) {
      ++count;
      return;
    }
    for (const auto& opt : options[o]) {
      chosen[o] = &opt;
      bool ok = true;
      for (std::size_t m = 0; m < a.dom.size() && ok; ++m) {
        std::size_t i = a.dom[m], j = a.cod[m];
        if (std::max(i, j) == o) ok = square_ok(m);
      }
      if (ok) rec(o + 1);
    }
    chosen[o] = nullptr;
  };
  rec(0);
  return count;
}

}  // namespace oracle
