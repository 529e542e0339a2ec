#pragma once

#include <random>
#include <vector>

#include "cosheaf/kmod.hpp"
#include "support/oracles.hpp"

namespace testing_support {

using cosheaf::Integer;
using cosheaf::Integers;
using ZMatrix = cosheaf::Matrix<Integers>;
using ZModule = cosheaf::PresentedModule<Integers>;
using ZMap = cosheaf::ModuleMap<Integers>;

inline ZMatrix zmat(std::size_t cols, const std::vector<std::vector<long long>>& rows) {
  return ZMatrix::from_ints(Integers{}, cols, rows);
}

inline ZModule cyclic_product(const oracle::Vec& orders) {
  std::vector<Integer> o(orders.begin(), orders.end());
  return ZModule::cyclic_product(Integers{}, o);
}

inline ZMatrix to_matrix(const oracle::Mat& m, std::size_t cols) {
  return zmat(cols, m);
}

inline oracle::Vec factors_of(const cosheaf::CanonicalForm& cf) {
  oracle::Vec v;
  for (const auto& d : cf.torsion) v.push_back(d.to_int64());
  return v;
}

// Random homomorphism between cyclic products (order 0 means Z): row i must be killed by orders_src[i].
inline oracle::Mat random_hom(std::mt19937_64& rng, const oracle::Vec& src, const oracle::Vec& dst) {
  oracle::Mat m(src.size(), oracle::Vec(dst.size(), 0));
  for (std::size_t i = 0; i < src.size(); ++i) {
    for (std::size_t j = 0; j < dst.size(); ++j) {
      long long n = src[i], d = dst[j];
      if (d == 0) {
        m[i][j] = n == 0 ? static_cast<long long>(rng() % 5) - 2 : 0;
        continue;
      }
      long long step = d / std::gcd(n, d);
      long long choices = d / step;
      m[i][j] = step * static_cast<long long>(rng() % static_cast<unsigned long long>(choices));
    }
  }
  return m;
}

}  // namespace testing_support
