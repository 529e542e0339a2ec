// A 3x2 bicomplex whose vertical spectral sequence needs a d^2 to reach H(Tot) = Z/3 in degree 1.
#include <iostream>

#include "cosheaf/spectral.hpp"

using namespace cosheaf;

namespace {

template <class R>
void show(const Bicomplex<R>& x, Orientation o) {
  std::cout << to_string(o) << ":\n";
  for (const auto& page : pages(x, o, 3)) {
    std::cout << "  E^" << page.r << ":";
    for (std::size_t s = 0; s <= x.s_max(); ++s) {
      for (std::size_t t = 0; t <= x.t_max(); ++t) {
        auto e = canonicalize(page.entry(s, t));
        if (!e.is_zero()) std::cout << " (" << s << "," << t << ")=" << e.to_string();
      }
    }
    std::cout << "\n";
  }
  auto rep = verify_convergence(x, o);
  std::cout << "  converges: " << (rep.ok ? "yes" : "no, " + rep.detail) << "\n";
}

}  // namespace

int main() {
  const Integers zz;
  auto z = PresentedModule<Integers>::free(zz, 1);
  auto o = PresentedModule<Integers>::zero(zz);
  Bicomplex<Integers> x(zz, {{o, z}, {z, z}, {z, o}});
  x.set_horizontal(2, 0, Matrix<Integers>::from_ints(zz, 1, {{1}}));
  x.set_horizontal(1, 1, Matrix<Integers>::from_ints(zz, 1, {{3}}));
  x.set_vertical(1, 1, Matrix<Integers>::from_ints(zz, 1, {{1}}));
  x.validate();

  auto tot = total_complex(x);
  for (std::size_t n = 0; n <= 2; ++n) std::cout << "H_" << n << "(Tot) = " << canonicalize(tot.homology(n)).to_string() << "\n";
  show(x, Orientation::kVertical);
  show(x, Orientation::kHorizontal);
}
