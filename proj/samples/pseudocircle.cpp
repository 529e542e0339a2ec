// The four-point pseudocircle: Cech homology of the constant cosheaf both ways,
// then cosheafification of the constant precosheaf.
#include <iostream>

#include "cosheaf/cech.hpp"

using namespace cosheaf;

int main() {
  const Integers zz;
  FinSpace x({"a", "b", "c", "d"}, {{}, {"a"}, {"c"}, {"a", "c"}, {"a", "b", "c"}, {"a", "c", "d"}, {"a", "b", "c", "d"}});
  auto site = open_site(x);
  const auto& c = site.category();
  const auto top = c.object("{a,b,c,d}");
  auto z = PresentedModule<Integers>::free(zz, 1);

  auto a = constant_cosheaf(site, z);
  for (std::size_t n = 0; n <= 2; ++n) {
    auto covers = cech_homology(site, a, top, n, CechRoute::kCovers);
    auto sieves = cech_homology(site, a, top, n, CechRoute::kSieves);
    std::cout << "H_" << n << " = " << canonicalize(covers.module).to_string() << " (" << covers.method << "), "
              << canonicalize(sieves.module).to_string() << " (sieves)\n";
  }

  Cover cv{top, {}};
  for (const char* u : {"{a}", "{c}", "{a,b,c}", "{a,c,d}"}) cv.legs.push_back(c.hom(c.object(u), top).front());
  std::cout << describe_cover(c, cv) << ": H_1 = " << canonicalize(h_n_cover(site, cv, a, 1)).to_string() << "\n";

  auto p = Precosheaf<Integers>::constant(site.category_ptr(), z);
  if (auto w = cosheaf_violation(site, p)) std::cout << "constant precosheaf fails at " << c.object_name(w->object) << "\n";
  auto s = sharp(site, p).result;
  std::cout << "sharp: ";
  for (ObjectId u = 0; u < c.object_count(); ++u) {
    std::cout << (u ? ", " : "") << c.object_name(u) << " -> " << canonicalize(s.value(u)).to_string();
  }
  std::cout << "\nsharp is a cosheaf: " << (is_cosheaf(site, s) ? "yes" : "no") << "\n";
}
