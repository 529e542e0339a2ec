// B_n = G^{n+1}: every level surjects onto the previous one, yet no level is rudimentary.
#include <iostream>

#include "cosheaf/protower.hpp"

using namespace cosheaf;

int main(int argc, char** argv) {
  const std::size_t bound = argc > 1 ? std::stoul(argv[1]) : 6;
  const Integers zz;
  auto tower = Tower<Integers>::convergent(PresentedModule<Integers>::free(zz, 1));

  for (std::size_t n = 1; n <= 3; ++n) {
    std::cout << "B_" << n << " = " << canonicalize(tower.level(n)).to_string() << ", B_" << n + 1 << " -> B_" << n << " = "
              << tower.step(n).matrix() << "\n";
  }

  auto rud = rudimentary_obstruction(tower, bound);
  std::cout << "obstructed up to " << bound << ": " << (rud.verdict == RudimentaryVerdict::kObstructed ? "yes" : "no")
            << " (" << rud.witnesses.size() << " witnesses)\n";
  auto zero = is_zero_up_to(tower, bound);
  std::cout << "zero: " << (zero.verdict == ZeroVerdict::kZero ? "yes" : "unknown, " + zero.reason) << "\n";

  for (std::size_t n = 2; n <= bound; n += 2) {
    auto pc = pairing_colimit(tower, PresentedModule<Integers>::free(zz, 1), n);
    std::cout << "colim Hom(B_k, Z), k <= " << n << ": " << canonicalize(pc.colimit).to_string()
              << (pc.stabilized ? "" : ", still growing") << "\n";
  }
}
