#include <gtest/gtest.h>

#include <memory>
#include <random>

#include "cosheaf/diagram.hpp"
#include "support/random_instances.hpp"

using namespace cosheaf;
using namespace testing_support;

namespace {

using ZPre = Precosheaf<Integers>;
const Integers kZ{};

CategoryPtr share(FinCategory c) { return std::make_shared<const FinCategory>(std::move(c)); }

CategoryPtr chain(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back(std::to_string(i));
  return share(poset_category(names, [](std::size_t i, std::size_t j) { return i <= j; }));
}

// c -> a, c -> b.
CategoryPtr span() {
  return share(poset_category({"a", "b", "c"}, [](std::size_t i, std::size_t j) { return i == j || i == 2; }));
}

CategoryPtr parallel_pair() {
  FinCategory::Builder b;
  auto a = b.add_object("A");
  auto bb = b.add_object("B");
  b.add_morphism("f", a, bb);
  b.add_morphism("g", a, bb);
  return share(b.build());
}

// One object with a non-identity idempotent e (e o e = e).
CategoryPtr idempotent() {
  FinCategory::Builder b;
  auto x = b.add_object("X");
  auto e = b.add_morphism("e", x, x);
  b.set_composite(e, e, e);
  return share(b.build());
}

// One object with an involution s (s o s = id).
CategoryPtr involution() {
  FinCategory::Builder b;
  auto x = b.add_object("X");
  auto s = b.add_morphism("s", x, x);
  b.set_composite(s, s, b.identity(x));
  return share(b.build());
}

ZPre from_ints(const CategoryPtr& c, const std::vector<ZModule>& values, const std::vector<oracle::Mat>& mats) {
  std::vector<ZMatrix> ms;
  for (MorphismId m = 0; m < c->morphism_count(); ++m) {
    ms.push_back(int_matrix(kZ, values[c->dom(m)].generators(), values[c->cod(m)].generators(), mats[m]));
  }
  return ZPre(c, kZ, values, ms);
}

long long hom_count_into(const ZModule& source, const ZModule& target) {
  auto t = to_finite_module(target);
  return static_cast<long long>(oracle::all_homs(source.generators(), to_int_rows(kZ, source.relations()), t).size());
}

std::vector<CategoryPtr> small_categories() {
  std::vector<CategoryPtr> cats;
  for (std::size_t k = 1; k <= 3; ++k) {
    for (auto& c : all_posets(k)) cats.push_back(c);
  }
  cats.push_back(parallel_pair());
  cats.push_back(idempotent());
  cats.push_back(involution());
  return cats;
}

}  // namespace

TEST(Colimit, OneObjectDiagram) {
  auto pt = share(point_category());
  auto a = ZPre::constant(pt, cyclic_product({6}));
  auto col = colim(a);
  EXPECT_TRUE(is_isomorphic(col.module, cyclic_product({6})));
  EXPECT_TRUE(is_isomorphism(col.cocone[0]));
}

TEST(Colimit, PushoutOfIdentityAndDoubling) {
  auto c = span();
  auto z = ZModule::free(kZ, 1);
  std::vector<oracle::Mat> mats(c->morphism_count());
  for (MorphismId m = 0; m < c->morphism_count(); ++m) {
    if (c->is_identity(m)) mats[m] = {{1}};
    else mats[m] = c->cod(m) == c->object("a") ? oracle::Mat{{1}} : oracle::Mat{{2}};
  }
  auto a = from_ints(c, {z, z, z}, mats);
  ASSERT_FALSE(a.functoriality_violation());
  auto col = colim(a);
  EXPECT_EQ(canonicalize(col.module).to_string(), "Z");
}

TEST(Colimit, TerminalObjectGivesItsValue) {
  std::mt19937_64 rng(1);
  auto c = share(poset_category({"0", "1", "top"}, [](std::size_t i, std::size_t j) { return i == j || j == 2; }));
  for (int trial = 0; trial < 20; ++trial) {
    auto a = random_thin_precosheaf(rng, c, kZ);
    ASSERT_FALSE(a.functoriality_violation());
    auto col = colim(a);
    EXPECT_TRUE(is_isomorphism(col.cocone[2]));
  }
}

TEST(Limit, ProductAndEqualizer) {
  auto d = share(discrete_category({"x", "y"}));
  auto prod = lim(from_ints(d, {cyclic_product({2}), cyclic_product({3})}, {{{1}}, {{1}}}));
  EXPECT_TRUE(is_isomorphic(prod.module(), cyclic_product({6})));

  auto pp = parallel_pair();
  auto z = ZModule::free(kZ, 1);
  std::vector<oracle::Mat> mats(pp->morphism_count(), oracle::Mat{{1}});
  mats[pp->morphism_named("g")] = {{-1}};
  EXPECT_TRUE(canonicalize(lim(from_ints(pp, {z, z}, mats)).module()).is_zero());

  PrimeField f2(2);
  auto one = PresentedModule<PrimeField>::free(f2, 1);
  std::vector<Matrix<PrimeField>> fm(pp->morphism_count(), Matrix<PrimeField>::identity(f2, 1));
  Precosheaf<PrimeField> e2(pp, f2, {one, one}, fm);
  EXPECT_EQ(canonicalize(lim(e2).module()).to_string(), "F2");

  Rationals q;
  auto qone = PresentedModule<Rationals>::free(q, 1);
  std::vector<Matrix<Rationals>> qm(pp->morphism_count(), Matrix<Rationals>::identity(q, 1));
  qm[pp->morphism_named("g")] = -Matrix<Rationals>::identity(q, 1);
  EXPECT_TRUE(canonicalize(lim(Precosheaf<Rationals>(pp, q, {qone, qone}, qm)).module()).is_zero());
}

TEST(Limit, InitialObjectGivesItsValue) {
  std::mt19937_64 rng(2);
  auto c = share(poset_category({"bot", "1", "2"}, [](std::size_t i, std::size_t j) { return i == j || i == 0; }));
  for (int trial = 0; trial < 20; ++trial) {
    auto a = random_thin_precosheaf(rng, c, kZ);
    auto l = lim(a);
    EXPECT_TRUE(is_isomorphism(l.cone[0]));
  }
}

TEST(Colimit, UniversalPropertyAgainstBruteForce) {
  std::mt19937_64 rng(3);
  std::vector<oracle::Vec> targets{{2}, {3}, {4}, {2, 2}, {6}};
  for (const auto& c : small_categories()) {
    for (int trial = 0; trial < 3; ++trial) {
      auto a = c->is_thin() ? random_thin_precosheaf(rng, c, kZ, 8) : random_small_precosheaf(rng, c);
      auto col = colim(a);
      for (const auto& t : targets) {
        auto tm = cyclic_product(t);
        long long via_colimit = hom_count_into(col.module, tm);
        long long cocones = oracle::count_natural(to_finite(a), to_finite(ZPre::constant(c, tm)));
        EXPECT_EQ(via_colimit, cocones);
      }
    }
  }
}

TEST(Limit, UniversalPropertyAgainstBruteForce) {
  std::mt19937_64 rng(4);
  for (const auto& c : small_categories()) {
    for (int trial = 0; trial < 3; ++trial) {
      auto a = c->is_thin() ? random_thin_precosheaf(rng, c, kZ, 8) : random_small_precosheaf(rng, c);
      auto l = lim(a);
      auto cf = canonicalize(l.module());
      ASSERT_EQ(cf.free_rank, 0u);
      for (long long n = 1; n <= 8; ++n) {
        long long expected = 1;
        for (const auto& d : cf.torsion) expected *= std::gcd(n, d.to_int64());
        long long cones = oracle::count_natural(to_finite(ZPre::constant(c, cyclic_product({n}))), to_finite(a));
        EXPECT_EQ(cones, expected);
      }
    }
  }
}

TEST(SieveH0, MaximalEmptyAndCommaAgreement) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Site site = open_site(random_space(rng, 1 + rng() % 4, 8));
    auto c = site.category_ptr();
    auto a = random_thin_precosheaf(rng, c, kZ);
    for (ObjectId u = 0; u < c->object_count(); ++u) {
      EXPECT_TRUE(is_isomorphism(h0_sieve(a, maximal_sieve(*c, u)).comparison));
      EXPECT_TRUE(canonicalize(h0_sieve(a, Sieve{u, {}}).module()).is_zero());
      for (const auto& r : all_sieves(*c, u)) {
        auto direct = h0_sieve(a, r);
        auto comma = comma_sieve(c, r);
        auto generic = colim(restrict(comma.projection(), a));
        EXPECT_TRUE(is_isomorphic(direct.module(), generic.module));
        EXPECT_TRUE(is_well_defined(direct.comparison));
      }
    }
  }
}

TEST(SieveH0, ConstantOnPseudocircleGeneratedSieve) {
  Site site = open_site(pseudocircle_space());
  auto c = site.category_ptr();
  auto x = c->object("{a,b,c,d}");
  std::vector<MorphismId> legs;
  for (auto v : {"{a}", "{c}", "{a,b,c}", "{a,c,d}"}) legs.push_back(c->hom(c->object(v), x).at(0));
  Sieve r = sieve_generated_by(*c, Cover{x, legs});
  auto a = ZPre::constant(c, ZModule::free(kZ, 1));
  EXPECT_EQ(canonicalize(h0_sieve(a, r).module()).to_string(), "Z");
  auto b = Presheaf<Integers>::constant(c, ZModule::free(kZ, 1));
  EXPECT_EQ(canonicalize(h0_presheaf(b, r).module()).to_string(), "Z");
}

TEST(SieveH0, PresheafMaximalAndEmpty) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    Site site = open_site(random_space(rng, 1 + rng() % 4, 8));
    auto c = site.category_ptr();
    auto a = random_thin_precosheaf(rng, c, kZ);
    auto b = pairing(a, cyclic_product({4})).presheaf;
    ASSERT_FALSE(b.functoriality_violation());
    for (ObjectId u = 0; u < c->object_count(); ++u) {
      EXPECT_TRUE(is_isomorphism(h0_presheaf(b, maximal_sieve(*c, u)).comparison));
      EXPECT_TRUE(canonicalize(h0_presheaf(b, Sieve{u, {}}).module()).is_zero());
    }
  }
}

TEST(Kan, IdentityExtensions) {
  std::mt19937_64 rng(7);
  auto c = chain(3);
  auto a = random_thin_precosheaf(rng, c, kZ);
  auto id = FinFunctor::identity(c);
  auto l = left_kan(id, a);
  auto r = right_kan(id, a);
  for (ObjectId o = 0; o < 3; ++o) {
    EXPECT_TRUE(is_isomorphic(l.value(o), a.value(o)));
    EXPECT_TRUE(is_isomorphic(r.value(o), a.value(o)));
  }
  EXPECT_FALSE(l.functoriality_violation());
  EXPECT_FALSE(r.functoriality_violation());
}

TEST(Kan, GeneratorsAreSumsAndProductsOverHomSets) {
  auto pp = parallel_pair();
  auto m = cyclic_product({3});
  auto a = pp->object("A"), b = pp->object("B");
  auto lower = lower_generator(pp, a, m);
  auto upper = upper_generator(pp, b, m);
  EXPECT_FALSE(lower.functoriality_violation());
  EXPECT_FALSE(upper.functoriality_violation());
  // Hom(A, B) has two arrows, Hom(B, A) none.
  EXPECT_TRUE(is_isomorphic(lower.value(b), cyclic_product({3, 3})));
  EXPECT_TRUE(is_isomorphic(lower.value(a), m));
  EXPECT_TRUE(is_isomorphic(upper.value(a), cyclic_product({3, 3})));
  EXPECT_TRUE(is_isomorphic(upper.value(b), m));
  auto c = chain(3);
  auto low0 = lower_generator(c, 1, m);
  EXPECT_TRUE(canonicalize(low0.value(0)).is_zero());
  EXPECT_TRUE(is_isomorphic(low0.value(2), m));
}

TEST(Kan, DiscreteCollapse) {
  auto d2 = share(discrete_category({"x", "y"}));
  auto pt = share(point_category());
  FinFunctor collapse{d2, pt, {0, 0}, {pt->identity(0), pt->identity(0)}};
  ASSERT_FALSE(collapse.violation());
  auto a = from_ints(d2, {cyclic_product({2}), cyclic_product({3})}, {{{1}}, {{1}}});
  EXPECT_TRUE(is_isomorphic(left_kan(collapse, a).value(0), cyclic_product({6})));
  EXPECT_TRUE(is_isomorphic(right_kan(collapse, a).value(0), cyclic_product({6})));
  auto b = from_ints(d2, {ZModule::free(kZ, 1), cyclic_product({2})}, {{{1}}, {{1}}});
  EXPECT_EQ(canonicalize(left_kan(collapse, b).value(0)).to_string(), "Z + Z/2");
}

TEST(Kan, AdjunctionCountsOnSmallCategories) {
  std::mt19937_64 rng(8);
  for (const auto& d : small_categories()) {
    std::vector<FinFunctor> functors{FinFunctor::identity(d)};
    for (ObjectId v = 0; v < d->object_count(); ++v) functors.push_back(FinFunctor::object_inclusion(d, v));
    for (const auto& f : functors) {
      for (int trial = 0; trial < 2; ++trial) {
        auto a = f.source->is_thin() ? random_thin_precosheaf(rng, f.source, kZ, 6) : random_small_precosheaf(rng, f.source, 4);
        auto b = d->is_thin() ? random_thin_precosheaf(rng, d, kZ, 6) : random_small_precosheaf(rng, d, 4);
        auto lan = left_kan(f, a);
        ASSERT_FALSE(lan.functoriality_violation());
        EXPECT_EQ(oracle::count_natural(to_finite(lan), to_finite(b)),
                  oracle::count_natural(to_finite(a), to_finite(restrict(f, b))));
        auto ran = right_kan(f, a);
        ASSERT_FALSE(ran.functoriality_violation());
        EXPECT_EQ(oracle::count_natural(to_finite(b), to_finite(ran)),
                  oracle::count_natural(to_finite(restrict(f, b)), to_finite(a)));
      }
    }
  }
}

TEST(Restrict, IdentityAndComposite) {
  std::mt19937_64 rng(9);
  auto c = chain(4);
  auto a = random_thin_precosheaf(rng, c, kZ);
  auto id = FinFunctor::identity(c);
  auto r = restrict(id, a);
  for (ObjectId o = 0; o < 4; ++o) EXPECT_EQ(r.value(o), a.value(o));
  auto c2 = chain(2);
  FinFunctor g{c2, c, {1, 3}, {}};
  for (MorphismId m = 0; m < c2->morphism_count(); ++m) {
    g.on_morphisms.push_back(c->hom(g.on_objects[c2->dom(m)], g.on_objects[c2->cod(m)]).at(0));
  }
  ASSERT_FALSE(g.violation());
  auto pt = share(point_category());
  auto h = FinFunctor::object_inclusion(c2, 1);
  auto twice = restrict(h, restrict(g, a));
  auto once = restrict(compose(g, h), a);
  EXPECT_EQ(twice.value(0), once.value(0));
  EXPECT_EQ(once.value(0), a.value(3));
}

TEST(Pairing, Examples) {
  auto c = chain(3);
  auto z = ZModule::free(kZ, 1);
  auto p = pairing(ZPre::constant(c, z), z).presheaf;
  for (ObjectId o = 0; o < 3; ++o) EXPECT_EQ(canonicalize(p.value(o)).to_string(), "Z");
  for (MorphismId m = 0; m < c->morphism_count(); ++m) EXPECT_TRUE(is_isomorphism(p.action(m)));

  auto four = pairing(ZPre::constant(c, cyclic_product({4})), cyclic_product({6})).presheaf;
  EXPECT_EQ(canonicalize(four.value(0)).to_string(), "Z/2");

  std::mt19937_64 rng(10);
  PrimeField f3(3);
  auto k = PresentedModule<PrimeField>::free(f3, 1);
  for (int trial = 0; trial < 10; ++trial) {
    auto a = random_thin_precosheaf(rng, c, f3, 27);
    auto pa = pairing(a, k).presheaf;
    EXPECT_FALSE(pa.functoriality_violation());
    for (ObjectId o = 0; o < 3; ++o) {
      EXPECT_EQ(canonicalize(pa.value(o)).free_rank, canonicalize(a.value(o)).free_rank);
    }
  }
}

TEST(Pairing, AdditiveAndFunctorial) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 15; ++trial) {
    Site site = open_site(random_space(rng, 1 + rng() % 4, 6));
    auto c = site.category_ptr();
    auto a = random_thin_precosheaf(rng, c, kZ, 8);
    auto b = random_thin_precosheaf(rng, c, kZ, 8);
    auto t = cyclic_product({12});
    auto sum = direct_sum<Integers>({a, b});
    auto ps = pairing(sum.sum, t).presheaf;
    auto pa = pairing(a, t).presheaf;
    auto pb = pairing(b, t).presheaf;
    EXPECT_FALSE(ps.functoriality_violation());
    for (ObjectId o = 0; o < c->object_count(); ++o) {
      EXPECT_TRUE(is_isomorphic(ps.value(o), direct_sum_module(kZ, {pa.value(o), pb.value(o)})));
    }
  }
}

TEST(Pairing, LeftKanDualIsRightKanOfDualOverField) {
  std::mt19937_64 rng(12);
  PrimeField f2(2);
  auto k = PresentedModule<PrimeField>::free(f2, 1);
  for (const auto& d : small_categories()) {
    if (!d->is_thin()) continue;
    for (ObjectId v = 0; v < d->object_count(); ++v) {
      auto f = FinFunctor::object_inclusion(d, v);
      auto a = random_thin_precosheaf(rng, f.source, f2, 8);
      auto lhs = pairing(left_kan(f, a), k).presheaf;
      auto rhs = right_kan(opposite(f), pairing(a, k).presheaf.as_functor());
      for (ObjectId o = 0; o < d->object_count(); ++o) {
        EXPECT_TRUE(is_isomorphic(lhs.value(o), rhs.value(o)));
      }
    }
  }
}

TEST(QuasiProjective, Examples) {
  auto pt = share(point_category());
  auto zero_cover = quasiprojective_cover(ZPre::zero(pt, kZ));
  EXPECT_TRUE(canonicalize(zero_cover.cover.value(0)).is_zero());

  auto one = quasiprojective_cover(ZPre::constant(pt, cyclic_product({2})));
  EXPECT_EQ(canonicalize(one.cover.value(0)).to_string(), "Z");
  EXPECT_FALSE(first_non_epi(one.epi).has_value());

  auto arrow = chain(2);
  std::vector<oracle::Mat> mats(arrow->morphism_count());
  for (MorphismId m = 0; m < arrow->morphism_count(); ++m) mats[m] = {{1}};
  auto b = from_ints(arrow, {ZModule::free(kZ, 1), cyclic_product({2})}, mats);
  ASSERT_FALSE(b.functoriality_violation());
  auto qp = quasiprojective_cover(b);
  EXPECT_EQ(canonicalize(qp.cover.value(0)).to_string(), "Z");
  EXPECT_EQ(canonicalize(qp.cover.value(1)).to_string(), "Z^2");
  EXPECT_FALSE(qp.epi.naturality_violation());
  EXPECT_FALSE(first_non_epi(qp.epi).has_value());
}

TEST(QuasiProjective, RandomCoversAreNaturalEpisOntoFreeValues) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    Site site = open_site(random_space(rng, 1 + rng() % 4, 8));
    auto a = random_thin_precosheaf(rng, site.category_ptr(), kZ);
    for (auto strategy : {CoverStrategy::kStandard, CoverStrategy::kDoubled}) {
      auto qp = quasiprojective_cover(a, strategy);
      EXPECT_FALSE(qp.cover.functoriality_violation());
      EXPECT_FALSE(qp.epi.naturality_violation());
      EXPECT_FALSE(first_non_epi(qp.epi).has_value());
      for (ObjectId o = 0; o < a.category().object_count(); ++o) {
        EXPECT_TRUE(canonicalize(qp.cover.value(o)).torsion.empty());
      }
      auto k = kernel(qp.epi);
      EXPECT_FALSE(k.kernel.functoriality_violation());
      EXPECT_FALSE(k.inclusion.naturality_violation());
    }
  }
}

TEST(NaturalTransformations, ModuleCardinalityMatchesBruteForce) {
  std::mt19937_64 rng(14);
  for (const auto& c : small_categories()) {
    auto a = c->is_thin() ? random_thin_precosheaf(rng, c, kZ, 6) : random_small_precosheaf(rng, c, 4);
    auto b = c->is_thin() ? random_thin_precosheaf(rng, c, kZ, 6) : random_small_precosheaf(rng, c, 4);
    NaturalTransformationModule<Integers> nat(a, b);
    auto cf = canonicalize(nat.module());
    ASSERT_EQ(cf.free_rank, 0u);
    long long size = 1;
    for (const auto& d : cf.torsion) size *= d.to_int64();
    EXPECT_EQ(size, oracle::count_natural(to_finite(a), to_finite(b)));
    for (std::size_t g = 0; g < nat.module().generators(); ++g) {
      std::vector<Integer> coords(nat.module().generators(), Integer(0));
      coords[g] = 1;
      EXPECT_FALSE(nat.element(coords).naturality_violation());
    }
  }
}

TEST(Functoriality, BrokenCompositionIsReported) {
  auto c = chain(3);
  auto z = ZModule::free(kZ, 1);
  std::vector<oracle::Mat> mats(c->morphism_count(), oracle::Mat{{1}});
  mats[c->hom(0, 2).at(0)] = {{2}};
  auto a = from_ints(c, {z, z, z}, mats);
  auto v = a.functoriality_violation();
  ASSERT_TRUE(v.has_value());
  EXPECT_NE(v->find("composite"), std::string::npos);
  EXPECT_THROW(a.validate(), InvariantError);
}
