#include <gtest/gtest.h>

#include <random>

#include "cosheaf/kmod.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace cosheaf;
using namespace testing_support;

namespace {

std::vector<std::vector<mpz_class>> to_mpz(const ZMatrix& m) {
  std::vector<std::vector<mpz_class>> out(m.rows(), std::vector<mpz_class>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = m(i, j).to_mpz();
  }
  return out;
}

ZMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, long long bound) {
  ZMatrix m(Integers{}, r, c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      long long v = static_cast<long long>(rng() % (2 * bound + 1)) - bound;
      if (rng() % 3 == 0) v = 0;
      m(i, j) = Integer(v);
    }
  }
  return m;
}

void expect_smith_contract(const ZMatrix& m) {
  auto f = smith_normal_form(m);
  EXPECT_EQ(f.u * m * f.v, f.d);
  auto du = oracle::determinant(to_mpz(f.u));
  auto dv = oracle::determinant(to_mpz(f.v));
  EXPECT_TRUE(du == 1 || du == -1);
  EXPECT_TRUE(dv == 1 || dv == -1);
  std::size_t k = std::min(m.rows(), m.cols());
  for (std::size_t i = 0; i < f.d.rows(); ++i) {
    for (std::size_t j = 0; j < f.d.cols(); ++j) {
      if (i != j) EXPECT_TRUE(f.d(i, j).is_zero());
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    EXPECT_GE(f.d(i, i).sign(), 0);
    if (i + 1 < k) {
      Integers z;
      EXPECT_TRUE(z.divides(f.d(i, i), f.d(i + 1, i + 1)));
    }
  }
}

}  // namespace

TEST(Smith, IdentityIsFixed) {
  auto f = smith_normal_form(ZMatrix::identity(Integers{}, 2));
  EXPECT_EQ(f.d, ZMatrix::identity(Integers{}, 2));
  EXPECT_EQ(f.u, ZMatrix::identity(Integers{}, 2));
  EXPECT_EQ(f.v, ZMatrix::identity(Integers{}, 2));
}

TEST(Smith, TwoByTwoExample) {
  auto m = zmat(2, {{2, 4}, {6, 8}});
  auto oracle_factors = oracle::invariant_factors_by_minors({{2, 4}, {6, 8}});
  ASSERT_EQ(oracle_factors.size(), 2u);
  auto f = smith_normal_form(m);
  EXPECT_EQ(f.d(0, 0).to_mpz(), oracle_factors[0]);
  EXPECT_EQ(f.d(1, 1).to_mpz(), oracle_factors[1]);
  EXPECT_EQ(f.d, zmat(2, {{2, 0}, {0, 4}}));
  expect_smith_contract(m);
}

TEST(Smith, ZeroMatrix) {
  ZMatrix z(Integers{}, 2, 3);
  auto f = smith_normal_form(z);
  EXPECT_TRUE(f.d.is_zero());
  EXPECT_EQ(f.u, ZMatrix::identity(Integers{}, 2));
  EXPECT_EQ(f.v, ZMatrix::identity(Integers{}, 3));
}

TEST(Smith, RandomMatricesMatchMinorsOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t r = 1 + rng() % 4, c = 1 + rng() % 4;
    auto m = random_matrix(rng, r, c, 9);
    expect_smith_contract(m);
    oracle::Mat om(r, oracle::Vec(c));
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) om[i][j] = m(i, j).to_int64();
    }
    auto expected = oracle::invariant_factors_by_minors(om);
    auto diag = smith_diagonal(m);
    ASSERT_EQ(diag.size(), expected.size());
    for (std::size_t i = 0; i < diag.size(); ++i) EXPECT_EQ(diag[i].to_mpz(), expected[i]);
  }
}

TEST(Smith, LargeEntriesStayExact) {
  ZMatrix m(Integers{}, 3, 3);
  m(0, 0) = Integer::parse("123456789012345678901234567890");
  m(0, 1) = Integer::parse("987654321098765432109876543210");
  m(1, 1) = Integer(std::int64_t{1} << 62);
  m(1, 2) = Integer(-7);
  m(2, 0) = Integer(3);
  m(2, 2) = Integer::parse("-99999999999999999999");
  expect_smith_contract(m);
}

TEST(Smith, FieldGivesRankNormalForm) {
  PrimeField f5(5);
  auto m = cosheaf::Matrix<PrimeField>::from_ints(f5, 3, {{1, 2, 3}, {2, 4, 6}, {0, 1, 1}});
  auto s = smith_normal_form(m);
  EXPECT_EQ(s.u * m * s.v, s.d);
  EXPECT_EQ(s.d(0, 0), 1);
  EXPECT_EQ(s.d(1, 1), 1);
  EXPECT_EQ(s.d(2, 2), 0);
}

TEST(Canonicalize, FreeModule) {
  auto cf = canonicalize(ZModule::free(Integers{}, 3));
  EXPECT_EQ(cf.free_rank, 3u);
  EXPECT_TRUE(cf.torsion.empty());
}

TEST(Canonicalize, CokernelOfExample) {
  auto cf = canonicalize(ZModule(zmat(2, {{2, 4}, {6, 8}})));
  EXPECT_EQ(cf.free_rank, 0u);
  EXPECT_EQ(factors_of(cf), (oracle::Vec{2, 4}));
  EXPECT_EQ(cf.to_string(), "Z/2 + Z/4");
}

TEST(Canonicalize, UnitOverRationals) {
  Rationals q;
  auto cf = canonicalize(PresentedModule<Rationals>(cosheaf::Matrix<Rationals>::from_ints(q, 1, {{2}})));
  EXPECT_TRUE(cf.is_zero());
}

TEST(Canonicalize, InvariantUnderUnimodularChanges) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t g = 1 + rng() % 4, r = rng() % 5;
    auto rel = random_matrix(rng, r, g, 6);
    ZModule m(Integers{}, g, rel);
    // Random elementary column operations (change of generators) and row operations.
    ZMatrix p = ZMatrix::identity(Integers{}, g);
    for (int k = 0; k < 6 && g > 1; ++k) {
      std::size_t a = rng() % g, b = rng() % g;
      if (a != b) p.add_col_multiple(a, b, Integer(static_cast<long long>(rng() % 7) - 3));
    }
    ZMatrix q = ZMatrix::identity(Integers{}, r);
    for (int k = 0; k < 6 && r > 1; ++k) {
      std::size_t a = rng() % r, b = rng() % r;
      if (a != b) q.add_row_multiple(a, b, Integer(static_cast<long long>(rng() % 7) - 3));
    }
    ZModule m2(Integers{}, g, q * rel * p);
    EXPECT_EQ(canonicalize(m), canonicalize(m2));
  }
}

TEST(KernelCokernelImage, TimesTwo) {
  auto z = ZModule::free(Integers{}, 1);
  ZMap two(z, z, zmat(1, {{2}}));
  EXPECT_TRUE(canonicalize(kernel(two).module()).is_zero());
  auto ck = cokernel(two);
  EXPECT_EQ(factors_of(canonicalize(ck.module)), (oracle::Vec{2}));
  EXPECT_EQ(canonicalize(ck.module).free_rank, 0u);
}

TEST(KernelCokernelImage, ImageOfDiagonal) {
  auto z2 = ZModule::free(Integers{}, 2);
  ZMap f(z2, z2, zmat(2, {{2, 0}, {0, 0}}));
  auto im = image(f);
  auto cf = canonicalize(im.module);
  EXPECT_EQ(cf.free_rank, 1u);
  EXPECT_TRUE(cf.torsion.empty());
  // The inclusion hits (2, 0) and is injective.
  EXPECT_TRUE(is_injective(im.inclusion));
  EXPECT_TRUE(maps_equal(compose(im.inclusion, im.corestriction), f));
}

TEST(KernelCokernelImage, IllDefinedMapRejected) {
  auto z2 = cyclic_product({2});
  auto z3 = cyclic_product({3});
  ZMap bad(z2, z3, zmat(1, {{1}}));
  EXPECT_THROW(kernel(bad), WellDefinednessError);
  EXPECT_THROW(cokernel(bad), WellDefinednessError);
  EXPECT_THROW(image(bad), WellDefinednessError);
  try {
    kernel(bad);
  } catch (const WellDefinednessError& e) {
    EXPECT_EQ(e.relation_row(), 0u);
  }
}

TEST(KernelCokernelImage, KernelInclusionComposesToZero) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    oracle::Vec a{1 + static_cast<long long>(rng() % 6), 1 + static_cast<long long>(rng() % 6)};
    oracle::Vec b{1 + static_cast<long long>(rng() % 8)};
    auto fm = random_hom(rng, a, b);
    ZMap f(cyclic_product(a), cyclic_product(b), to_matrix(fm, b.size()));
    auto k = kernel(f);
    EXPECT_TRUE(is_zero_map(compose(f, k.inclusion)));
    EXPECT_TRUE(is_injective(k.inclusion));
    auto c = cokernel(f);
    EXPECT_TRUE(is_zero_map(compose(c.projection, f)));
    // |ker| * |im| = |source|
    auto hk = oracle::homology_histogram(oracle::FiniteGroup{{1}}, oracle::FiniteGroup{a},
                                         oracle::FiniteGroup{b}, oracle::Mat{{0, 0}}, fm);
    EXPECT_EQ(hk, oracle::histogram_of_factors(factors_of(canonicalize(k.module()))));
  }
}

TEST(Homology, TimesTwoSequence) {
  auto zero = ZModule::zero(Integers{});
  auto z = ZModule::free(Integers{}, 1);
  ZMap in0 = ZMap::zero(zero, z);
  ZMap two(z, z, zmat(1, {{2}}));
  ZMap out0 = ZMap::zero(z, zero);
  EXPECT_TRUE(canonicalize(homology_at(in0, two)).is_zero());
  EXPECT_EQ(factors_of(canonicalize(homology_at(two, out0))), (oracle::Vec{2}));
}

TEST(Homology, ExactPair) {
  auto z = ZModule::free(Integers{}, 1);
  auto z2 = cyclic_product({2});
  ZMap two(z, z, zmat(1, {{2}}));
  ZMap red(z, z2, zmat(1, {{1}}));
  EXPECT_TRUE(canonicalize(homology_at(two, red)).is_zero());
}

TEST(Homology, ZeroMapsAroundZ6) {
  auto z6 = cyclic_product({6});
  auto zero = ZModule::zero(Integers{});
  auto cf = canonicalize(homology_at(ZMap::zero(zero, z6), ZMap::zero(z6, zero)));
  EXPECT_EQ(factors_of(cf), (oracle::Vec{6}));
}

TEST(Homology, CompositeNonzeroCarriesWitness) {
  auto z = ZModule::free(Integers{}, 2);
  ZMap f(z, z, zmat(2, {{1, 0}, {0, 1}}));
  try {
    homology_at(f, f);
    FAIL() << "expected CompositeNonzeroError";
  } catch (const CompositeNonzeroError& e) {
    EXPECT_EQ(e.generator(), 0u);
  }
}

TEST(Homology, MatchesBruteForceOnSmallGroups) {
  std::mt19937_64 rng(7);
  int checked = 0;
  while (checked < 150) {
    auto rand_orders = [&](long long cap) {
      oracle::Vec v;
      long long size = 1;
      std::size_t k = 1 + rng() % 3;
      for (std::size_t i = 0; i < k; ++i) {
        long long n = 2 + static_cast<long long>(rng() % 5);
        if (size * n > cap) break;
        size *= n;
        v.push_back(n);
      }
      if (v.empty()) v.push_back(2);
      return v;
    };
    oracle::Vec lo = rand_orders(16), mo = rand_orders(64), no = rand_orders(16);
    oracle::FiniteGroup l{lo}, m{mo}, n{no};
    auto f_out = random_hom(rng, mo, no);
    // Choose images of L's generators inside ker(f_out), killed by the generator orders.
    std::vector<oracle::Vec> kernel_elems;
    for (const auto& x : m.elements()) {
      if (n.is_zero(oracle::apply(n, f_out, x))) kernel_elems.push_back(x);
    }
    oracle::Mat f_in;
    for (auto order : lo) {
      std::vector<oracle::Vec> ok;
      for (const auto& x : kernel_elems) {
        if (m.is_zero(m.scale(x, order))) ok.push_back(x);
      }
      f_in.push_back(ok[rng() % ok.size()]);
    }
    ZMap in(cyclic_product(lo), cyclic_product(mo), to_matrix(f_in, mo.size()));
    ZMap out(cyclic_product(mo), cyclic_product(no), to_matrix(f_out, no.size()));
    auto cf = canonicalize(homology_at(in, out));
    EXPECT_EQ(cf.free_rank, 0u);
    EXPECT_EQ(oracle::histogram_of_factors(factors_of(cf)), oracle::homology_histogram(l, m, n, f_in, f_out));
    ++checked;
  }
}

TEST(HomModule, HomZZ) {
  auto z = ZModule::free(Integers{}, 1);
  auto cf = canonicalize(hom_module(z, z));
  EXPECT_EQ(cf.free_rank, 1u);
  EXPECT_TRUE(cf.torsion.empty());
}

TEST(HomModule, HomZ4Z6) {
  auto cf = canonicalize(hom_module(cyclic_product({4}), cyclic_product({6})));
  EXPECT_EQ(oracle::count_homs(1, {{4}}, oracle::FiniteGroup{{6}}), 2);
  EXPECT_EQ(factors_of(cf), (oracle::Vec{2}));
  EXPECT_EQ(cf.free_rank, 0u);
}

TEST(HomModule, HomIntoZero) {
  auto cf = canonicalize(hom_module(cyclic_product({4, 2}), ZModule::zero(Integers{})));
  EXPECT_TRUE(cf.is_zero());
}

TEST(HomModule, CardinalityMatchesBruteForce) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 120; ++trial) {
    // Source: random presentation on up to 3 generators with finite quotient of order <= 32.
    std::size_t g = 1 + rng() % 2;
    oracle::Mat rel;
    for (std::size_t i = 0; i < g; ++i) {
      oracle::Vec row(g, 0);
      row[i] = 1 + static_cast<long long>(rng() % 6);
      rel.push_back(row);
    }
    if (rng() % 2) {
      oracle::Vec extra(g);
      for (auto& x : extra) x = static_cast<long long>(rng() % 7) - 3;
      rel.push_back(extra);
    }
    oracle::Vec to;
    long long size = 1;
    for (int k = 0; k < 3; ++k) {
      long long n = 2 + static_cast<long long>(rng() % 5);
      if (size * n > 32) break;
      size *= n;
      to.push_back(n);
    }
    ZModule src(Integers{}, g, to_matrix(rel, g));
    auto cf = canonicalize(hom_module(src, cyclic_product(to)));
    ASSERT_EQ(cf.free_rank, 0u);
    long long card = 1;
    for (const auto& d : cf.torsion) card *= d.to_int64();
    EXPECT_EQ(card, oracle::count_homs(g, rel, oracle::FiniteGroup{to}));
  }
}

TEST(HomModule, ElementsAreHomomorphismsAndActionsCompose) {
  auto m = cyclic_product({4, 2});
  auto n = cyclic_product({6});
  HomModule<Integers> h(m, n);
  for (std::size_t i = 0; i < h.module().generators(); ++i) EXPECT_TRUE(is_well_defined(h.generator_map(i)));
  // Precomposition with the identity is the identity.
  auto id = hom_precompose(ZMap::identity(m), h, h);
  EXPECT_TRUE(maps_equal(id, ZMap::identity(h.module())));
  // Postcomposition with multiplication by 2 on Z/6.
  ZMap two(n, n, zmat(1, {{2}}));
  auto post = hom_postcompose(two, h, h);
  EXPECT_TRUE(is_well_defined(post));
}

TEST(DirectSum, Examples) {
  Integers z;
  EXPECT_TRUE(canonicalize(direct_sum(z, {}).module).is_zero());
  auto s = direct_sum(z, {ZModule::free(z, 1), cyclic_product({2})});
  auto cf = canonicalize(s.module);
  EXPECT_EQ(cf.free_rank, 1u);
  EXPECT_EQ(factors_of(cf), (oracle::Vec{2}));
  auto t = direct_sum(z, {cyclic_product({3}), cyclic_product({3}), cyclic_product({3})});
  EXPECT_EQ(factors_of(canonicalize(t.module)), (oracle::Vec{3, 3, 3}));
}

TEST(DirectSum, BiproductIdentities) {
  Integers z;
  auto s = direct_sum(z, {cyclic_product({4}), ZModule::free(z, 2), cyclic_product({2, 6})});
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      auto c = compose(s.projections[i], s.injections[j]);
      if (i == j) {
        EXPECT_TRUE(maps_equal(c, ZMap::identity(s.injections[j].domain())));
      } else {
        EXPECT_TRUE(is_zero_map(c));
      }
    }
  }
}

TEST(IsIsomorphic, Examples) {
  EXPECT_TRUE(is_isomorphic(cyclic_product({2, 3}), cyclic_product({6})));
  EXPECT_FALSE(is_isomorphic(ZModule::free(Integers{}, 1), cyclic_product({2})));
  auto m = cyclic_product({4, 6});
  EXPECT_TRUE(is_isomorphic(m, m));
}

TEST(Fields, PrimeFieldAndRationals) {
  PrimeField f7(7);
  auto m = PresentedModule<PrimeField>(cosheaf::Matrix<PrimeField>::from_ints(f7, 3, {{1, 2, 3}, {2, 4, 6}}));
  auto cf = canonicalize(m);
  EXPECT_EQ(cf.free_rank, 2u);
  EXPECT_TRUE(cf.torsion.empty());
  EXPECT_EQ(cf.to_string(), "F7^2");
  Rationals q;
  auto mq = PresentedModule<Rationals>(q, 2, cosheaf::Matrix<Rationals>::from_ints(q, 2, {{3, 0}}));
  EXPECT_EQ(canonicalize(mq).free_rank, 1u);
  EXPECT_THROW(PrimeField(8), Error);
  EXPECT_THROW(RingSpec::parse("Fp:9"), ParseError);
  EXPECT_EQ(RingSpec::parse("Fp:13").to_string(), "Fp:13");
}

TEST(IntegerArithmetic, OverflowFallsBackToGmp) {
  Integer a(std::numeric_limits<std::int64_t>::max());
  Integer b = a + Integer(1);
  EXPECT_FALSE(b.is_small());
  EXPECT_EQ((b - Integer(1)), a);
  EXPECT_TRUE((b - Integer(1)).is_small());
  Integer c = a * a;
  EXPECT_EQ(c / a, a);
  auto [g, s, t] = gcdext(Integer(240), Integer(46));
  EXPECT_EQ(g, Integer(2));
  EXPECT_EQ(s * Integer(240) + t * Integer(46), g);
  EXPECT_EQ(floor_div(Integer(-7), Integer(2)), Integer(-4));
}
