#include <gtest/gtest.h>

#include <memory>
#include <random>
#include <set>

#include "cosheaf/fincat.hpp"
#include "support/random_instances.hpp"

using namespace cosheaf;
using testing_support::pseudocircle_space;
using testing_support::random_space;

namespace {

CategoryPtr share(FinCategory c) { return std::make_shared<const FinCategory>(std::move(c)); }

// Brute force: every subset of arrows into u that is closed under precomposition.
std::set<std::vector<MorphismId>> brute_sieves(const FinCategory& c, ObjectId u) {
  const auto& into = c.morphisms_into(u);
  std::set<std::vector<MorphismId>> out;
  for (std::uint64_t pick = 0; pick < (std::uint64_t{1} << into.size()); ++pick) {
    std::vector<MorphismId> members;
    for (std::size_t i = 0; i < into.size(); ++i) {
      if (pick >> i & 1) members.push_back(into[i]);
    }
    Sieve s = make_sieve(u, members);
    if (!sieve_violation(c, s)) out.insert(s.members);
  }
  return out;
}

ObjectId open_named(const Site& site, const std::string& name) { return site.category().object(name); }

MorphismId inclusion(const Site& site, const std::string& v, const std::string& u) {
  return site.category().hom(open_named(site, v), open_named(site, u)).at(0);
}

// Two parallel arrows f, g : A -> B.
FinCategory parallel_pair() {
  FinCategory::Builder b;
  auto a = b.add_object("A");
  auto bb = b.add_object("B");
  b.add_morphism("f", a, bb);
  b.add_morphism("g", a, bb);
  return b.build();
}

}  // namespace

TEST(FinCategory, PosetHasIdentitiesAndComposites) {
  auto c = poset_category({"0", "1", "2"}, [](std::size_t i, std::size_t j) { return i <= j; });
  EXPECT_EQ(c.object_count(), 3u);
  EXPECT_EQ(c.morphism_count(), 6u);
  EXPECT_TRUE(c.is_poset());
  auto f = c.hom(0, 1).at(0), g = c.hom(1, 2).at(0);
  EXPECT_EQ(c.compose(g, f), c.hom(0, 2).at(0));
  EXPECT_EQ(c.compose(f, c.identity(0)), f);
}

TEST(FinCategory, BrokenAssociativityIsReported) {
  // (e o z) o e = e but e o (z o e) = z.
  FinCategory::Builder b;
  auto x = b.add_object("X");
  auto e = b.add_morphism("e", x, x);
  auto z = b.add_morphism("z", x, x);
  b.set_composite(e, e, z);
  b.set_composite(z, e, e);
  b.set_composite(e, z, z);
  b.set_composite(z, z, z);
  auto v = b.check();
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(v->kind, "associativity");
  EXPECT_THROW(b.build(), CategoryError);
}

TEST(FinCategory, MissingCompositeIsReported) {
  FinCategory::Builder b;
  auto x = b.add_object("X");
  auto e = b.add_morphism("e", x, x);
  (void)e;
  auto v = b.check();
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(v->kind, "totality");
}

TEST(FinCategory, OppositeTwiceIsIdentity) {
  auto c = parallel_pair();
  auto op = c.opposite();
  EXPECT_EQ(op.dom(c.morphism_named("f")), c.object("B"));
  EXPECT_FALSE(op == c);
  EXPECT_EQ(op.opposite(), c);
  EXPECT_FALSE(c.is_thin());
}

TEST(FinFunctor, ValidationCatchesBrokenAssignments) {
  auto c = share(poset_category({"0", "1"}, [](std::size_t i, std::size_t j) { return i <= j; }));
  auto id = FinFunctor::identity(c);
  EXPECT_FALSE(id.violation().has_value());
  FinFunctor bad = id;
  bad.on_objects = {1, 1};
  EXPECT_TRUE(bad.violation().has_value());
  auto incl = FinFunctor::object_inclusion(c, 1);
  EXPECT_FALSE(incl.violation().has_value());
  auto comp = compose(id, incl);
  EXPECT_EQ(comp.on_objects, incl.on_objects);
}

TEST(Sieve, MaximalSieveExamples) {
  auto c = poset_category({"0", "1", "top"}, [](std::size_t i, std::size_t j) { return i == j || j == 2; });
  EXPECT_EQ(maximal_sieve(c, 2).size(), 3u);
  auto pt = point_category();
  EXPECT_EQ(maximal_sieve(pt, 0).members, std::vector<MorphismId>{pt.identity(0)});
  Site site = open_site(pseudocircle_space());
  auto x = open_named(site, "{a,b,c,d}");
  EXPECT_EQ(maximal_sieve(site.category(), x).size(), 7u);
}

TEST(Sieve, GeneratedSieveOfPseudocircleCover) {
  Site site = open_site(pseudocircle_space());
  const auto& c = site.category();
  auto x = open_named(site, "{a,b,c,d}");
  Cover cover{x, {inclusion(site, "{a}", "{a,b,c,d}"), inclusion(site, "{c}", "{a,b,c,d}"),
                  inclusion(site, "{a,b,c}", "{a,b,c,d}"), inclusion(site, "{a,c,d}", "{a,b,c,d}")}};
  Sieve s = sieve_generated_by(c, cover);
  EXPECT_EQ(s.size(), 6u);
  EXPECT_FALSE(s.contains(c.identity(x)));
  EXPECT_FALSE(sieve_violation(c, s).has_value());
  EXPECT_TRUE(site.is_covering(s));
}

TEST(Sieve, GeneratedSieveIsSmallestContainingLegs) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    Site site = open_site(random_space(rng, 1 + rng() % 4, 8));
    const auto& c = site.category();
    for (ObjectId u = 0; u < c.object_count(); ++u) {
      const auto& into = c.morphisms_into(u);
      Cover cover{u, {}};
      for (auto m : into) {
        if (rng() % 2) cover.legs.push_back(m);
      }
      Sieve gen = sieve_generated_by(c, cover);
      std::vector<MorphismId> best;
      bool found = false;
      for (const auto& members : brute_sieves(c, u)) {
        Sieve s{u, members};
        bool has_legs = true;
        for (auto l : cover.legs) has_legs &= s.contains(l);
        if (has_legs && (!found || members.size() < best.size())) {
          best = members;
          found = true;
        }
      }
      ASSERT_TRUE(found);
      EXPECT_EQ(gen.members, best);
    }
  }
}

TEST(Sieve, EmptyCoverGivesEmptySieve) {
  auto c = poset_category({"0", "1"}, [](std::size_t i, std::size_t j) { return i <= j; });
  EXPECT_TRUE(sieve_generated_by(c, Cover{1, {}}).empty());
  EXPECT_EQ(sieve_generated_by(c, Cover{1, {c.identity(1)}}), maximal_sieve(c, 1));
}

TEST(Sieve, AllSievesMatchesBruteForce) {
  std::mt19937_64 rng(5);
  std::vector<FinCategory> cats{parallel_pair(), point_category()};
  for (int i = 0; i < 20; ++i) cats.push_back(open_site(random_space(rng, 1 + rng() % 4, 8)).category());
  for (const auto& c : cats) {
    for (ObjectId u = 0; u < c.object_count(); ++u) {
      std::set<std::vector<MorphismId>> got;
      for (const auto& s : all_sieves(c, u)) got.insert(s.members);
      EXPECT_EQ(got, brute_sieves(c, u));
    }
  }
}

TEST(Site, TwoOpenSpace) {
  FinSpace x({"x"}, {{}, {"x"}});
  Site site = open_site(x);
  auto whole = open_named(site, "{x}");
  auto empty = open_named(site, "{}");
  ASSERT_EQ(site.covering_sieves(whole).size(), 1u);
  EXPECT_EQ(site.covering_sieves(whole)[0], maximal_sieve(site.category(), whole));
  // The empty family covers the empty open, so its empty sieve covers as well.
  EXPECT_EQ(site.covering_sieves(empty).size(), 2u);
  EXPECT_TRUE(site.is_covering(Sieve{empty, {}}));
  EXPECT_TRUE(site.pretopology_generated());
}

TEST(Site, DiscreteSiteEverySieveCovers) {
  auto c = share(poset_category({"0", "1"}, [](std::size_t i, std::size_t j) { return i <= j; }));
  Site site = discrete_site(c);
  for (ObjectId u = 0; u < 2; ++u) {
    EXPECT_EQ(site.covering_sieves(u).size(), all_sieves(*c, u).size());
  }
  EXPECT_FALSE(check_gt(*c, site.topology()).has_value());
}

TEST(Site, GtViolationsAreNamed) {
  auto c = share(poset_category({"0", "1"}, [](std::size_t i, std::size_t j) { return i <= j; }));
  Topology missing_max{{maximal_sieve(*c, 0)}, {}};
  auto v = check_gt(*c, missing_max);
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(v->axiom, "GT1");

  // Covering sieve {0->1} on 1 pulls back along 0->1 to the maximal sieve on 0: fine.
  // The empty sieve on 1 covering forces the empty sieve on 0 by GT3.
  Topology no_pullback{{maximal_sieve(*c, 0)}, {maximal_sieve(*c, 1), Sieve{1, {}}}};
  v = check_gt(*c, no_pullback);
  ASSERT_TRUE(v.has_value());
  EXPECT_TRUE(v->axiom == "GT2" || v->axiom == "GT3");
  EXPECT_THROW(Site(c, no_pullback), SiteAxiomError);

  Topology not_a_sieve{{maximal_sieve(*c, 0)}, {maximal_sieve(*c, 1), Sieve{1, {c->identity(1)}}}};
  v = check_gt(*c, not_a_sieve);
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(v->axiom, "sieve");
}

TEST(Site, RandomOpenSitesSatisfyGt) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    Site site = open_site(random_space(rng, 1 + rng() % 5, 8));
    EXPECT_FALSE(check_gt(site.category(), site.topology()).has_value());
    EXPECT_TRUE(site.pretopology_generated());
    for (ObjectId u = 0; u < site.category().object_count(); ++u) {
      EXPECT_TRUE(site.is_covering(site.minimal_covering_sieve(u)));
    }
  }
}

TEST(Site, NonPretopologyTopologyIsFlagged) {
  auto c = share(poset_category({"0", "1"}, [](std::size_t i, std::size_t j) { return i <= j; }));
  Site plain(c, Topology{{maximal_sieve(*c, 0)}, {maximal_sieve(*c, 1)}});
  EXPECT_FALSE(plain.has_pretopology());
  EXPECT_FALSE(plain.pretopology_generated());
  EXPECT_THROW(plain.covers(0), PretopologyRequiredError);
}

TEST(OpenSite, ExampleShapes) {
  EXPECT_EQ(open_site(FinSpace({"*"}, {{}, {"*"}})).category().object_count(), 2u);
  EXPECT_EQ(open_site(pseudocircle_space()).category().object_count(), 7u);
  Site d = open_site(FinSpace({"p", "q"}, {{}, {"p"}, {"q"}, {"p", "q"}}));
  EXPECT_EQ(d.category().object_count(), 4u);
  EXPECT_EQ(d.category().morphism_count(), 9u);
}

TEST(FinSpace, RejectsNonTopologies) {
  EXPECT_THROW(FinSpace({"a", "b"}, {{}, {"a"}, {"b"}}), Error);
  EXPECT_THROW(FinSpace({"a", "b", "c"}, {{}, {"a", "b"}, {"b", "c"}, {"a", "b", "c"}}), Error);
  EXPECT_THROW(FinSpace({"a"}, {{"a"}}), Error);
}

TEST(Pullback, PosetMeets) {
  Site site = open_site(pseudocircle_space());
  const auto& c = site.category();
  auto x = "{a,b,c,d}";
  auto pb = site.pullback(inclusion(site, "{a,b,c}", x), inclusion(site, "{a,c,d}", x));
  ASSERT_TRUE(pb.has_value());
  EXPECT_EQ(c.object_name(pb->object), "{a,c}");
  auto id = c.identity(open_named(site, x));
  pb = site.pullback(inclusion(site, "{a,b,c}", x), id);
  ASSERT_TRUE(pb.has_value());
  EXPECT_EQ(c.object_name(pb->object), "{a,b,c}");
  pb = site.pullback(inclusion(site, "{a}", x), inclusion(site, "{c}", x));
  ASSERT_TRUE(pb.has_value());
  EXPECT_EQ(c.object_name(pb->object), "{}");
}

TEST(Pullback, PosetPullbackIsIntersection) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    FinSpace space = random_space(rng, 1 + rng() % 5, 8);
    Site site = open_site(space);
    const auto& c = site.category();
    const auto& opens = space.opens();
    for (ObjectId u = 0; u < c.object_count(); ++u) {
      for (auto f : c.morphisms_into(u)) {
        for (auto g : c.morphisms_into(u)) {
          auto pb = site.pullback(f, g);
          ASSERT_TRUE(pb.has_value());
          EXPECT_EQ(opens[pb->object], opens[c.dom(f)] & opens[c.dom(g)]);
          EXPECT_TRUE(is_pullback(c, f, g, *pb));
        }
      }
    }
  }
}

TEST(Pullback, MissingPullbackInNonThinCategory) {
  // A pair of parallel arrows f, g : A -> B has no pullback of (f, g) unless an equalizer-like object exists.
  auto c = parallel_pair();
  auto f = c.morphism_named("f"), g = c.morphism_named("g");
  EXPECT_FALSE(find_pullback(c, f, g).has_value());
  auto pb = find_pullback(c, f, f);
  ASSERT_TRUE(pb.has_value());
  EXPECT_EQ(pb->object, c.object("A"));
}

TEST(Pullback, WitnessesAreChecked) {
  auto cp = share(parallel_pair());
  Site site = discrete_site(cp);
  auto f = cp->morphism_named("f");
  auto a = cp->object("A");
  EXPECT_NO_THROW(site.add_pullback_witness(f, f, Pullback{a, cp->identity(a), cp->identity(a)}));
  auto b = cp->object("B");
  EXPECT_THROW(site.add_pullback_witness(cp->identity(b), cp->identity(b), Pullback{a, f, f}),
               MissingPullbackError);
}

TEST(Comma, CommaOverHasTerminalObject) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    auto c = share(open_site(random_space(rng, 1 + rng() % 4, 8)).category());
    for (ObjectId u = 0; u < c->object_count(); ++u) {
      auto comma = comma_over(c, u);
      const auto& cu = *comma.category;
      EXPECT_FALSE(comma.projection().violation().has_value());
      int terminals = 0;
      for (ObjectId t = 0; t < cu.object_count(); ++t) {
        bool terminal = true;
        for (ObjectId o = 0; o < cu.object_count(); ++o) terminal &= cu.hom(o, t).size() == 1;
        if (terminal) {
          ++terminals;
          EXPECT_EQ(comma.structure[t], c->identity(u));
        }
      }
      EXPECT_EQ(terminals, 1);
      auto via_sieve = comma_sieve(c, maximal_sieve(*c, u));
      EXPECT_EQ(*via_sieve.category, cu);
    }
  }
}

TEST(Comma, TerminalObjectCommaIsWholeCategory) {
  auto c = share(poset_category({"0", "1", "top"}, [](std::size_t i, std::size_t j) { return i == j || j == 2; }));
  auto comma = comma_over(c, 2);
  EXPECT_EQ(comma.category->object_count(), 3u);
  EXPECT_EQ(comma.category->morphism_count(), c->morphism_count());
}

TEST(Comma, PseudocircleGeneratedSieve) {
  Site site = open_site(pseudocircle_space());
  auto c = site.category_ptr();
  auto x = open_named(site, "{a,b,c,d}");
  Cover cover{x, {inclusion(site, "{a}", "{a,b,c,d}"), inclusion(site, "{c}", "{a,b,c,d}"),
                  inclusion(site, "{a,b,c}", "{a,b,c,d}"), inclusion(site, "{a,c,d}", "{a,b,c,d}")}};
  auto comma = comma_sieve(c, sieve_generated_by(*c, cover));
  EXPECT_EQ(comma.category->object_count(), 6u);
  EXPECT_TRUE(comma.category->is_poset());
  // Inclusions among the six proper opens, identities included.
  std::size_t expected = 0;
  for (ObjectId v = 0; v < c->object_count(); ++v) {
    for (ObjectId w = 0; w < c->object_count(); ++w) {
      if (v != x && w != x) expected += c->hom(v, w).size();
    }
  }
  EXPECT_EQ(comma.category->morphism_count(), expected);
}

TEST(Comma, NonThinComma) {
  auto c = share(parallel_pair());
  auto comma = comma_over(c, c->object("B"));
  // Objects: f, g, id_B. Morphisms: identities plus f -> id_B and g -> id_B.
  EXPECT_EQ(comma.category->object_count(), 3u);
  EXPECT_EQ(comma.category->morphism_count(), 5u);
}

TEST(ConnectedComponents, PseudocircleExamples) {
  auto x = pseudocircle_space();
  EXPECT_EQ(connected_components(x, x.mask_of({"a", "c"})).size(), 2u);
  EXPECT_EQ(connected_components(x, x.whole()).size(), 1u);
  EXPECT_EQ(connected_components(x, 0).size(), 0u);
  EXPECT_EQ(connected_components(x, x.mask_of({"a", "b", "c"})).size(), 1u);
}

TEST(ConnectedComponents, MatchMinimalClopens) {
  std::mt19937_64 rng(29);
  using Mask = FinSpace::Mask;
  for (int trial = 0; trial < 60; ++trial) {
    FinSpace x = random_space(rng, 1 + rng() % 5, 10);
    for (Mask u : x.opens()) {
      // Subspace opens of u are traces of opens; components are the minimal nonempty clopens.
      std::set<Mask> traces;
      for (Mask o : x.opens()) traces.insert(o & u);
      std::vector<Mask> clopen;
      for (Mask s : traces) {
        if (s != 0 && traces.count(u & ~s)) clopen.push_back(s);
      }
      std::vector<Mask> minimal;
      for (Mask s : clopen) {
        bool min = true;
        for (Mask t : clopen) {
          if (t != s && (t & ~s) == 0) min = false;
        }
        if (min) minimal.push_back(s);
      }
      std::sort(minimal.begin(), minimal.end());
      EXPECT_EQ(connected_components(x, u), minimal);
    }
  }
}

TEST(Nerve, ChainCountsMatchPowersOfAdjacency) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    auto c = open_site(random_space(rng, 1 + rng() % 4, 8)).category();
    const std::size_t n = c.object_count();
    for (bool nondeg : {false, true}) {
      std::vector<std::vector<long long>> adj(n, std::vector<long long>(n, 0));
      for (MorphismId m = 0; m < c.morphism_count(); ++m) {
        if (!(nondeg && c.is_identity(m))) ++adj[c.dom(m)][c.cod(m)];
      }
      std::vector<long long> paths(n, 1);
      for (std::size_t len = 0; len <= 3; ++len) {
        long long total = 0;
        for (auto p : paths) total += p;
        EXPECT_EQ(static_cast<long long>(nerve_chains(c, len, nondeg).size()), total);
        std::vector<long long> next(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) next[j] += paths[i] * adj[i][j];
        }
        paths = next;
      }
    }
  }
}
