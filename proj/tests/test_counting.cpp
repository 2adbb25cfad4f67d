#include <doctest.h>

#include <map>

#include "oracles.hpp"
#include "vsp/bigint.hpp"
#include "vsp/counting.hpp"
#include "vsp/rng.hpp"

using namespace vsp;

TEST_CASE("count_le on the worked examples") {
  CHECK(count_le(oracle::t0()).value == 3);
  CHECK(count_le(vsp_to_mdt(oracle::v0())).value == 3);

  SUBCASE("empty order on 4 actors has 24") {
    Mdt m = Mdt::internal(false, {Mdt::single(1), Mdt::single(2), Mdt::single(3), Mdt::single(4)});
    CHECK(count_le(m).value == 24);
  }
  SUBCASE("parallel of a 2-chain and a singleton has 3") {
    Mdt m = Mdt::internal(false, {Mdt::internal(true, {Mdt::single(1), Mdt::single(2)}),
                                  Mdt::single(3)});
    CHECK(count_le(m).value == 3);
    // The brute-force route agrees.
    CHECK(enumerate_linear_extensions(mdt_to_vsp(m)).size() == 3);
  }
  SUBCASE("any total order has exactly 1") {
    Mdt m = Mdt::internal(true, {Mdt::single(3), Mdt::single(1), Mdt::single(2)});
    CHECK(count_le(m).value == 1);
  }
  SUBCASE("single actor") { CHECK(count_le(Mdt::single(7)).value == 1); }
}

TEST_CASE("log_value tracks the exact count") {
  Rng rng(51);
  for (int rep = 0; rep < 40; ++rep) {
    int n = 2 + static_cast<int>(rng.uniform_int(10));
    LeCount c = count_le(sample_bdt_prior(n, 0.4, rng));
    CHECK(c.value >= 1);
    CHECK(c.log_value == doctest::Approx(log_big(c.value)).epsilon(1e-12));
  }
}

TEST_CASE("count_le equals brute-force enumeration") {
  Rng rng(53);
  for (int n = 2; n <= 8; ++n) {
    for (int rep = 0; rep < 60; ++rep) {
      Bdt t = sample_bdt_prior(n, rng.uniform(), rng);
      PartialOrder po = bdt_to_vsp(t);
      size_t brute = enumerate_linear_extensions(po).size();
      CHECK(count_le(t).value == BigInt(static_cast<unsigned long>(brute)));
    }
  }
}

TEST_CASE("top and bottom counts") {
  Mdt v0 = vsp_to_mdt(oracle::v0());
  SUBCASE("v0: only actor 1 can lead, only actor 5 can trail") {
    auto tops = top_counts(v0);
    CHECK(tops.at(1).value == 3);
    for (Actor a : {2, 3, 4, 5}) CHECK(tops.at(a).value == 0);
    auto bottoms = bottom_counts(v0);
    CHECK(bottoms.at(5).value == 3);
    for (Actor a : {1, 2, 3, 4}) CHECK(bottoms.at(a).value == 0);
  }
  SUBCASE("empty order on 3: two extensions start (and end) with each actor") {
    Mdt m = Mdt::internal(false, {Mdt::single(1), Mdt::single(2), Mdt::single(3)});
    auto tops = top_counts(m);
    auto bottoms = bottom_counts(m);
    for (Actor a : {1, 2, 3}) {
      CHECK(tops.at(a).value == 2);
      CHECK(bottoms.at(a).value == 2);
    }
  }
  SUBCASE("random trees match first/last tallies over the enumeration") {
    Rng rng(59);
    for (int rep = 0; rep < 40; ++rep) {
      int n = 2 + static_cast<int>(rng.uniform_int(7)); // 2..8
      Bdt t = sample_bdt_prior(n, 0.5, rng);
      Mdt m = bdt_collapse_to_mdt(t);
      PartialOrder po = mdt_to_vsp(m);
      auto les = enumerate_linear_extensions(po);
      std::map<Actor, long> firsts, lasts;
      for (const auto& le : les) {
        firsts[le.front()]++;
        lasts[le.back()]++;
      }
      auto tops = top_counts(m);
      auto bottoms = bottom_counts(m);
      BigInt top_sum = 0, bottom_sum = 0;
      for (Actor a : m.actors()) {
        CHECK(tops.at(a).value == BigInt(firsts[a]));
        CHECK(bottoms.at(a).value == BigInt(lasts[a]));
        top_sum += tops.at(a).value;
        bottom_sum += bottoms.at(a).value;
      }
      // Placement counts partition the extensions.
      CHECK(top_sum == count_le(m).value);
      CHECK(bottom_sum == count_le(m).value);
    }
  }
}

TEST_CASE("series and parallel composition laws") {
  Rng rng(61);
  for (int rep = 0; rep < 40; ++rep) {
    int na = 1 + static_cast<int>(rng.uniform_int(5));
    int nb = 1 + static_cast<int>(rng.uniform_int(5));
    std::vector<Actor> aa(na), bb(nb);
    for (int i = 0; i < na; ++i) aa[i] = i + 1;
    for (int i = 0; i < nb; ++i) bb[i] = na + i + 1;
    Bdt ta = sample_bdt_prior(aa, 0.5, rng);
    Bdt tb = sample_bdt_prior(bb, 0.5, rng);
    BigInt ca = count_le(ta).value, cb = count_le(tb).value;
    CHECK(count_le(Bdt::combine(true, ta, tb)).value == ca * cb);
    CHECK(count_le(Bdt::combine(false, ta, tb)).value ==
          ca * cb * binomial(static_cast<unsigned long>(na + nb), static_cast<unsigned long>(na)));
  }
}
