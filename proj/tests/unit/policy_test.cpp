#include <doctest.h>

#include <string>

#include "helpers.hpp"
#include "replisim/policy.hpp"

using namespace replisim;

namespace {

ClusterConfig single_dc(int copies) {
  return parse_scenario("datacentre.dc1.offset = 1\n"
                        "datacentre.dc2.offset = 2\n"
                        "relation.x.arity = 1\n"
                        "relation.x.datacentres = dc1\n"
                        "relation.x.replication = " +
                        std::to_string(copies) + "\n")
      .cluster;
}

ClusterConfig both_dcs(int per_dc) {
  return parse_scenario("datacentre.dc1.offset = 1\n"
                        "datacentre.dc2.offset = 2\n"
                        "relation.x.arity = 1\n"
                        "relation.x.fragments = 2\n"
                        "relation.x.replication = " +
                        std::to_string(per_dc) + "\n")
      .cluster;
}

Selection first(const ClusterConfig& cfg, std::size_t n) {
  Selection all = cfg.copies(0, 1);
  all.resize(n);
  return all;
}

}  // namespace

TEST_CASE("quorum uses a strict majority") {
  const ClusterConfig cfg = single_dc(5);
  CHECK(complies(first(cfg, 3), Policy::quorum(), cfg, 0, 1));
  CHECK_FALSE(complies(first(cfg, 2), Policy::quorum(), cfg, 0, 1));
}

TEST_CASE("ALL needs every copy") {
  const ClusterConfig cfg = both_dcs(2);
  CHECK(complies(cfg.copies(0, 1), Policy::all(), cfg, 0, 1));
  CHECK_FALSE(complies(first(cfg, 3), Policy::all(), cfg, 0, 1));
}

TEST_CASE("LOCAL_ONE rejects selections spanning data centres") {
  const ClusterConfig cfg = both_dcs(1);
  const Selection g = cfg.copies(0, 1);
  REQUIRE(g.size() == 2);
  CHECK_FALSE(complies(g, Policy::local_one(0), cfg, 0, 1));
  CHECK(complies({g[0]}, Policy::local_one(0), cfg, 0, 1));
  CHECK_FALSE(complies({g[1]}, Policy::local_one(0), cfg, 0, 1));
}

TEST_CASE("EACH_QUORUM needs a majority in every data centre") {
  const ClusterConfig cfg = both_dcs(3);
  const Selection c = cfg.copies(0, 1);
  // Two of three in each data centre.
  CHECK(complies({c[0], c[1], c[3], c[4]}, Policy::each_quorum(), cfg, 0, 1));
  CHECK_FALSE(complies({c[0], c[1], c[2], c[3]}, Policy::each_quorum(), cfg, 0, 1));
}

TEST_CASE("sufficient") {
  SUBCASE("zero counts never satisfy ONE") {
    const ClusterConfig cfg = both_dcs(2);
    CHECK_FALSE(sufficient(CountState(cfg, 0), Policy::one(), cfg, 0));
  }
  SUBCASE("ALL with both fragments complete") {
    const ClusterConfig cfg = both_dcs(2);
    REQUIRE(gamma(cfg, 0, 1) == 4);
    CountState c(cfg, 0);
    for (FragmentIndex j = 1; j <= 2; ++j) {
      c.add(j, 0, 2);
      c.add(j, 1, 2);
    }
    CHECK(sufficient(c, Policy::all(), cfg, 0));
  }
  SUBCASE("ALL with one fragment short") {
    const ClusterConfig cfg = both_dcs(2);
    CountState c(cfg, 0);
    c.add(1, 0, 2);
    c.add(1, 1, 2);
    c.add(2, 0, 2);
    CHECK_FALSE(sufficient(c, Policy::all(), cfg, 0));
  }
  SUBCASE("QUORUM at six copies") {
    const ClusterConfig cfg = both_dcs(3);
    REQUIRE(gamma(cfg, 0, 1) == 6);
    for (std::uint32_t count = 0; count <= 6; ++count) {
      CountState c(cfg, 0);
      for (FragmentIndex j = 1; j <= 2; ++j) {
        c.add(j, 0, std::min<std::uint32_t>(count, 3));
        c.add(j, 1, count > 3 ? count - 3 : 0);
      }
      CHECK(sufficient(c, Policy::quorum(), cfg, 0) == (count * 2 > 6));
    }
  }
}

TEST_CASE("counts add up in any order") {
  const ClusterConfig cfg = both_dcs(2);
  CountState a(cfg, 0), b(cfg, 0);
  a.add(1, 0, 2);
  a.add(1, 1, 1);
  b.add(1, 1, 1);
  b.add(1, 0, 2);
  CHECK(a == b);
  CHECK(a.count(1) == 3);
  CHECK(a.count(1, 1) == 1);
}

TEST_CASE("appropriate combinations") {
  CHECK(is_appropriate(Policy::one(), Policy::all()));
  CHECK(is_appropriate(Policy::all(), Policy::one()));
  CHECK(is_appropriate(Policy::quorum(), Policy::quorum()));
  CHECK(is_appropriate(Policy::each_quorum(), Policy::quorum()));
  CHECK(is_appropriate(Policy::quorum({1, 3}), Policy::quorum({2, 3})));
  CHECK_FALSE(is_appropriate(Policy::quorum({1, 3}), Policy::quorum({1, 2})));
  CHECK_FALSE(is_appropriate(Policy::one(), Policy::one()));
  CHECK_FALSE(is_appropriate(Policy::two(), Policy::two()));
  CHECK_FALSE(is_appropriate(Policy::local_quorum({1, 2}, 0), Policy::quorum()));
}

TEST_CASE("compliant selection enumeration") {
  SUBCASE("unmeetable") {
    const ClusterConfig cfg = both_dcs(1);
    CHECK(enumerate_compliant_selections(cfg, 0, 1, Policy::three(), 10).empty());
  }
  SUBCASE("singletons first") {
    const ClusterConfig cfg = single_dc(3);
    const auto sel = enumerate_compliant_selections(cfg, 0, 1, Policy::one(), 3);
    REQUIRE(sel.size() == 3);
    const Selection c = cfg.copies(0, 1);
    CHECK(sel[0] == Selection{c[0]});
    CHECK(sel[1] == Selection{c[1]});
    CHECK(sel[2] == Selection{c[2]});
  }
  SUBCASE("quorum of five") {
    const ClusterConfig cfg = single_dc(5);
    const auto sel = enumerate_compliant_selections(cfg, 0, 1, Policy::quorum(), 1);
    REQUIRE(sel.size() == 1);
    CHECK(sel[0] == first(cfg, 3));
    // Every subset of five, filtered through complies: ten of size 3, five of 4, one of 5.
    const auto all = enumerate_compliant_selections(cfg, 0, 1, Policy::quorum(), 1000);
    CHECK(all.size() == 16);
  }
}

TEST_CASE("policy spelling round-trips") {
  const ClusterConfig cfg = both_dcs(1);
  for (const char* text : {"ALL", "ONE", "TWO", "THREE", "QUORUM(1/2)", "EACH_QUORUM(2/3)",
                           "LOCAL_ONE(dc2)", "LOCAL_QUORUM(1/2,dc1)"}) {
    CHECK(format_policy(parse_policy(text, cfg), cfg) == text);
  }
  CHECK(parse_policy("QUORUM", cfg) == Policy::quorum());
  CHECK_THROWS_AS(parse_policy("MOST", cfg), ConfigError);
  CHECK_THROWS_AS(parse_policy("QUORUM(3/2)", cfg), ConfigError);
  CHECK_THROWS_AS(parse_policy("LOCAL_ONE(dc9)", cfg), ConfigError);
}
