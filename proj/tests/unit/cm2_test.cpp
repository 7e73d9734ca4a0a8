#include <doctest.h>

#include "helpers.hpp"
#include "replisim/cm2.hpp"

using namespace replisim;
using replisim::testing::key;

namespace {

Tuple val(std::int64_t v) { return Tuple{Atom{v}}; }

ReadRequest read_all() { return {0, Condition::always(), false}; }

Scenario two_local() {
  return parse_scenario(replisim::testing::two_dc_text("relation.x.replication = 2\n"));
}

}  // namespace

TEST_CASE("no alive local copies gives an empty answer") {
  const Scenario s = parse_scenario(
      "datacentre.dc1.offset = 1\n"
      "datacentre.dc2.offset = 2\n"
      "relation.x.arity = 1\n"
      "relation.x.datacentres = dc1\n");
  const LocalReadResult r = cm2_handle_locally_read(s.cluster, ReplicaStore{}, 1, read_all());
  CHECK(r.triples.empty());
  CHECK(r.counts == CopyCounts{0});
}

TEST_CASE("local read keeps the local maximum") {
  const Scenario s = two_local();
  const ClusterConfig& cfg = s.cluster;
  ReplicaStore store;
  store.store({0, 1, 0, 1, key(1)}, {val(1), cfg.timestamp(3, 0)});
  SUBCASE("single replica") {
    const LocalReadResult r = cm2_handle_locally_read(cfg, store, 0, read_all());
    CHECK(r.triples.at(key(1)) == Entry{val(1), cfg.timestamp(3, 0)});
    CHECK(r.counts == CopyCounts{2});
  }
  SUBCASE("two replicas") {
    store.store({0, 1, 0, 2, key(1)}, {val(2), cfg.timestamp(4, 1)});
    const LocalReadResult r = cm2_handle_locally_read(cfg, store, 0, read_all());
    CHECK(r.triples.at(key(1)) == Entry{val(2), cfg.timestamp(4, 1)});
  }
  SUBCASE("tombstones travel") {
    store.store({0, 1, 0, 2, key(1)}, {std::nullopt, cfg.timestamp(4, 1)});
    const LocalReadResult r = cm2_handle_locally_read(cfg, store, 0, read_all());
    CHECK_FALSE(r.triples.at(key(1)).value.has_value());
  }
  SUBCASE("other data centre sees its own copies only") {
    const LocalReadResult r = cm2_handle_locally_read(cfg, store, 1, read_all());
    CHECK(r.triples.empty());
    CHECK(r.counts == CopyCounts{2});
  }
}

TEST_CASE("local write") {
  const Scenario s = two_local();
  const ClusterConfig& cfg = s.cluster;
  ReplicaStore store;
  store.store({0, 1, 0, 1, key(1)}, {val(9), cfg.timestamp(9, 0)});
  const ClockBank clocks(2, 2);
  const Timestamp t = cfg.timestamp(5, 1);

  SUBCASE("a fresher replica is left alone but still counted") {
    const LocalWriteResult r = cm2_handle_locally_write(cfg, store, clocks, 0, {0, {{key(1), val(5)}}}, t);
    REQUIRE(r.updates.size() == 1);
    CHECK(r.updates[0].first.node == 2);
    CHECK(r.counts == CopyCounts{2});
  }
  SUBCASE("the clock is adjusted") {
    const LocalWriteResult r = cm2_handle_locally_write(cfg, store, clocks, 0, {0, {{key(1), val(5)}}}, t);
    CHECK(r.clocks.tick(0) == 6);
    CHECK(r.clocks.tick(1) == 2);
  }
  SUBCASE("empty write set") {
    const LocalWriteResult r = cm2_handle_locally_write(cfg, store, clocks, 1, {0, {}}, t);
    CHECK(r.updates.empty());
    CHECK(r.counts == CopyCounts{2});
  }
}

TEST_CASE("collect") {
  const Scenario s = replisim::testing::two_dc();
  const ClusterConfig& cfg = s.cluster;
  Collector c{{}, CountState(cfg, 0)};
  collect(c, {{key(1), {val(2), cfg.timestamp(6, 1)}}}, {1}, 1);

  SUBCASE("older triples do not replace newer ones") {
    const Collector before = c;
    collect(c, {{key(1), {val(1), cfg.timestamp(3, 0)}}}, {0}, 0);
    CHECK(c.answers == before.answers);
  }
  SUBCASE("ONE is met by the first answer") {
    CHECK(sufficient(c.counts, Policy::one(), cfg, 0));
    CHECK_FALSE(sufficient(c.counts, Policy::all(), cfg, 0));
  }
  SUBCASE("ALL after both answers") {
    collect(c, {}, {1}, 0);
    CHECK(sufficient(c.counts, Policy::all(), cfg, 0));
  }
  SUBCASE("acks commute") {
    Collector a{{}, CountState(cfg, 0)}, b{{}, CountState(cfg, 0)};
    collect(a, {}, {1}, 0);
    collect(a, {}, {1}, 1);
    collect(b, {}, {1}, 1);
    collect(b, {}, {1}, 0);
    CHECK(a == b);
  }
  SUBCASE("respond drops undefined values") {
    collect(c, {{key(2), {std::nullopt, cfg.timestamp(7, 0)}}}, {0}, 0);
    CHECK(respond_answer(c.answers) == Answer{{key(1), val(2)}});
  }
}
