// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
// when any criterion fails.

#include <CLI11.hpp>
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "replisim/consistency.hpp"
#include "replisim/predicates.hpp"
#include "replisim/search.hpp"
#include "replisim/sim.hpp"

using namespace replisim;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kCorpusSeed = 20261015;
constexpr std::size_t kCorpusSize = 20;
constexpr std::uint64_t kCm2Budget = 20'000;  // nodes per case; CM2 spaces are large
constexpr std::uint64_t kCm2Seeds = 10;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt_seconds(double s) {
  std::ostringstream o;
  o.precision(2);
  o << std::fixed << s << "s";
  return o.str();
}

int failures = 0;

void report(const std::string& id, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::cout << id << ' ' << (pass ? "PASS" : "FAIL") << ' ' << detail << std::endl;
}

struct Outcome {
  int status = -1;
  std::string out;
};

Outcome run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = "'" + cli + "' " + args + " 2>&1";
  Outcome o;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return o;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, p)) o.out.append(buf, n);
  const int raw = pclose(p);
  o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return o;
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

// `verdict=X exhaustive=Y` from the first line of a CLI report.
std::string verdict_of(const std::string& out) {
  std::istringstream in(out.substr(0, out.find('\n')));
  std::string verdict, exhaustive;
  in >> verdict >> exhaustive;
  return verdict + " " + exhaustive;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Per-agent projections, the only thing view equivalence looks at.
std::string view_key(const Trace& t, const Scenario& s) {
  std::string k;
  for (std::uint32_t a = 0; a < s.clients.size(); ++a) {
    for (const TraceEvent& e : t.projection(a)) {
      k += event_kind_name(e.kind);
      k += std::to_string(e.request);
      k += e.is_request() ? format_request(e.body(), s.cluster) : format_response(e.response(), s.cluster);
      k += ';';
    }
    k += '|';
  }
  return k;
}

// True when some agent's projection of `partial` is not a prefix of `target`'s.
bool strays_from(const Trace& partial, const Trace& target, std::size_t agents) {
  for (std::uint32_t a = 0; a < agents; ++a) {
    const auto p = partial.projection(a);
    const auto q = target.projection(a);
    if (p.size() > q.size()) return true;
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (p[k].kind != q[k].kind || p[k].request != q[k].request || !(p[k].payload == q[k].payload)) {
        return true;
      }
    }
  }
  return false;
}

// Pairwise distinct and consistently ordered.
bool issued_well_ordered(const std::vector<Timestamp>& ts) {
  for (std::size_t a = 0; a < ts.size(); ++a) {
    for (std::size_t b = a + 1; b < ts.size(); ++b) {
      const Order ab = compare_ts(ts[a], ts[b]);
      const Order ba = compare_ts(ts[b], ts[a]);
      if (ab == Order::kEqual) return false;
      if ((ab == Order::kLess) != (ba == Order::kGreater)) return false;
      if (ts[a].dc() != ts[b].dc() && ts[a].tick() == ts[b].tick() && ab == Order::kEqual) return false;
    }
  }
  return true;
}

struct Corpus {
  std::vector<std::string> texts;
  std::vector<testing::PolicyPair> pairs;
};

// Shared tallies for the corpus-wide criteria.
struct Tally {
  // AC2
  std::uint64_t cm1_cases = 0;
  std::uint64_t cm1_traces = 0;
  std::uint64_t cm1_incompatible = 0;
  std::uint64_t cm1_not_exhaustive = 0;
  double cm1_seconds = 0;
  // AC4
  std::uint64_t cm0_traces = 0;
  std::uint64_t cm0_to_cm1_failures = 0;
  std::uint64_t cm1_views = 0;
  std::uint64_t cm1_to_cm2_failures = 0;
  std::vector<std::string> mirror_notes;
  std::uint64_t clock_moves = 0;
  // AC5
  std::uint64_t corpus_traces = 0;
  std::uint64_t compatible = 0;
  std::uint64_t compatible_not_serialisable = 0;
  std::uint64_t undecided = 0;
  std::uint64_t serialisable_not_compatible = 0;  // appropriate pairs only; reported
  // AC6
  std::uint64_t runs_checked = 0;
  std::uint64_t steps_checked = 0;
  std::uint64_t timestamp_failures = 0;
  std::vector<std::string> timestamp_notes;
};

void classify(const Trace& t, const Scenario& s, bool appropriate, Tally& tally) {
  ++tally.corpus_traces;
  CheckOptions opts;
  opts.flag_waiver = false;
  const Verdict c = check_view_compatible(t, s, opts);
  const Verdict v = check_view_serialisable(t, s, opts);
  if (!c.exhaustive || !v.exhaustive) ++tally.undecided;
  if (c.positive()) {
    ++tally.compatible;
    if (!(v.positive() && v.exhaustive)) ++tally.compatible_not_serialisable;
  } else if (appropriate && v.positive() && c.exhaustive) {
    ++tally.serialisable_not_compatible;
  }
}

void timestamp_failure(Tally& tally, const std::string& what) {
  ++tally.timestamp_failures;
  if (tally.timestamp_notes.size() < 5) tally.timestamp_notes.push_back(what);
}

// Steps one seeded run by hand and checks the timestamp conditions directly.
void watch_timestamps(const Scenario& s, Model m, std::uint64_t seed, Tally& tally) {
  Simulation sim(s, m);
  std::mt19937_64 rng(seed);
  try {
    while (!sim.done() && sim.world().steps < 10'000) {
      const std::vector<AgentStep> en = sim.enabled();
      if (en.empty()) break;
      const AgentStep pick = en[rng() % en.size()];
      const World before = sim.world();
      sim.apply({pick});
      const World& after = sim.world();
      ++tally.steps_checked;
      for (const auto& [loc, e] : after.replicas.entries()) {
        if (e.ts < before.replicas.lookup(loc).ts) timestamp_failure(tally, s.name + ": replica timestamp decreased");
      }
      for (DataCentreId d = 0; d < after.clocks.size(); ++d) {
        if (after.clocks.tick(d) < before.clocks.tick(d)) timestamp_failure(tally, s.name + ": clock decreased");
      }
      // A data centre that handled a write carrying t ends the step with clock >= t.
      if (pick.agent.kind == AgentRef::Kind::kDataCentre) {
        const Message& msg = before.messages.at(pick.message);
        if (const auto* f = std::get_if<ForwardedRequest>(&msg.payload); f && !is_read(f->body)) {
          if (after.clocks.now(s.cluster, pick.agent.id) < f->ts) {
            timestamp_failure(tally, s.name + ": clock behind a received write timestamp");
          }
        }
      }
    }
  } catch (const std::exception& e) {
    timestamp_failure(tally, s.name + ": " + e.what());
  }
  ++tally.runs_checked;
  if (!issued_well_ordered(sim.world().issued)) timestamp_failure(tally, s.name + ": issued timestamps clash");
}

// The CM1 schedule that mirrors a CM0 one: every db step becomes a step of the
// requesting client's home data centre with the only ALL/ALL selection. Clocks
// only tick when they issue, so before a write the managing clock is moved past
// every timestamp issued so far when it lags; the db applies writes in arrival
// order and the data centre has to win the same way.
Schedule cm0_to_cm1(const Scenario& s, const Schedule& cm0, std::uint64_t& clock_moves) {
  Simulation ground(s, Model::kCm0);
  Simulation refined(s, Model::kCm1);
  Schedule out;
  auto take = [&](const GlobalStep& g) {
    refined.apply(g);
    out.push_back(g);
  };
  for (const GlobalStep& g : cm0) {
    GlobalStep mapped;
    for (const AgentStep& a : g) {
      if (a.agent.kind != AgentRef::Kind::kDb) {
        mapped.push_back(a);
        continue;
      }
      const auto& req = std::get<ExternalRequest>(ground.world().messages.at(a.message).payload);
      const DataCentreId home = s.clients.at(req.client).home;
      if (!is_read(req.body)) {
        std::uint64_t latest = 0;
        for (const Timestamp& t : refined.world().issued) latest = std::max(latest, t.tick());
        if (refined.world().clocks.tick(home) <= latest) {
          take({{{AgentRef::Kind::kClock, home}, latest + 1, 0}});
          ++clock_moves;
        }
      }
      mapped.push_back({{AgentRef::Kind::kDataCentre, home}, a.message, 0});
    }
    ground.apply(g);
    take(mapped);
  }
  return out;
}

void corpus_criteria(const Corpus& corpus, Tally& tally) {
  for (const std::string& text : corpus.texts) {
    // Ground model once per scenario; policies play no part there.
    {
      const Scenario s = testing::with_policies(text, corpus.pairs.front());
      SearchOptions opts;
      opts.budget = 3'000'000;
      const ExploreResult ex = explore(s, Model::kCm0, opts, [&](const RunResult& r) {
        ++tally.cm0_traces;
        classify(r.trace, s, true, tally);
        std::string why;
        try {
          const Schedule sched = cm0_to_cm1(s, r.schedule, tally.clock_moves);
          const RunResult mirrored = run_schedule(s, Model::kCm1, sched, 10'000);
          if (!mirrored.complete) {
            why = "CM1 replay incomplete";
          } else if (!view_equivalent(mirrored.trace, r.trace)) {
            why = "views differ\n" + format_trace(r.trace, s, {}) + "---\n" + format_trace(mirrored.trace, s, {});
          }
        } catch (const std::exception& e) {
          why = e.what();
        }
        if (!why.empty()) {
          ++tally.cm0_to_cm1_failures;
          if (tally.mirror_notes.size() < 3) tally.mirror_notes.push_back(s.name + ": " + why);
        }
        return true;
      });
      if (!ex.exhaustive) ++tally.cm0_to_cm1_failures;
    }

    for (const testing::PolicyPair& pair : corpus.pairs) {
      const Scenario s = testing::with_policies(text, pair);
      const bool appropriate = is_appropriate(pair.read, pair.write);

      // CM1, exhaustively.
      ++tally.cm1_cases;
      std::map<std::string, Trace> views;
      const auto t0 = Clock::now();
      std::vector<Trace> traces;
      try {
        SearchOptions opts;
        opts.budget = 3'000'000;
        const ExploreResult ex = explore(s, Model::kCm1, opts, [&](const RunResult& r) {
          ++tally.cm1_traces;
          const Verdict v = check_view_compatible(r.trace, s, CheckOptions{1'000'000, true, false});
          if (!v.positive()) ++tally.cm1_incompatible;
          if (!issued_well_ordered(r.issued)) timestamp_failure(tally, s.name + ": CM1 issued timestamps clash");
          views.emplace(view_key(r.trace, s), r.trace);
          traces.push_back(r.trace);
          return true;
        });
        if (!ex.exhaustive) ++tally.cm1_not_exhaustive;
      } catch (const InvariantViolation& e) {
        timestamp_failure(tally, s.name + " " + pair.label + ": " + e.what());
        ++tally.cm1_not_exhaustive;
      }
      tally.cm1_seconds += seconds_since(t0);
      for (const Trace& t : traces) classify(t, s, appropriate, tally);

      // Every CM1 view is reachable in CM2.
      for (const auto& [key, target] : views) {
        ++tally.cm1_views;
        SearchOptions opts;
        opts.budget = 2'000'000;
        const std::size_t agents = s.clients.size();
        const SearchResult found = search_schedules(
            s, Model::kCm2, [&](const Trace& t) { return view_equivalent(t, target); }, opts,
            [&](const Trace& t) { return strays_from(t, target, agents); });
        if (!found.found) ++tally.cm1_to_cm2_failures;
      }

      // CM2: bounded exploration plus seeded runs.
      try {
        SearchOptions opts;
        opts.budget = kCm2Budget;
        explore(s, Model::kCm2, opts, [&](const RunResult& r) {
          ++tally.runs_checked;
          if (!issued_well_ordered(r.issued)) timestamp_failure(tally, s.name + ": CM2 issued timestamps clash");
          classify(r.trace, s, appropriate, tally);
          return true;
        });
      } catch (const InvariantViolation& e) {
        timestamp_failure(tally, s.name + " " + pair.label + ": " + e.what());
      }
      for (std::uint64_t seed = 0; seed < kCm2Seeds; ++seed) {
        watch_timestamps(s, Model::kCm2, seed, tally);
        watch_timestamps(s, Model::kCm1, seed, tally);
      }
    }
  }
}

void ac1(const std::string& cli, const std::string& dir, const std::string& work) {
  const std::string scn = dir + "/counterexample.scn";
  const std::string trace = work + "/ac1-witness.log";
  const auto t0 = Clock::now();
  const Outcome search =
      run_cli(cli, "search '" + scn + "' --model cm2 --predicate anomaly-read-stale --trace '" + trace + "'");
  const Outcome compat = run_cli(cli, "check '" + scn + "' compatible --trace '" + trace + "'");
  const Outcome serial = run_cli(cli, "check '" + scn + "' serialisable --trace '" + trace + "'");
  const double took = seconds_since(t0);

  bool reads_ok = false;
  try {
    const Scenario s = load_scenario(scn);
    const Trace t = load_trace(trace, s);
    const auto a2 = t.projection(*s.find_client("a2"));
    reads_ok = a2.size() == 4 && format_response(a2[1].response(), s.cluster) == "answer(x,{(0)=(1)})" &&
               format_response(a2[3].response(), s.cluster) == "answer(x,{(0)=(0)})";
  } catch (const std::exception&) {
  }
  const bool pass = search.status == 0 && starts_with(search.out, "verdict=FOUND") && reads_ok &&
                    starts_with(compat.out, "verdict=INCOMPATIBLE exhaustive=true") &&
                    starts_with(serial.out, "verdict=NOT_SERIALISABLE exhaustive=true") && took < 5.0;
  report("AC1", pass,
         "counterexample: witness " + std::string(reads_ok ? "reads 1 then 0" : "missing or wrong") + "; " +
             verdict_of(compat.out) + "; " + verdict_of(serial.out) + "; " +
             fmt_seconds(took) + " (limit 5s)");
}

void ac2(const Tally& t) {
  const bool pass = t.cm1_incompatible == 0 && t.cm1_not_exhaustive == 0 && t.cm1_traces > 0 && t.cm1_seconds < 120;
  report("AC2", pass,
         std::to_string(t.cm1_cases) + " cases, " + std::to_string(t.cm1_traces) + " CM1 traces, " +
             std::to_string(t.cm1_incompatible) + " incompatible, " + std::to_string(t.cm1_not_exhaustive) +
             " enumerations cut short; " + fmt_seconds(t.cm1_seconds) + " (limit 120s)");
}

void ac3(const std::string& cli, const std::string& dir) {
  const std::string scn = dir + "/stale-one.scn";
  bool shape = false;
  try {
    const Scenario s = load_scenario(scn);
    shape = s.read_policy == Policy::one() && s.write_policy == Policy::one() &&
            s.cluster.copies(0, 1).size() == 2;
  } catch (const std::exception&) {
  }
  const auto t0 = Clock::now();
  const Outcome cm2 = run_cli(cli, "search '" + scn + "' --model cm2 --predicate incompatible");
  const Outcome cm0 = run_cli(cli, "search '" + scn + "' --model cm0 --predicate incompatible");
  const double took = seconds_since(t0);
  const bool pass = shape && cm2.status == 0 && starts_with(cm2.out, "verdict=FOUND") && cm0.status == 0 &&
                    starts_with(cm0.out, "verdict=NOT_FOUND exhaustive=true") && took < 30;
  report("AC3", pass,
         "stale-one, ONE/ONE over 2 copies: cm2 " + verdict_of(cm2.out) + ", cm0 " + verdict_of(cm0.out) + "; " +
             fmt_seconds(took) + " (limit 30s)");
}

void ac4(const Tally& t) {
  const bool pass = t.cm0_to_cm1_failures == 0 && t.cm1_to_cm2_failures == 0 && t.cm0_traces > 0 && t.cm1_views > 0;
  report("AC4", pass,
         std::to_string(t.cm0_traces) + " CM0 traces mirrored in CM1 (" + std::to_string(t.cm0_to_cm1_failures) +
             " failures, " + std::to_string(t.clock_moves) + " clock moves); " + std::to_string(t.cm1_views) + " distinct CM1 views reproduced in CM2 (" +
             std::to_string(t.cm1_to_cm2_failures) + " failures)");
  for (const auto& n : t.mirror_notes) std::cout << "    " << n << std::endl;
}

void ac5(const Tally& t) {
  const bool pass = t.compatible_not_serialisable == 0 && t.compatible > 0;
  report("AC5", pass,
         std::to_string(t.corpus_traces) + " traces, " + std::to_string(t.compatible) + " compatible, " +
             std::to_string(t.compatible_not_serialisable) + " of them not serialisable; " +
             std::to_string(t.undecided) + " undecided within budget");
  std::cout << "    note: serialisable but incompatible under appropriate policies: "
            << t.serialisable_not_compatible << std::endl;
}

void ac6(const Tally& t) {
  std::string detail = std::to_string(t.runs_checked) + " runs, " + std::to_string(t.steps_checked) +
                       " hand-stepped steps, " + std::to_string(t.timestamp_failures) + " violations";
  for (const auto& n : t.timestamp_notes) detail += "; " + n;
  report("AC6", t.timestamp_failures == 0 && t.runs_checked > 0, detail);
}

// Brute-force reference for complies and sufficient, written from the
// policy definitions with integer arithmetic.
struct Layout {
  ClusterConfig cfg;
  std::string label;
};

std::vector<Layout> layouts() {
  std::vector<Layout> out;
  auto make = [&](const std::string& dcs, int r) {
    const std::string text =
        "datacentre.dc1.offset = 1\n"
        "datacentre.dc2.offset = 2\n"
        "relation.x.arity = 1\n"
        "relation.x.datacentres = " + dcs + "\n"
        "relation.x.replication = " + std::to_string(r) + "\n";
    out.push_back({parse_scenario(text).cluster, dcs + " x" + std::to_string(r)});
  };
  for (int r = 1; r <= 6; ++r) make("dc1", r);
  for (int r = 1; r <= 3; ++r) make("dc1, dc2", r);
  return out;
}

std::vector<Policy> policies() {
  std::vector<Policy> out{Policy::all(), Policy::one(), Policy::two(), Policy::three(),
                          Policy::local_one(0), Policy::local_one(1)};
  for (Rational q : {Rational{1, 2}, Rational{1, 3}, Rational{2, 3}}) {
    out.push_back(Policy::quorum(q));
    out.push_back(Policy::each_quorum(q));
    out.push_back(Policy::local_quorum(q, 0));
  }
  return out;
}

bool more_than(std::int64_t part, Rational q, std::int64_t whole) { return part * q.den > q.num * whole; }

bool oracle_complies(const std::vector<NodeId>& g, const Policy& p, const ClusterConfig& cfg) {
  const auto c = static_cast<std::int64_t>(cfg.copies(0, 1).size());
  const auto n = static_cast<std::int64_t>(g.size());
  auto in = [&](DataCentreId d) {
    std::int64_t k = 0;
    for (const NodeId& x : g) k += x.dc == d;
    return k;
  };
  switch (p.kind) {
    case Policy::Kind::kAll: return n == c;
    case Policy::Kind::kOne: return n >= 1;
    case Policy::Kind::kTwo: return n >= 2;
    case Policy::Kind::kThree: return n >= 3;
    case Policy::Kind::kQuorum: return more_than(n, p.q, c);
    case Policy::Kind::kEachQuorum:
      for (DataCentreId d : cfg.relation(0).datacentres) {
        if (!more_than(in(d), p.q, static_cast<std::int64_t>(cfg.local_copies(0, 1, d).size()))) return false;
      }
      return true;
    case Policy::Kind::kLocalOne: return in(p.dc) == n && n >= 1;
    case Policy::Kind::kLocalQuorum: return in(p.dc) == n && more_than(n, p.q, c);
  }
  return false;
}

bool oracle_sufficient(const std::vector<std::int64_t>& per_dc, const Policy& p, const ClusterConfig& cfg) {
  std::int64_t total = 0;
  for (auto v : per_dc) total += v;
  const auto c = static_cast<std::int64_t>(cfg.copies(0, 1).size());
  auto local = [&](DataCentreId d) { return static_cast<std::int64_t>(cfg.local_copies(0, 1, d).size()); };
  switch (p.kind) {
    case Policy::Kind::kAll: return total == c;
    case Policy::Kind::kOne: return total >= 1;
    case Policy::Kind::kTwo: return total >= 2;
    case Policy::Kind::kThree: return total >= 3;
    case Policy::Kind::kQuorum: return more_than(total, p.q, c);
    case Policy::Kind::kEachQuorum:
      for (DataCentreId d : cfg.relation(0).datacentres) {
        if (!more_than(per_dc[d], p.q, local(d))) return false;
      }
      return true;
    case Policy::Kind::kLocalOne: return per_dc[p.dc] >= 1;
    case Policy::Kind::kLocalQuorum: return more_than(per_dc[p.dc], p.q, local(p.dc));
  }
  return false;
}

void ac7() {
  std::uint64_t rows = 0, mismatches = 0, boundary = 0, boundary_bad = 0;
  for (const Layout& l : layouts()) {
    const ClusterConfig& cfg = l.cfg;
    const std::vector<NodeId> c = cfg.copies(0, 1);
    for (const Policy& p : policies()) {
      // complies over every subset, and the enumeration as the same filter.
      std::vector<Selection> expected;
      for (std::uint32_t mask = 0; mask < (1u << c.size()); ++mask) {
        Selection g;
        for (std::size_t k = 0; k < c.size(); ++k) {
          if (mask & (1u << k)) g.push_back(c[k]);
        }
        const bool want = oracle_complies(g, p, cfg);
        ++rows;
        if (complies(g, p, cfg, 0, 1) != want) ++mismatches;
        if (want) expected.push_back(g);
      }
      std::sort(expected.begin(), expected.end(), [](const Selection& a, const Selection& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
      });
      if (enumerate_compliant_selections(cfg, 0, 1, p, 1u << 10) != expected) ++mismatches;

      // sufficient over every count vector.
      const DataCentreId dcs = static_cast<DataCentreId>(cfg.datacentres.size());
      std::vector<std::int64_t> per_dc(dcs, 0);
      std::vector<std::int64_t> limit(dcs);
      for (DataCentreId d = 0; d < dcs; ++d) limit[d] = static_cast<std::int64_t>(cfg.local_copies(0, 1, d).size());
      while (true) {
        CountState counts(cfg, 0);
        for (DataCentreId d = 0; d < dcs; ++d) counts.add(1, d, static_cast<std::uint32_t>(per_dc[d]));
        ++rows;
        if (sufficient(counts, p, cfg, 0) != oracle_sufficient(per_dc, p, cfg)) ++mismatches;
        DataCentreId d = 0;
        while (d < dcs && ++per_dc[d] > limit[d]) per_dc[d++] = 0;
        if (d == dcs) break;
      }
    }
    // Strict majority at q = 1/2: half is not enough, half plus one is.
    if (c.size() % 2 == 0) {
      ++boundary;
      Selection half(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(c.size() / 2));
      Selection more(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(c.size() / 2 + 1));
      if (complies(half, Policy::quorum(), cfg, 0, 1) || !complies(more, Policy::quorum(), cfg, 0, 1)) ++boundary_bad;
      CountState h(cfg, 0), m(cfg, 0);
      h.add(1, 0, static_cast<std::uint32_t>(std::min(c.size() / 2, cfg.local_copies(0, 1, 0).size())));
      h.add(1, 1, static_cast<std::uint32_t>(c.size() / 2 - std::min(c.size() / 2, cfg.local_copies(0, 1, 0).size())));
      m = h;
      m.add(1, cfg.local_copies(0, 1, 0).size() > c.size() / 2 ? 0 : 1, 1);
      if (sufficient(h, Policy::quorum(), cfg, 0) || !sufficient(m, Policy::quorum(), cfg, 0)) ++boundary_bad;
    }
  }
  report("AC7", mismatches == 0 && boundary_bad == 0 && rows > 0,
         std::to_string(rows) + " truth-table rows over |C| in 1..6, " + std::to_string(mismatches) +
             " mismatches; strict-majority boundary checked on " + std::to_string(boundary) + " layouts, " +
             std::to_string(boundary_bad) + " wrong");
}

void ac8(const std::string& cli, const std::string& dir, const std::string& work) {
  int identical = 0, total = 0;
  bool ran = true;
  for (const char* name : {"intro.scn", "counterexample.scn"}) {
    for (const char* model : {"cm0", "cm1", "cm2"}) {
      std::vector<std::string> outputs;
      for (int k = 0; k < 3; ++k) {
        const std::string path = work + "/ac8-" + name + "-" + model + "-" + std::to_string(k) + ".log";
        const Outcome o = run_cli(cli, "run '" + dir + "/" + name + "' --model " + model + " --seed 7 --trace '" + path + "'");
        ran = ran && o.status == 0;
        outputs.push_back(slurp(path));
      }
      ++total;
      identical += !outputs[0].empty() && outputs[0] == outputs[1] && outputs[1] == outputs[2];
    }
  }
  report("AC8", ran && identical == total,
         std::to_string(identical) + "/" + std::to_string(total) + " scenario/model pairs byte-identical over 3 runs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance suite"};
  std::string cli, dir, work;
  app.add_option("--cli", cli, "replisim binary")->required()->check(CLI::ExistingFile);
  app.add_option("--scenarios", dir, "bundled scenarios")->required()->check(CLI::ExistingDirectory);
  app.add_option("--work", work, "scratch directory")->required();
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  ac1(cli, dir, work);
  ac3(cli, dir);
  ac7();
  ac8(cli, dir, work);

  Corpus corpus{testing::corpus_texts(kCorpusSeed, kCorpusSize), testing::appropriate_pairs()};
  Tally tally;
  const auto t0 = Clock::now();
  corpus_criteria(corpus, tally);
  ac2(tally);
  ac4(tally);
  ac5(tally);
  ac6(tally);
  std::cout << "corpus: " << corpus.texts.size() << " scenarios x " << corpus.pairs.size()
            << " policy pairs in " << fmt_seconds(seconds_since(t0)) << std::endl;

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
