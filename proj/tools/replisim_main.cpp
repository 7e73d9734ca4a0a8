#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "replisim/consistency.hpp"
#include "replisim/predicates.hpp"
#include "replisim/scenario.hpp"
#include "replisim/search.hpp"
#include "replisim/sim.hpp"
#include "replisim/trace.hpp"

using namespace replisim;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kInvalid = 2;
constexpr int kExhausted = 3;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::string inline_schedule(const Schedule& sched, const Scenario& s) {
  if (sched.empty()) return "EMPTY";
  std::string out;
  for (const GlobalStep& g : sched) {
    if (!out.empty()) out += ',';
    out += format_step(g, s);
  }
  return out;
}

struct RunArgs {
  std::string scenario;
  std::string model;
  std::optional<std::uint64_t> seed;
  std::string schedule;
  std::string trace;
  std::string save_schedule;
  std::uint64_t step_limit = 10'000;
};

int cmd_run(const RunArgs& a) {
  const Scenario s = load_scenario(a.scenario);
  const Model m = parse_model(a.model);
  RunResult r;
  std::vector<std::string> header{"scenario=" + s.name + " model=" + std::string(model_name(m))};
  if (a.seed) {
    r = run_seeded(s, m, *a.seed, a.step_limit);
    header.back() += " seed=" + std::to_string(*a.seed);
  } else {
    r = run_schedule(s, m, load_schedule(a.schedule, s), a.step_limit);
    header.back() += " schedule=given";
  }
  const std::string text = format_trace(r.trace, s, header);
  if (!a.save_schedule.empty()) write_file(a.save_schedule, format_schedule(r.schedule, s));

  const std::string status =
      r.complete ? "complete" : (r.steps >= a.step_limit ? "step-limit" : "incomplete");
  const std::string summary = "status=" + status + " steps=" + std::to_string(r.steps) +
                              " requests=" + std::to_string(r.trace.request_count());
  if (a.trace.empty()) {
    std::cout << text;
    std::cerr << summary << '\n';
  } else {
    write_file(a.trace, text);
    std::cout << summary << '\n';
  }
  if (r.complete) return kOk;
  return status == "step-limit" ? kExhausted : kFailure;
}

struct SearchArgs {
  std::string scenario;
  std::string model;
  std::string predicate;
  std::string predicate_file;
  std::optional<std::uint64_t> budget;
  std::string trace;
  std::string schedule_out;
  std::uint64_t step_limit = SearchOptions{}.step_limit;
};

int cmd_search(const SearchArgs& a) {
  const Scenario s = load_scenario(a.scenario);
  const Model m = parse_model(a.model);
  SearchOptions opts;
  opts.budget = a.budget ? *a.budget : budget_from_env(opts.budget);
  opts.step_limit = a.step_limit;
  opts.order_only = order_only_predicate(a.predicate);
  CheckOptions check;
  check.budget = budget_from_env(check.budget);
  const TracePredicate pred = make_predicate(a.predicate, s, a.predicate_file, check);
  const SearchResult res = search_schedules(s, m, pred, opts);

  if (res.found) {
    const RunResult& w = *res.witness;
    if (!a.trace.empty()) {
      write_file(a.trace, format_trace(w.trace, s,
                                       {"scenario=" + s.name + " model=" + std::string(model_name(m)) +
                                        " predicate=" + a.predicate}));
    }
    if (!a.schedule_out.empty()) write_file(a.schedule_out, format_schedule(w.schedule, s));
    std::cout << "verdict=FOUND exhaustive=true witness=" << inline_schedule(w.schedule, s) << '\n';
  } else {
    std::cout << "verdict=NOT_FOUND exhaustive=" << (res.exhaustive ? "true" : "false")
              << " witness=NONE\n";
  }
  std::cout << "nodes=" << res.nodes << " completed=" << res.completed << '\n';
  return res.found || res.exhaustive ? kOk : kExhausted;
}

struct CheckArgs {
  std::string scenario;
  std::string trace;
  std::string property;
  std::optional<std::uint64_t> budget;
  bool no_waiver = false;
};

int cmd_check(const CheckArgs& a) {
  const Scenario s = load_scenario(a.scenario);
  const Trace t = load_trace(a.trace, s);
  CheckOptions opts;
  opts.budget = a.budget ? *a.budget : budget_from_env(opts.budget);
  opts.waiver = !a.no_waiver;
  const Verdict v = a.property == "compatible" ? check_view_compatible(t, s, opts)
                                               : check_view_serialisable(t, s, opts);
  std::cout << format_verdict(v) << '\n';
  if (v.waiver_dependent) std::cout << "note=waiver-dependent\n";
  return v.exhaustive ? kOk : kExhausted;
}

int cmd_validate(const std::string& path) {
  const Scenario s = load_scenario(path);
  std::cout << "valid scenario=" << s.name << " relations=" << s.cluster.relations.size()
            << " agents=" << s.clients.size() << " requests=" << s.request_count() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Replicated database simulator and consistency checker"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "execute one run and record its trace");
  run_cmd->add_option("scenario", run.scenario, "scenario file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--model", run.model, "cm0, cm1 or cm2")->required();
  auto* seed_opt = run_cmd->add_option("--seed", run.seed, "scheduler seed");
  auto* sched_opt = run_cmd->add_option("--schedule", run.schedule, "replay a schedule file")
                        ->check(CLI::ExistingFile);
  seed_opt->excludes(sched_opt);
  run_cmd->add_option("--trace", run.trace, "write the trace here instead of stdout");
  run_cmd->add_option("--save-schedule", run.save_schedule, "write the executed schedule");
  run_cmd->add_option("--step-limit", run.step_limit, "maximum global steps");

  SearchArgs search;
  auto* search_cmd = app.add_subcommand("search", "look for a schedule whose trace satisfies a predicate");
  search_cmd->add_option("scenario", search.scenario, "scenario file")->required()->check(CLI::ExistingFile);
  search_cmd->add_option("--model", search.model, "cm0, cm1 or cm2")->required();
  search_cmd->add_option("--predicate", search.predicate,
                         "anomaly-read-stale, print-pair, incompatible, not-serialisable or custom-file")
      ->required();
  search_cmd->add_option("--predicate-file", search.predicate_file, "file for custom-file")
      ->check(CLI::ExistingFile);
  search_cmd->add_option("--budget", search.budget, "explored nodes");
  search_cmd->add_option("--trace", search.trace, "write the witness trace");
  search_cmd->add_option("--schedule-out", search.schedule_out, "write the witness schedule");
  search_cmd->add_option("--step-limit", search.step_limit, "maximum depth of a schedule");

  CheckArgs check;
  auto* check_cmd = app.add_subcommand("check", "decide view compatibility or serialisability of a trace");
  check_cmd->add_option("scenario", check.scenario, "scenario file")->required()->check(CLI::ExistingFile);
  check_cmd->add_option("property", check.property, "compatible or serialisable")
      ->required()
      ->check(CLI::IsMember({"compatible", "serialisable"}));
  check_cmd->add_option("--trace", check.trace, "trace file")->required()->check(CLI::ExistingFile);
  check_cmd->add_option("--budget", check.budget, "oracle replays");
  check_cmd->add_flag("--no-waiver", check.no_waiver, "require every write to be installed");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "parse and validate a scenario");
  validate_cmd->add_option("scenario", validate_path, "scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kFailure;
  }

  try {
    if (*run_cmd) {
      if (!run.seed && run.schedule.empty()) {
        std::cerr << "run: one of --seed or --schedule is required\n";
        return kFailure;
      }
      return cmd_run(run);
    }
    if (*search_cmd) return cmd_search(search);
    if (*check_cmd) return cmd_check(check);
    if (*validate_cmd) return cmd_validate(validate_path);
  } catch (const ScenarioError& e) {
    for (const std::string& d : e.diagnostics()) std::cerr << "error: " << d << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
