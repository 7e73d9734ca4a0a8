#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "replisim/core.hpp"
#include "replisim/policy.hpp"
#include "replisim/term.hpp"

namespace replisim {

/// A rejected scenario. what() joins every diagnostic; each names its line.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<std::string> diagnostics);

  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

struct ClientProgram {
  std::string name;
  DataCentreId home = 0;
  std::vector<RequestBody> steps;
};

struct Scenario {
  std::string name;
  ClusterConfig cluster;
  Policy read_policy = Policy::all();
  Policy write_policy = Policy::all();
  std::vector<ClientProgram> clients;
  FlatStore initial;

  std::size_t request_count() const;
  /// Request ids are fixed by program position: 1 + all earlier steps.
  RequestId request_id(std::uint32_t client, std::size_t step) const;
  std::optional<std::uint32_t> find_client(std::string_view name) const;
};

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);

/// Renders a scenario in the same format; parse_scenario reads it back.
std::string format_scenario(const Scenario& s);

/// Layout, policy and program checks; the returned list is empty when valid.
std::vector<std::string> scenario_problems(const Scenario& s);

/// Timestamp carried by initial records: tick 1 at the lowest-offset data centre.
Timestamp initial_timestamp(const ClusterConfig& cfg);

/// Every copy of every initial record, stamped with initial_timestamp.
ReplicaStore initial_replicas(const Scenario& s);

}  // namespace replisim
