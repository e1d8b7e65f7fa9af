#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "compdyn/analysis.hpp"
#include "compdyn/basin.hpp"
#include "compdyn/doe.hpp"
#include "compdyn/network_spec.hpp"
#include "json.hpp"

namespace compdyn {

enum class Task { simulate, fixed_points, sweep, basin, heatmap, doe, glm };

std::string_view task_name(Task t);
Task parse_task(std::string_view name);

/// Starting point of a single simulation. Full variants take phases either
/// drawn at random (ensemble member `member`) or synchronised: every Blue
/// phase at delta[0], Red at 0 and Green at delta[0] - delta[1].
struct InitialState {
  std::vector<double> P;  // empty: 0.5 (times K for the dimensional variants)
  std::string phases = "random";
  std::vector<double> delta;  // centroid differences; empty means zeros
  int member = 0;
};

struct GlmTask {
  std::string input;
  std::string response = "basin";
  std::optional<std::string> weight;
  std::vector<std::string> drop{"iter", "source", "objective"};
  std::vector<std::string> order;  // term order for the sequential table
  int n_repeats = 20;
};

struct DoeTask {
  std::vector<FactorRange> factors;
  int k_init = 17;
  int n_total = 40;
  BoSettings bo;
  std::optional<std::string> resume;  // earlier log to continue from
};

/// Everything a run needs, after defaults are filled in.
struct RunConfig {
  Variant variant = Variant::simple_reduced;
  Task task = Task::simulate;
  std::uint64_t seed = 0;
  std::string output = "out";
  ModelConfig params;
  NetworkSpec network;
  std::optional<std::uint64_t> network_seed;  // unset: the master seed
  ScenarioSettings scenario;
  CentroidMethod centroid = CentroidMethod::recurrence;
  InitialState initial;
  SweepSpec sweep;
  BasinSpec basin;
  HeatmapSpec heatmap;
  DoeTask doe;
  GlmTask glm;
};

/// The JSON schema every config is checked against (draft-07 subset).
const nlohmann::json& config_schema();

/// Checks `doc` against `schema`; throws ValidationError naming the path of
/// the first violation. Supports type, enum, properties, required,
/// additionalProperties, items, minItems, maxItems, minimum, maximum and
/// exclusiveMinimum.
void validate_against(const nlohmann::json& doc, const nlohmann::json& schema, const std::string& path = "$");

/// Applies "key=value" overrides. Keys are dotted paths ("solver.t_end",
/// "network.sigma.0"); a bare model parameter name means "params.<name>".
/// Values are parsed as JSON and fall back to plain strings.
void apply_overrides(nlohmann::json& doc, const std::vector<std::string>& overrides);

/// Schema check, then conversion with defaults and semantic validation.
RunConfig parse_run_config(const nlohmann::json& doc);

/// The fully resolved config; parsing it again gives the same RunConfig.
nlohmann::json to_json(const RunConfig& rc);

/// FNV-1a 64 of the compact resolved config without the output directory,
/// as 16 hex digits.
std::string config_hash(const RunConfig& rc);

struct Preset {
  std::string name;
  std::string description;
  nlohmann::json config;
};

const std::vector<Preset>& presets();
const Preset& find_preset(std::string_view name);  // throws ValidationError

std::shared_ptr<const CoupledNetwork> build_run_network(const RunConfig& rc);
System make_system(const RunConfig& rc);

}  // namespace compdyn
