#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "casa/metrics.hpp"
#include "casa/scenario.hpp"

namespace casa {

using Json = nlohmann::json;

/// Parses JSON text. Syntax errors become Error(parse) with a
/// "<source>:<line>:<column>: " prefix.
Json parse_json(std::string_view text, std::string_view source = "<input>");
Json read_json_file(const std::filesystem::path& path);

Json vec_to_json(const Vec& v);
Vec vec_from_json(const Json& j, std::string_view path = "");

// Decoders throw Error(invalid_config) naming the offending field; optional
// fields fall back to the defaults of the corresponding struct.

Json to_json(const WorldConfig& w);
WorldConfig world_from_json(const Json& j);

Json to_json(const AssistConfig& a);
AssistConfig assist_from_json(const Json& j);

Json to_json(const IrlConfig& c);
IrlConfig irl_config_from_json(const Json& j);

/// [{tick, x, a}, ...]
Json to_json(const Trajectory& traj);
Trajectory trajectory_from_json(const Json& j, std::string_view path = "trajectory");

/// {id, kind: "goal", goal} or {id, kind: "learned", phi, basis}
Json to_json(const Intent& intent);
Intent intent_from_json(const Json& j, std::string_view path = "intent");

Json to_json(const IntentSet& intents);
IntentSet intent_set_from_json(const Json& j);

Json to_json(const ScriptedOperatorSpec& op);
ScriptedOperatorSpec operator_from_json(const Json& j);

Json to_json(const Scenario& s);
/// Validates the result.
Scenario scenario_from_json(const Json& j);

/// A scenario file, or the name of a built-in scenario.
Scenario load_scenario(const std::string& path_or_name);

/// {intent_hint?, demos: [trajectory, ...]}
Json to_json(const DemoSet& demos);
DemoSet demo_set_from_json(const Json& j);

Json to_json(const MetricsReport& r);

// Wire messages, shared by the live service and episode logs.

Json state_message(std::int64_t tick, const State& x, double alpha, const Action& u);
Json inference_message(std::int64_t tick, const ArbitrationResult& r);
Json input_message(std::int64_t tick, const HumanInput& a);
Json error_message(std::string_view code, std::string_view detail);

/// Episode log: a header line carrying the scenario, then per tick the
/// input, the inference message on inference ticks, and the state.
void write_episode_log(std::ostream& out, const Scenario& scenario, const Episode& episode);

struct ReplayReport {
    std::int64_t ticks = 0;
    std::int64_t inference_messages = 0;
    std::int64_t mismatches = 0;
    std::string first_mismatch;  // empty when identical
};

/// Re-runs the logged inputs against a fresh episode and compares every
/// state and inference message byte for byte.
ReplayReport replay_episode_log(std::istream& in, std::string_view source = "<log>");

}  // namespace casa
