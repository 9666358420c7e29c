#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "casa/arbitration.hpp"
#include "casa/simulator.hpp"

namespace casa {

/// Everything needed to reproduce one headless episode.
struct Scenario {
    std::string name;
    WorldConfig world;
    AssistConfig assist;
    IntentSet intents;                     // what the robot knows
    Method method = Method::casa;
    State start;
    ScriptedOperatorSpec op;
    int n_ticks = 100;
    std::uint64_t seed = 0;
    std::optional<Trajectory> reference;   // defaults to the target's optimal plan

    void validate() const;

    /// The trajectory the operator intends: `reference` if given, otherwise
    /// the target's noise-free optimal plan from `start` over n_ticks.
    Trajectory intended_trajectory() const;
};

namespace scenarios {

/// Two known goals; the operator wants one of them.
Scenario known_goal();

/// Two known goals; the operator heads for a third one the robot does not
/// know, passing close to one of the known goals.
Scenario unknown_goal();

/// Two known goals; the operator follows the optimum of a feature cost whose
/// low-cost corridor bends around the workspace.
Scenario unknown_skill();

/// The intent the operator pursues in a misspecified scenario; it is not in
/// the scenario's intent set.
Intent hidden_intent(const Scenario& s);

Scenario by_name(const std::string& name);
std::vector<std::string> names();

/// Five demonstration trajectories of the hidden intent from distinct starts,
/// recorded under direct teleoperation.
DemoSet demonstrations(const Scenario& s, int count = 5);

}  // namespace scenarios

/// Episode and operator for a scenario, with the operator seeded from the
/// scenario seed.
Episode make_episode(const Scenario& s);
ScriptedOperator make_operator(const Scenario& s);

/// Builds, runs and returns the episode.
Episode run_scenario(const Scenario& s, RunOutcome* outcome = nullptr);

}  // namespace casa
