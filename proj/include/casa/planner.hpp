#pragma once

#include <functional>

#include "casa/core_types.hpp"
#include "casa/intents.hpp"

namespace casa {

/// Optimal fixed-horizon trajectory for one intent. `trajectory` holds
/// horizon+1 states (the start included) with zero inputs.
struct Plan {
    Trajectory trajectory;
    double total_cost = 0.0;
    Action first_action;
};

struct WaypointOptimizerOptions {
    int max_iterations = 200;
    int max_halvings = 20;
    double relative_tolerance = 1e-6;
    /// Initial trial displacement of the most-affected waypoint, in ticks of
    /// travel at max speed.
    double initial_step_ticks = 4.0;
};

namespace planner {

/// Goal intents use the closed form (straight line at max speed, then park).
/// Learned intents use projected gradient descent over the waypoints.
Plan plan(const State& start, const Intent& intent, int horizon, const WorldConfig& config);

/// Same as plan(); named for its role as the optimal completion from the end
/// of an observed prefix.
Plan remaining_plan(const State& prefix_end, const Intent& intent, int remaining_horizon,
                    const WorldConfig& config);

Plan plan_goal(const State& start, const GoalCost& goal, int horizon, const WorldConfig& config);

/// Waypoint optimizer. `history` (optional) receives the total cost after
/// every accepted iteration, starting with the initialization's cost.
Plan plan_features(const State& start, const Intent& intent, int horizon, const WorldConfig& config,
                   const WaypointOptimizerOptions& options = {},
                   std::vector<double>* history = nullptr);

/// Straight line toward the lowest-cost RBF center, used to seed plan_features.
std::vector<Vec> feature_plan_initialization(const State& start, const FeatureCost& cost, int horizon,
                                             const WorldConfig& config);

/// Enforces the per-tick displacement bound front to back, after clamping
/// every waypoint to the workspace. waypoints[0] is never moved.
void project_feasible(std::vector<Vec>& waypoints, const WorldConfig& config);

}  // namespace planner

/// Injection point for code that wants to observe or replace planning.
using PlanFunction = std::function<Plan(const State&, const Intent&, int, const WorldConfig&)>;

PlanFunction default_plan_function();

}  // namespace casa
