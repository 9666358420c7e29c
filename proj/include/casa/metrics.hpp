#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "casa/scenario.hpp"

namespace casa {

struct MetricsReport {
    std::string scenario;
    Method method = Method::none;
    std::uint64_t seed = 0;
    double error = 0.0;             // m^2
    double efficiency_cost = 0.0;   // (m/s)^2 summed over ticks
    std::int64_t effort = 0;        // ticks with any key pressed
    std::optional<double> relative_effort;  // effort / NONE effort, same scenario and seed
};

/// n points spaced evenly by arc length along the polyline through the
/// states. A stationary trajectory yields n copies of its first state.
std::vector<Vec> resample_arc_length(const Trajectory& traj, int n = 100);

/// Sum of squared distances between the arc-length resampled curves.
double error_metric(const Trajectory& executed, const Trajectory& reference, int n = 100);

/// Sum over ticks of the squared velocity.
double efficiency_cost(const Trajectory& executed, const WorldConfig& config);

std::int64_t effort(std::span<const HumanInput> inputs);
std::int64_t effort(const Trajectory& traj);

MetricsReport measure(const Scenario& scenario, const Episode& episode);

struct ExperimentRun {
    MetricsReport report;
    Episode episode;
};

/// Runs every (method, seed) cell of the scenario. Relative effort is filled
/// in against a NONE run with the same seed, which is executed on the side
/// when NONE is not requested.
std::vector<ExperimentRun> run_experiment(const Scenario& scenario, std::span<const Method> methods,
                                          std::span<const std::uint64_t> seeds);

/// Header of the per-inference time series, in column order.
std::vector<std::string> time_series_columns(const IntentSet& intents);

/// One row per inference tick. Columns: tick, t, theta_star, beta_<id> for
/// every intent, posterior_<id> for every intent, alpha_casa, alpha_pba,
/// alpha_belief, alpha_applied, misspecified. Intents appear in intent-set
/// order; an absent belief alpha is written as an empty field.
void write_time_series_csv(std::ostream& out, const Episode& episode);

}  // namespace casa
