#include "casa/planner.hpp"

#include <algorithm>
#include <cmath>

namespace casa {
namespace {

void check_request(const State& start, int horizon, const WorldConfig& config) {
    if (horizon < 1) throw Error(ErrorCode::invalid_horizon, "planning horizon must be >= 1");
    if (start.x.size() != config.k) throw Error(ErrorCode::dimension, "start state dimension mismatch");
    if (!all_finite(start.x)) throw Error(ErrorCode::invalid_input, "non-finite start state");
}

Plan finish(std::vector<Vec> states, const Intent& intent, const WorldConfig& config) {
    Plan out;
    out.first_action = {(states[1] - states[0]) * config.tick_rate};
    out.trajectory = Trajectory::from_states(states);
    out.total_cost = cost(intent, std::span<const Vec>(states));
    return out;
}

// Cost and per-waypoint gradient of sum_i phi . f(x_i), sharing the exponentials.
struct FeatureEval {
    const FeatureCost& fc;
    double inv_two_s2;
    double inv_s2;

    explicit FeatureEval(const FeatureCost& c)
        : fc(c),
          inv_two_s2(1.0 / (2.0 * c.basis.bandwidth() * c.basis.bandwidth())),
          inv_s2(1.0 / (c.basis.bandwidth() * c.basis.bandwidth())) {}

    // The bias weight adds the same amount to every trajectory of a given
    // length, so the optimizer works without it.
    double state_cost(const Vec& x) const {
        const auto& centers = fc.basis.centers();
        double total = 0.0;
        for (std::size_t j = 0; j < centers.size(); ++j)
            total += fc.phi[static_cast<Eigen::Index>(j)] * std::exp(-(x - centers[j]).squaredNorm() * inv_two_s2);
        return total;
    }

    double total(const std::vector<Vec>& xs) const {
        double sum = 0.0;
        for (const auto& x : xs) sum += state_cost(x);
        return sum;
    }

    Vec gradient(const Vec& x) const {
        const auto& centers = fc.basis.centers();
        Vec g = Vec::Zero(x.size());
        for (std::size_t j = 0; j < centers.size(); ++j) {
            const Vec d = x - centers[j];
            const double f = std::exp(-d.squaredNorm() * inv_two_s2);
            g -= (fc.phi[static_cast<Eigen::Index>(j)] * f * inv_s2) * d;
        }
        return g;
    }
};

}  // namespace

namespace planner {

void project_feasible(std::vector<Vec>& waypoints, const WorldConfig& config) {
    const double step = config.step_length();
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        waypoints[i] = config.workspace.clamp(waypoints[i]);
        const Vec d = waypoints[i] - waypoints[i - 1];
        const double n = d.norm();
        if (n > step * (1.0 + 1e-12)) waypoints[i] = waypoints[i - 1] + d * (step / n);
    }
}

Plan plan_goal(const State& start, const GoalCost& goal, int horizon, const WorldConfig& config) {
    check_request(start, horizon, config);
    if (goal.goal.size() != config.k) throw Error(ErrorCode::dimension, "goal dimension mismatch");
    const double step = config.step_length();
    std::vector<Vec> states;
    states.reserve(static_cast<std::size_t>(horizon) + 1);
    states.push_back(start.x);
    Vec x = start.x;
    for (int i = 0; i < horizon; ++i) {
        const Vec d = goal.goal - x;
        const double n = d.norm();
        if (n <= step) {
            x = goal.goal;
        } else {
            x = x + d * (step / n);
        }
        states.push_back(x);
    }
    return finish(std::move(states), Intent{"", goal}, config);
}

std::vector<Vec> feature_plan_initialization(const State& start, const FeatureCost& fc, int horizon,
                                             const WorldConfig& config) {
    const Vec target = config.workspace.clamp(fc.min_center());
    return plan_goal(start, GoalCost{target}, horizon, config).trajectory.states();
}

Plan plan_features(const State& start, const Intent& intent, int horizon, const WorldConfig& config,
                   const WaypointOptimizerOptions& options, std::vector<double>* history) {
    check_request(start, horizon, config);
    const auto* fc = intent.features();
    if (fc == nullptr) throw Error(ErrorCode::unsupported_intent, "plan_features requires a learned intent");
    if (fc->basis.dim() != config.k) throw Error(ErrorCode::dimension, "feature basis dimension mismatch");

    const FeatureEval eval(*fc);
    std::vector<Vec> xs = feature_plan_initialization(start, *fc, horizon, config);
    const double bias_total = fc->basis.bias() ? fc->phi[fc->basis.size() - 1] * static_cast<double>(xs.size()) : 0.0;
    double current = eval.total(xs);
    if (history) history->push_back(current + bias_total);

    // Descent runs over the per-tick displacements x_i - x_{i-1}; every state
    // after a segment moves with it, so its gradient is the suffix sum of the
    // state gradients. Clipping each segment is then an exact projection.
    const double base_step = options.initial_step_ticks * config.step_length();
    const double step = config.step_length();
    const std::size_t n = xs.size();
    std::vector<Vec> grads(n);
    std::vector<Vec> trial(n);
    double eta = base_step;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        Vec suffix = Vec::Zero(config.k);
        double gmax = 0.0;
        for (std::size_t i = n - 1; i >= 1; --i) {
            suffix += eval.gradient(xs[i]);
            grads[i] = suffix;
            gmax = std::max(gmax, suffix.norm());
        }
        if (!(gmax > 0.0)) break;

        bool accepted = false;
        double candidate = current;
        eta = std::min(base_step, 2.0 * eta);
        for (int h = 0; h <= options.max_halvings; ++h, eta *= 0.5) {
            trial[0] = xs[0];
            for (std::size_t i = 1; i < n; ++i) {
                Vec d = (xs[i] - xs[i - 1]) - (eta / gmax) * grads[i];
                const double len = d.norm();
                if (len > step) d *= step / len;
                trial[i] = config.workspace.clamp(trial[i - 1] + d);
            }
            candidate = eval.total(trial);
            if (candidate <= current) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;

        const double improvement = current - candidate;
        xs.swap(trial);
        current = candidate;
        if (history) history->push_back(current + bias_total);
        if (improvement < options.relative_tolerance * std::max(std::abs(current), 1e-12)) break;
    }
    return finish(std::move(xs), intent, config);
}

Plan plan(const State& start, const Intent& intent, int horizon, const WorldConfig& config) {
    if (const auto* g = intent.goal()) {
        Plan p = plan_goal(start, *g, horizon, config);
        p.total_cost = cost(intent, p.trajectory);
        return p;
    }
    return plan_features(start, intent, horizon, config);
}

Plan remaining_plan(const State& prefix_end, const Intent& intent, int remaining_horizon,
                    const WorldConfig& config) {
    return plan(prefix_end, intent, remaining_horizon, config);
}

}  // namespace planner

PlanFunction default_plan_function() {
    return [](const State& s, const Intent& i, int h, const WorldConfig& c) { return planner::plan(s, i, h, c); };
}

}  // namespace casa
