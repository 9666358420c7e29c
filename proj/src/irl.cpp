#include "casa/irl.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "casa/planner.hpp"

namespace casa {

void DemoSet::validate() const {
    if (demos.empty()) throw Error(ErrorCode::invalid_input, "at least one demonstration is required");
    const int k = demos.front().dim();
    for (const auto& d : demos) {
        if (d.empty()) throw Error(ErrorCode::invalid_input, "empty demonstration");
        if (d.dim() != k) throw Error(ErrorCode::dimension, "demonstrations disagree on state dimension");
    }
}

void IrlConfig::validate() const {
    if (n_samples < 1) throw Error(ErrorCode::invalid_config, "n_samples must be positive");
    if (!(noise_scale > 0.0)) throw Error(ErrorCode::invalid_config, "noise_scale must be positive");
    if (!(learning_rate > 0.0)) throw Error(ErrorCode::invalid_config, "learning_rate must be positive");
    if (max_iters < 1) throw Error(ErrorCode::invalid_config, "max_iters must be positive");
    if (!(grad_tol > 0.0)) throw Error(ErrorCode::invalid_config, "grad_tol must be positive");
    if (l2 < 0.0) throw Error(ErrorCode::invalid_config, "l2 weight must be nonnegative");
    if (rbf_per_axis < 1) throw Error(ErrorCode::invalid_config, "rbf_per_axis must be positive");
}

namespace {

Vec mean_feature_counts(std::span<const Trajectory> trajs, const Intent& intent) {
    Vec total = Vec::Zero(intent.features()->basis.size());
    for (const auto& t : trajs) total += cost_gradient(intent, t);
    return total / static_cast<double>(trajs.size());
}

double mean_cost(std::span<const Trajectory> trajs, const Intent& intent) {
    double total = 0.0;
    for (const auto& t : trajs) total += cost(intent, t);
    return total / static_cast<double>(trajs.size());
}

}  // namespace

Vec irl_gradient(const DemoSet& demos, std::span<const Trajectory> samples, const Intent& intent) {
    if (demos.demos.empty() || samples.empty())
        throw Error(ErrorCode::invalid_input, "IRL gradient needs demonstrations and samples");
    if (intent.features() == nullptr)
        throw Error(ErrorCode::unsupported_intent, "IRL gradient requires a learned intent");
    return mean_feature_counts(demos.demos, intent) - mean_feature_counts(samples, intent);
}

double irl_objective(const DemoSet& demos, std::span<const Trajectory> samples, const Intent& intent) {
    if (demos.demos.empty() || samples.empty())
        throw Error(ErrorCode::invalid_input, "IRL objective needs demonstrations and samples");
    return mean_cost(demos.demos, intent) - mean_cost(samples, intent);
}

namespace {

std::vector<std::vector<Vec>> optimal_plans(const Intent& intent, std::span<const State> starts,
                                            const WorldConfig& world, std::span<const int> horizons) {
    std::vector<std::vector<Vec>> plans;
    plans.reserve(starts.size());
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const int horizon = horizons.empty() ? world.planning_horizon : horizons[i];
        plans.push_back(planner::plan(starts[i], intent, horizon, world).trajectory.states());
    }
    return plans;
}

std::vector<Trajectory> perturb(const std::vector<std::vector<Vec>>& plans, const IrlConfig& cfg,
                                const WorldConfig& world) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Trajectory> out;
    out.reserve(static_cast<std::size_t>(cfg.n_samples));
    for (int s = 0; s < cfg.n_samples; ++s) {
        std::vector<Vec> xs = plans[static_cast<std::size_t>(s) % plans.size()];
        if (cfg.noise_scale > 0.0) {
            for (std::size_t i = 1; i + 1 < xs.size(); ++i)
                for (Eigen::Index d = 0; d < xs[i].size(); ++d) xs[i][d] += cfg.noise_scale * normal(rng);
            planner::project_feasible(xs, world);
        }
        out.push_back(Trajectory::from_states(xs));
    }
    return out;
}

}  // namespace

std::vector<Trajectory> sample_near_optimal(const Intent& intent, std::span<const State> starts,
                                            const IrlConfig& cfg, const WorldConfig& world,
                                            std::span<const int> horizons) {
    if (starts.empty()) throw Error(ErrorCode::invalid_input, "sampling needs at least one start");
    if (!horizons.empty() && horizons.size() != starts.size())
        throw Error(ErrorCode::invalid_input, "one horizon per start is required");
    if (intent.features() == nullptr)
        throw Error(ErrorCode::unsupported_intent, "sampling requires a learned intent");
    if (cfg.n_samples < 1) return {};
    const std::size_t used = std::min(starts.size(), static_cast<std::size_t>(cfg.n_samples));
    return perturb(optimal_plans(intent, starts.first(used), world, horizons.empty() ? horizons : horizons.first(used)),
                   cfg, world);
}

LearnResult learn_intent(const DemoSet& demos, const IrlConfig& cfg, const WorldConfig& world,
                         const LearnOptions& options) {
    demos.validate();
    cfg.validate();
    world.validate();
    if (demos.demos.front().dim() != world.k) throw Error(ErrorCode::dimension, "demo dimension mismatch");

    const RbfBasis basis = RbfBasis::for_workspace(world.workspace, cfg.rbf_per_axis);
    const std::string id = options.id.empty() ? demos.intent_hint.value_or("learned") : options.id;

    std::vector<State> starts;
    std::vector<int> horizons;
    for (const auto& d : demos.demos) {
        starts.push_back(d.front().state);
        horizons.push_back(static_cast<int>(std::max<std::int64_t>(1, d.back().tick - d.front().tick)));
    }

    Vec phi = Vec::Zero(basis.size());
    const Intent probe = Intent::make_learned(id, phi, basis);
    const Vec demo_counts = mean_feature_counts(demos.demos, probe);

    LearnResult result;
    result.intent = probe;

    // The sampled gradient never vanishes, so the iterates keep jittering
    // around the ridge-regularized fixed point. Averaging the second half of
    // the run estimates that point independently of the step schedule.
    const int average_from = cfg.max_iters / 2;
    Vec phi_sum = Vec::Zero(phi.size());
    int n_summed = 0;

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        if (options.stop.stop_requested()) {
            result.cancelled = true;
            break;
        }
        const Intent current = Intent::make_learned(id, phi, basis);
        IrlConfig sample_cfg = cfg;
        sample_cfg.seed = cfg.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(iter);
        const auto samples = perturb(optimal_plans(current, starts, world, horizons), sample_cfg, world);
        const Vec grad = demo_counts - mean_feature_counts(samples, current);
        const double norm = grad.norm();

        result.iterations = iter + 1;
        result.gradient_norm = norm;
        result.gradient_norms.push_back(norm);
        if (options.on_progress) options.on_progress({iter, norm});
        if (norm < cfg.grad_tol) {
            result.converged = true;
            break;
        }
        phi -= cfg.learning_rate * (grad + cfg.l2 * phi);
        if (iter >= average_from) {
            phi_sum += phi;
            ++n_summed;
        }
    }

    const bool averaged = !result.converged && n_summed > 0;
    result.intent = Intent::make_learned(id, averaged ? Vec(phi_sum / n_summed) : phi, basis);
    return result;
}

}  // namespace casa
