#include "casa/arbitration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace casa {

std::string_view to_string(Method m) noexcept {
    switch (m) {
        case Method::casa: return "casa";
        case Method::pba: return "pba";
        case Method::belief: return "belief";
        case Method::none: return "none";
    }
    return "none";
}

Method method_from_string(std::string_view name) {
    if (name == "casa") return Method::casa;
    if (name == "pba") return Method::pba;
    if (name == "belief") return Method::belief;
    if (name == "none") return Method::none;
    throw Error(ErrorCode::invalid_input, "unknown arbitration method: " + std::string(name));
}

void AssistConfig::validate() const {
    if (estimator.kind == EstimatorKind::map && !(estimator.lambda > 0.0))
        throw Error(ErrorCode::invalid_prior, "lambda must be positive");
    if (!(epsilon > 0.0)) throw Error(ErrorCode::invalid_threshold, "epsilon must be positive");
    if (!(pba_threshold > 0.0)) throw Error(ErrorCode::invalid_threshold, "PBA threshold must be positive");
}

double casa_alpha(double beta) {
    if (beta <= 1.0) return 1.0;
    return 1.0 / beta;
}

double casa_alpha(const ConfidenceEstimate& beta_star) {
    return casa_alpha(beta_star.beta);
}

double pba_alpha(double distance, double threshold) {
    if (!(threshold > 0.0)) throw Error(ErrorCode::invalid_threshold, "PBA threshold must be positive");
    if (distance < 0.0) throw Error(ErrorCode::invalid_input, "negative distance");
    return std::min(1.0, distance / threshold);
}

double belief_alpha(double p_star, int n_intents) {
    if (n_intents < 2) throw Error(ErrorCode::invalid_arity, "belief arbitration needs at least two intents");
    if (!(p_star >= 0.0 && p_star <= 1.0)) throw Error(ErrorCode::invalid_input, "probability outside [0, 1]");
    const double n = n_intents;
    const double robot = std::clamp((p_star * n - 1.0) / (n - 1.0), 0.0, 1.0);
    return 1.0 - robot;
}

Action blend(const HumanInput& input, const Action& u_star, double alpha, const WorldConfig& config) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::invalid_alpha, "alpha outside [0, 1]");
    const Action human = teleop_map(input, config);
    if (alpha == 1.0) return human;
    if (u_star.u.size() != config.k) throw Error(ErrorCode::dimension, "u* dimension mismatch");
    if (alpha == 0.0) return {clip_norm(u_star.u, config.max_speed)};
    return {clip_norm(alpha * human.u + (1.0 - alpha) * u_star.u, config.max_speed)};
}

Vec assistance_target(const Intent& intent) {
    if (const auto* g = intent.goal()) return g->goal;
    return intent.features()->min_center();
}

ArbitrationResult arbitrate(Method method, const Trajectory& traj, const IntentSet& intents,
                            const WorldConfig& config, const AssistConfig& assist, std::optional<int> t,
                            ArbitrationCache* cache, const PlanFunction& plan_fn) {
    if (traj.empty()) throw Error(ErrorCode::invalid_input, "arbitration needs a non-empty trajectory");
    const HumanInput& input = traj.back().input;

    ArbitrationResult r;
    r.method = method;
    if (method == Method::none) {
        r.alpha = 1.0;
        r.u = teleop_map(input, config);
        r.u_star = Action::zero(config.k);
        return r;
    }
    if (intents.empty()) throw Error(ErrorCode::invalid_input, "arbitration needs at least one intent");

    std::map<std::string, Plan> completions;
    for (const auto& intent : intents) {
        std::optional<double> optimal;
        if (cache) {
            if (auto it = cache->optimal_costs.find(intent.id); it != cache->optimal_costs.end())
                optimal = it->second;
        }
        Plan completion;
        const Suboptimality s = suboptimality(traj, intent, config, t, optimal, plan_fn, &completion);
        if (cache && !optimal) cache->optimal_costs[intent.id] = s.optimal_cost;
        r.betas[intent.id] = estimate_confidence(s, assist.estimator);
        completions[intent.id] = std::move(completion);
    }
    r.t = r.betas.begin()->second.suboptimality.t;

    r.posterior = intent_posterior(intents, r.betas);
    r.pba_posterior = intent_posterior_fixed_beta(intents, r.betas, 1.0);
    r.pba_theta_star = r.pba_posterior.argmax;

    const Vec& x = traj.back().state.x;
    r.alphas.casa = casa_alpha(r.betas.at(r.posterior.argmax));
    r.alphas.pba = pba_alpha((x - assistance_target(intents.at(r.pba_theta_star))).norm(), assist.pba_threshold);
    if (intents.size() >= 2)
        r.alphas.belief = belief_alpha(r.posterior.probability(r.posterior.argmax), static_cast<int>(intents.size()));

    switch (method) {
        case Method::casa:
            r.theta_star = r.posterior.argmax;
            r.alpha = r.alphas.casa;
            break;
        case Method::pba:
            r.theta_star = r.pba_theta_star;
            r.alpha = r.alphas.pba;
            break;
        case Method::belief:
            if (!r.alphas.belief)
                throw Error(ErrorCode::invalid_arity, "belief arbitration needs at least two intents");
            r.theta_star = r.posterior.argmax;
            r.alpha = *r.alphas.belief;
            break;
        case Method::none:
            break;
    }
    r.star_plan = std::move(completions.at(r.theta_star));
    r.u_star = r.star_plan.first_action;
    r.u = blend(input, r.u_star, r.alpha, config);
    return r;
}

}  // namespace casa
