#include "casa/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace casa {

Suboptimality make_suboptimality(double observed, double completion, double optimal, int t, int k) {
    if (t < 1 || k < 1) throw Error(ErrorCode::invalid_input, "suboptimality needs t >= 1 and k >= 1");
    Suboptimality s{observed, completion, optimal, 0.0, t, k};
    const double raw = observed + completion - optimal;
    const double scale = std::max({1.0, std::abs(observed), std::abs(completion), std::abs(optimal)});
    s.value = raw <= 1e-9 * scale ? 0.0 : raw;
    return s;
}

int inference_steps(std::int64_t tick_span, int period) {
    if (period < 1) throw Error(ErrorCode::invalid_config, "inference period must be >= 1");
    if (tick_span < 0) throw Error(ErrorCode::invalid_input, "negative tick span");
    return static_cast<int>(tick_span / period) + 1;
}

Suboptimality suboptimality(const Trajectory& traj, const Intent& intent, const WorldConfig& config,
                            std::optional<int> t, std::optional<double> optimal, const PlanFunction& plan_fn,
                            Plan* completion_out) {
    if (traj.empty()) throw Error(ErrorCode::invalid_input, "suboptimality of an empty trajectory");
    const std::int64_t span = traj.back().tick - traj.front().tick;
    const int steps = t.value_or(inference_steps(span, config.inference_period_ticks));

    const double observed = cost(intent, traj);
    const int remaining = static_cast<int>(std::max<std::int64_t>(1, config.planning_horizon - span));
    Plan completion = plan_fn(traj.back().state, intent, remaining, config);
    const auto tail = completion.trajectory.states();
    const double completion_cost =
        tail.size() > 1 ? cost(intent, std::span<const Vec>(tail).subspan(1)) : 0.0;

    double optimal_cost = 0.0;
    if (optimal) {
        optimal_cost = *optimal;
    } else {
        optimal_cost = plan_fn(traj.front().state, intent, config.planning_horizon, config).total_cost;
    }
    if (completion_out) *completion_out = std::move(completion);
    return make_suboptimality(observed, completion_cost, optimal_cost, steps, config.k);
}

ConfidenceEstimate beta_mle(const Suboptimality& s, double beta_cap, double s_floor) {
    if (s.t < 1 || s.k < 1) throw Error(ErrorCode::invalid_input, "beta estimate needs t >= 1 and k >= 1");
    ConfidenceEstimate out{0.0, s, EstimatorKind::mle, 0.0};
    out.beta = s.value < s_floor ? beta_cap : (s.t * s.k) / (2.0 * s.value);
    return out;
}

ConfidenceEstimate beta_map(const Suboptimality& s, double lambda) {
    if (!(lambda > 0.0)) throw Error(ErrorCode::invalid_prior, "exponential prior rate must be positive");
    if (s.t < 1 || s.k < 1) throw Error(ErrorCode::invalid_input, "beta estimate needs t >= 1 and k >= 1");
    return {(s.t * s.k) / (2.0 * (lambda + s.value)), s, EstimatorKind::map, lambda};
}

ConfidenceEstimate estimate_confidence(const Suboptimality& s, const EstimatorConfig& config) {
    return config.kind == EstimatorKind::mle ? beta_mle(s, config.beta_cap, config.s_floor)
                                             : beta_map(s, config.lambda);
}

double log_likelihood(const Suboptimality& s, double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(ErrorCode::invalid_beta, "beta must be positive");
    return -beta * s.value + 0.5 * s.t * s.k * std::log(beta / (2.0 * std::numbers::pi));
}

double log_likelihood(const Trajectory& traj, const Intent& intent, double beta, const WorldConfig& config) {
    if (!(beta > 0.0)) throw Error(ErrorCode::invalid_beta, "beta must be positive");
    return log_likelihood(suboptimality(traj, intent, config), beta);
}

double IntentPosterior::probability(const std::string& id) const {
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (ids[i] == id) return probabilities[i];
    throw Error(ErrorCode::unknown_id, "no posterior entry for " + id);
}

IntentPosterior posterior_from_log_likelihoods(std::vector<std::string> ids, const std::vector<double>& lls) {
    if (ids.empty() || ids.size() != lls.size())
        throw Error(ErrorCode::incomplete_input, "posterior needs one log-likelihood per intent");
    const double top = *std::max_element(lls.begin(), lls.end());
    std::vector<double> p(lls.size());
    double total = 0.0;
    for (std::size_t i = 0; i < lls.size(); ++i) {
        double v = std::exp(lls[i] - top);
        if (v < 1e-300) v = 0.0;
        p[i] = v;
        total += v;
    }
    std::size_t best = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] /= total;
        if (p[i] > p[best]) best = i;
    }
    IntentPosterior out;
    out.argmax = ids[best];
    out.ids = std::move(ids);
    out.probabilities = std::move(p);
    return out;
}

namespace {

const ConfidenceEstimate& lookup(const BetaMap& betas, const std::string& id) {
    auto it = betas.find(id);
    if (it == betas.end()) throw Error(ErrorCode::incomplete_input, "missing beta for intent " + id);
    return it->second;
}

}  // namespace

IntentPosterior intent_posterior(const IntentSet& intents, const BetaMap& betas) {
    if (intents.empty()) throw Error(ErrorCode::invalid_input, "posterior over an empty intent set");
    std::vector<double> lls;
    for (const auto& intent : intents) {
        const auto& est = lookup(betas, intent.id);
        lls.push_back(log_likelihood(est.suboptimality, est.beta));
    }
    return posterior_from_log_likelihoods(intents.ids(), lls);
}

IntentPosterior intent_posterior_fixed_beta(const IntentSet& intents, const BetaMap& betas, double beta) {
    if (intents.empty()) throw Error(ErrorCode::invalid_input, "posterior over an empty intent set");
    std::vector<double> lls;
    for (const auto& intent : intents) lls.push_back(log_likelihood(lookup(betas, intent.id).suboptimality, beta));
    return posterior_from_log_likelihoods(intents.ids(), lls);
}

IntentPosterior intent_posterior(const Trajectory& traj, const IntentSet& intents, const BetaMap& betas,
                                 const WorldConfig& config) {
    if (intents.empty()) throw Error(ErrorCode::invalid_input, "posterior over an empty intent set");
    std::vector<double> lls;
    for (const auto& intent : intents) {
        const auto& est = lookup(betas, intent.id);
        lls.push_back(log_likelihood(traj, intent, est.beta, config));
    }
    return posterior_from_log_likelihoods(intents.ids(), lls);
}

}  // namespace casa
